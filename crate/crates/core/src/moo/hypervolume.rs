use crate::error::{Error, Result};

/// Exact hypervolume dominated by `points` and bounded by the reference
/// point `z` (minimization). Supports one to three objectives. Points that
/// exceed `z` in any coordinate are dropped with a warning.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], z: &[f64]) -> Result<f64> {
    let dims = z.len();
    if !(1..=3).contains(&dims) {
        return Err(Error::UnsupportedDimension(dims));
    }
    let mut kept: Vec<&[f64]> = Vec::with_capacity(points.len());
    let mut clipped = 0;
    for p in points {
        let p = p.as_ref();
        if p.len() != dims {
            return Err(Error::UnsupportedDimension(p.len()));
        }
        if p.iter().zip(z).any(|(x, r)| x > r) {
            clipped += 1;
        } else {
            kept.push(p);
        }
    }
    if clipped > 0 {
        log::warn!("hypervolume: {clipped} point(s) beyond the reference point ignored");
    }
    Ok(match dims {
        1 => kept.iter().map(|p| z[0] - p[0]).fold(0.0, f64::max),
        2 => hv2(kept.iter().map(|p| (p[0], p[1])).collect(), z[0], z[1]),
        _ => hv3(&kept, z),
    })
}

/// Sweep over x: each point adds the strip between its y and the lowest y
/// seen so far.
fn hv2(mut pts: Vec<(f64, f64)>, zx: f64, zy: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_y = zy;
    for (x, y) in pts {
        if y < best_y {
            area += (zx - x) * (best_y - y);
            best_y = y;
        }
    }
    area
}

/// Slices along the third objective; each slab is a 2D problem over the
/// points already below it.
fn hv3(pts: &[&[f64]], z: &[f64]) -> f64 {
    let mut order: Vec<&[f64]> = pts.to_vec();
    order.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    for k in 0..order.len() {
        let lo = order[k][2];
        let hi = if k + 1 < order.len() { order[k + 1][2] } else { z[2] };
        if hi <= lo {
            continue;
        }
        let slab: Vec<(f64, f64)> = order[..=k].iter().map(|p| (p[0], p[1])).collect();
        volume += hv2(slab, z[0], z[1]) * (hi - lo);
    }
    volume
}
