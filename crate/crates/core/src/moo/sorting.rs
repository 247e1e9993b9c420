use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};

/// `a` is no worse than `b` everywhere and strictly better somewhere
/// (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Fast non-dominated sort. Returns the fronts as index lists, rank 0 first,
/// each sorted ascending.
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if dominates(b, a) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Rank of every point (index into the fronts returned by
/// [`non_dominated_sort`]).
pub fn ranks<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    let mut rank = vec![0; points.len()];
    for (r, front) in non_dominated_sort(points).iter().enumerate() {
        for &i in front {
            rank[i] = r;
        }
    }
    rank
}

/// Crowding distance of each member of `front` (indices into `points`),
/// returned in the order of `front`. Boundary members of every objective get
/// `+∞`; gaps are normalized by the objective's extent within the front.
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let dims = points[front[0]].as_ref().len();
    let mut order: Vec<usize> = (0..m).collect();
    for k in 0..dims {
        let value = |i: usize| points[front[i]].as_ref()[k];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(front[a].cmp(&front[b])));
        let (lo, hi) = (value(order[0]), value(order[m - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        let extent = hi - lo;
        if extent <= 0.0 {
            continue;
        }
        for w in 1..m - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (value(order[w + 1]) - value(order[w - 1])) / extent;
            }
        }
    }
    dist
}

/// Rank and crowding distance per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitness {
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

pub fn fitness<P: AsRef<[f64]>>(points: &[P]) -> Fitness {
    let n = points.len();
    let mut rank = vec![0; n];
    let mut crowding = vec![0.0; n];
    for (r, front) in non_dominated_sort(points).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(points, front)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    Fitness { rank, crowding }
}

/// Crowded-comparison order: lower rank, then larger crowding distance, then
/// lower id.
fn crowded_cmp(f: &Fitness, ids: &[u64], a: usize, b: usize) -> Ordering {
    f.rank[a]
        .cmp(&f.rank[b])
        .then(f.crowding[b].total_cmp(&f.crowding[a]))
        .then(ids[a].cmp(&ids[b]))
}

/// Environmental selection of `n` survivors from `points`, returned as
/// indices in crowded-comparison order.
pub fn select<P: AsRef<[f64]>>(points: &[P], ids: &[u64], n: usize) -> Result<Vec<usize>> {
    if points.len() < n {
        return Err(Error::PopulationTooSmall {
            available: points.len(),
            requested: n,
        });
    }
    let f = fitness(points);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| crowded_cmp(&f, ids, a, b));
    order.truncate(n);
    Ok(order)
}

/// Binary tournament under the crowded-comparison order.
pub fn tournament(f: &Fitness, ids: &[u64], rng: &mut impl Rng) -> usize {
    let n = f.rank.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    if crowded_cmp(f, ids, a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}
