use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::moo::hypervolume;

/// Offset of the hypervolume reference point beyond the normalized range.
pub const REFERENCE_OFFSET: f64 = 0.01;

/// Per-objective min–max scaling fitted on a pool of objective vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Normalizer {
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a [f64; 3]>) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in points {
            for k in 0..3 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Self { min, max }
    }

    /// Maps each axis to [0, 1]; an axis without spread maps to 0.
    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let span = self.max[k] - self.min[k];
            if span > 0.0 {
                out[k] = (p[k] - self.min[k]) / span;
            }
        }
        out
    }

    pub fn reference() -> [f64; 3] {
        [1.0 + REFERENCE_OFFSET; 3]
    }

    /// Hypervolume of the normalized points against [`Normalizer::reference`].
    pub fn hypervolume(&self, points: &[[f64; 3]]) -> Result<f64> {
        let scaled: Vec<[f64; 3]> = points.iter().map(|p| self.apply(p)).collect();
        hypervolume(&scaled, &Self::reference())
    }
}

/// Normalizes a pool of raw objective triples and returns them with the
/// reference point.
pub fn normalize_objectives(points: &[[f64; 3]]) -> (Vec<[f64; 3]>, [f64; 3]) {
    let norm = Normalizer::fit(points);
    (points.iter().map(|p| norm.apply(p)).collect(), Normalizer::reference())
}
