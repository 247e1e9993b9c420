use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

/// Quantile cut points of one feature. Bin `b` holds values `x` with
/// `cuts[b-1] < x <= cuts[b]`; the last bin is open above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub cuts: Vec<f64>,
}

impl FeatureBins {
    /// Builds at most `max_bins` bins from the column's empirical quantiles.
    /// Columns with few distinct values get one bin per value.
    pub fn fit(column: ArrayView1<f64>, max_bins: usize) -> Self {
        assert!(max_bins >= 2, "need at least two bins");
        let mut sorted: Vec<f64> = column.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let Some(&max) = sorted.last() else {
            return Self { cuts: Vec::new() };
        };
        let mut distinct = sorted.clone();
        distinct.dedup();

        let mut cuts: Vec<f64> = if distinct.len() <= max_bins {
            distinct[..distinct.len() - 1].to_vec()
        } else {
            let n = sorted.len();
            (1..max_bins).map(|q| sorted[q * n / max_bins - 1]).collect()
        };
        cuts.dedup();
        cuts.retain(|&c| c < max);
        Self { cuts }
    }

    pub fn num_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn bin_of(&self, x: f64) -> usize {
        self.cuts.partition_point(|&c| c < x)
    }

    /// Upper edge of bin `b`; rows with `x <= threshold(b)` fall in bins `0..=b`.
    pub fn threshold(&self, b: usize) -> f64 {
        self.cuts[b]
    }
}

/// One party's feature block, quantized column-major.
#[derive(Debug, Clone)]
pub struct BinnedBlock {
    pub bins: Vec<FeatureBins>,
    /// `codes[feature][row]`
    pub codes: Vec<Vec<u8>>,
}

impl BinnedBlock {
    pub fn fit(features: &Array2<f64>, max_bins: usize) -> Self {
        let max_bins = max_bins.clamp(2, 256);
        let mut bins = Vec::with_capacity(features.ncols());
        let mut codes = Vec::with_capacity(features.ncols());
        for column in features.columns() {
            let fb = FeatureBins::fit(column, max_bins);
            codes.push(column.iter().map(|&x| fb.bin_of(x) as u8).collect());
            bins.push(fb);
        }
        Self { bins, codes }
    }

    pub fn num_features(&self) -> usize {
        self.bins.len()
    }
}
