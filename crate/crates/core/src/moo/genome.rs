use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::secureboost::Hyperparameters;

pub const BINARY_LEN: usize = 11;
const N_F_BITS: usize = 4;
const N_L_BITS: usize = 4;
const DEPTH_BITS: usize = 3;

/// Inclusive range of a real-valued gene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRange {
    pub min: f64,
    pub max: f64,
}

impl RealRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Gene ranges for subsample ratio, purity threshold and learning rate.
pub const REAL_RANGES: [RealRange; 3] = [
    RealRange::new(0.1, 1.0),
    RealRange::new(0.1, 1.0),
    RealRange::new(0.01, 0.3),
];

/// Purity threshold range searched on binary tasks.
pub const BINARY_THETA_RANGE: RealRange = RealRange::new(0.7, 1.0);

/// 11 bits for (n_f, n_l, d), most significant bit first within each field,
/// followed by the real genes (r, θ_p, η).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub bits: [bool; BINARY_LEN],
    pub reals: [f64; 3],
}

fn read_field(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

fn write_field(bits: &mut [bool], value: usize) {
    let width = bits.len();
    for (i, bit) in bits.iter_mut().enumerate() {
        *bit = (value >> (width - 1 - i)) & 1 == 1;
    }
}

/// Decoding context: the purity threshold range depends on the class count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub theta_range: RealRange,
}

impl SearchSpace {
    pub fn for_classes(num_classes: usize) -> Self {
        Self {
            theta_range: if num_classes == 2 {
                BINARY_THETA_RANGE
            } else {
                REAL_RANGES[1]
            },
        }
    }

    fn theta_from_gene(&self, gene: f64) -> f64 {
        let g = REAL_RANGES[1];
        let t = (g.clamp(gene) - g.min) / g.width();
        self.theta_range.clamp(self.theta_range.min + t * self.theta_range.width())
    }

    fn gene_from_theta(&self, theta: f64) -> f64 {
        let g = REAL_RANGES[1];
        let t = (self.theta_range.clamp(theta) - self.theta_range.min) / self.theta_range.width();
        g.clamp(g.min + t * g.width())
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self::for_classes(3)
    }
}

impl Genome {
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut bits = [false; BINARY_LEN];
        bits.iter_mut().for_each(|b| *b = rng.gen());
        let mut reals = [0.0; 3];
        for (x, range) in reals.iter_mut().zip(REAL_RANGES) {
            *x = rng.gen_range(range.min..=range.max);
        }
        Self { bits, reals }
    }

    pub fn clamp_reals(&mut self) {
        for (x, range) in self.reals.iter_mut().zip(REAL_RANGES) {
            *x = range.clamp(*x);
        }
    }

    pub fn decode(&self, space: &SearchSpace) -> Hyperparameters {
        let n_f = read_field(&self.bits[..N_F_BITS]) + 1;
        let n_l = read_field(&self.bits[N_F_BITS..N_F_BITS + N_L_BITS]) + 1;
        let d = read_field(&self.bits[N_F_BITS + N_L_BITS..]) + 1;
        Hyperparameters::new(
            n_f,
            n_l,
            d,
            REAL_RANGES[0].clamp(self.reals[0]),
            space.theta_from_gene(self.reals[1]),
            REAL_RANGES[2].clamp(self.reals[2]),
        )
    }

    /// Inverse of [`Genome::decode`] for in-range hyperparameters; integer
    /// fields are saturated to their bit width.
    pub fn encode(hp: &Hyperparameters, space: &SearchSpace) -> Self {
        let mut bits = [false; BINARY_LEN];
        let field = |v: usize, width: usize| v.clamp(1, 1 << width) - 1;
        write_field(&mut bits[..N_F_BITS], field(hp.n_federated, N_F_BITS));
        write_field(&mut bits[N_F_BITS..N_F_BITS + N_L_BITS], field(hp.n_local, N_L_BITS));
        write_field(&mut bits[N_F_BITS + N_L_BITS..], field(hp.max_depth, DEPTH_BITS));
        Self {
            bits,
            reals: [
                REAL_RANGES[0].clamp(hp.subsample),
                space.gene_from_theta(hp.purity_threshold),
                REAL_RANGES[2].clamp(hp.learning_rate),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn genome(bits: &str, reals: [f64; 3]) -> Genome {
        let mut g = Genome {
            bits: [false; BINARY_LEN],
            reals,
        };
        for (b, c) in g.bits.iter_mut().zip(bits.chars()) {
            *b = c == '1';
        }
        g
    }

    #[test]
    fn range_extremes() {
        let space = SearchSpace::default();
        let lo = genome("00000000000", [0.1, 0.1, 0.01]).decode(&space);
        assert_eq!(lo, Hyperparameters::new(1, 1, 1, 0.1, 0.1, 0.01));
        let hi = genome("11111111111", [1.0, 1.0, 0.3]).decode(&space);
        assert_eq!(hi, Hyperparameters::new(16, 16, 8, 1.0, 1.0, 0.3));
    }

    #[test]
    fn plain_binary_field() {
        let hp = genome("01010000000", [0.5, 0.5, 0.1]).decode(&SearchSpace::default());
        assert_eq!(hp.n_federated, 6);
    }

    #[test]
    fn binary_task_remaps_theta() {
        let space = SearchSpace::for_classes(2);
        assert_eq!(genome("00000000000", [0.5, 0.1, 0.1]).decode(&space).purity_threshold, 0.7);
        assert_eq!(genome("00000000000", [0.5, 1.0, 0.1]).decode(&space).purity_threshold, 1.0);
        let mid = genome("00000000000", [0.5, 0.55, 0.1]).decode(&space).purity_threshold;
        assert!((mid - 0.85).abs() < 1e-12);
    }

    #[test]
    fn decode_is_surjective_on_integer_fields() {
        let space = SearchSpace::default();
        let mut seen = HashSet::new();
        for pattern in 0u32..(1 << BINARY_LEN) {
            let mut g = genome("", [0.5, 0.5, 0.1]);
            for (i, b) in g.bits.iter_mut().enumerate() {
                *b = (pattern >> (BINARY_LEN - 1 - i)) & 1 == 1;
            }
            let hp = g.decode(&space);
            assert!((1..=16).contains(&hp.n_federated));
            assert!((1..=16).contains(&hp.n_local));
            assert!((1..=8).contains(&hp.max_depth));
            seen.insert((hp.n_federated, hp.n_local, hp.max_depth));
        }
        assert_eq!(seen.len(), 16 * 16 * 8);
    }

    #[test]
    fn encode_round_trips() {
        for space in [SearchSpace::for_classes(2), SearchSpace::for_classes(4)] {
            let hp = Hyperparameters::new(5, 1, 3, 0.8, 0.9, 0.3);
            let back = Genome::encode(&hp, &space).decode(&space);
            assert_eq!((back.n_federated, back.n_local, back.max_depth), (5, 1, 3));
            assert!((back.purity_threshold - 0.9).abs() < 1e-12);
            assert_eq!(back.subsample, 0.8);
        }
    }
}
