use rand::Rng;
use serde::{Deserialize, Serialize};

use super::genome::{Genome, RealRange, BINARY_LEN, REAL_RANGES};

/// Variation probabilities and distribution indices. Mutation probabilities
/// apply per gene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub binary_crossover_prob: f64,
    pub bit_flip_prob: f64,
    pub sbx_prob: f64,
    pub sbx_eta: f64,
    pub mutation_prob: f64,
    pub mutation_eta: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            binary_crossover_prob: 0.9,
            bit_flip_prob: 0.1,
            sbx_prob: 0.9,
            sbx_eta: 2.0,
            mutation_prob: 0.1,
            mutation_eta: 20.0,
        }
    }
}

pub fn vary(a: &Genome, b: &Genome, cfg: &VariationConfig, rng: &mut impl Rng) -> (Genome, Genome) {
    let (mut c1, mut c2) = crossover(a, b, cfg, rng);
    mutate(&mut c1, cfg, rng);
    mutate(&mut c2, cfg, rng);
    (c1, c2)
}

/// Single-point crossover on the bits and SBX on the reals, each applied
/// with its own probability.
pub fn crossover(a: &Genome, b: &Genome, cfg: &VariationConfig, rng: &mut impl Rng) -> (Genome, Genome) {
    let (mut c1, mut c2) = (*a, *b);
    if rng.gen::<f64>() < cfg.binary_crossover_prob {
        let point = rng.gen_range(1..BINARY_LEN);
        for i in point..BINARY_LEN {
            std::mem::swap(&mut c1.bits[i], &mut c2.bits[i]);
        }
    }
    if rng.gen::<f64>() < cfg.sbx_prob {
        for (i, range) in REAL_RANGES.iter().enumerate() {
            let (x, y) = sbx(a.reals[i], b.reals[i], range, cfg.sbx_eta, rng);
            c1.reals[i] = x;
            c2.reals[i] = y;
        }
    }
    (c1, c2)
}

pub fn mutate(g: &mut Genome, cfg: &VariationConfig, rng: &mut impl Rng) {
    for bit in g.bits.iter_mut() {
        if rng.gen::<f64>() < cfg.bit_flip_prob {
            *bit = !*bit;
        }
    }
    for (x, range) in g.reals.iter_mut().zip(REAL_RANGES) {
        if rng.gen::<f64>() < cfg.mutation_prob {
            *x = polynomial_mutation(*x, &range, cfg.mutation_eta, rng);
        }
    }
    g.clamp_reals();
}

/// Bounded simulated binary crossover of one variable pair; each variable
/// takes part with probability 1/2 and children are swapped with
/// probability 1/2.
pub fn sbx(x1: f64, x2: f64, range: &RealRange, eta: f64, rng: &mut impl Rng) -> (f64, f64) {
    if rng.gen::<f64>() > 0.5 || (x1 - x2).abs() <= 1e-14 {
        return (x1, x2);
    }
    let (lo, hi) = (x1.min(x2), x1.max(x2));
    let u: f64 = rng.gen();
    let spread = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let beta_lo = 1.0 + 2.0 * (lo - range.min) / (hi - lo);
    let beta_hi = 1.0 + 2.0 * (range.max - hi) / (hi - lo);
    let c1 = 0.5 * ((lo + hi) - spread(beta_lo) * (hi - lo));
    let c2 = 0.5 * ((lo + hi) + spread(beta_hi) * (hi - lo));
    let (c1, c2) = (range.clamp(c1), range.clamp(c2));
    if rng.gen::<f64>() < 0.5 {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Bounded polynomial mutation.
pub fn polynomial_mutation(x: f64, range: &RealRange, eta: f64, rng: &mut impl Rng) -> f64 {
    let width = range.width();
    if width <= 0.0 {
        return range.min;
    }
    let d1 = (x - range.min) / width;
    let d2 = (range.max - x) / width;
    let u: f64 = rng.gen();
    let power = 1.0 / (eta + 1.0);
    let delta = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(power) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(power)
    };
    range.clamp(x + delta * width)
}
