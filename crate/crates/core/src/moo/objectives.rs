use serde::{Deserialize, Serialize};

/// Index of each objective within a triple.
pub const U: usize = 0;
pub const C: usize = 1;
pub const P: usize = 2;

/// Raw objectives (utility loss, training cost, privacy leakage) together
/// with their penalized counterparts used for ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTriple {
    pub raw: [f64; 3],
    pub penalized: [f64; 3],
}

impl ObjectiveTriple {
    pub fn new(eps_u: f64, eps_c: f64, eps_p: f64) -> Self {
        let raw = [eps_u, eps_c, eps_p];
        Self { raw, penalized: raw }
    }

    pub fn eps_u(&self) -> f64 {
        self.raw[U]
    }

    pub fn eps_c(&self) -> f64 {
        self.raw[C]
    }

    pub fn eps_p(&self) -> f64 {
        self.raw[P]
    }

    pub fn is_penalized(&self, i: usize) -> bool {
        self.penalized[i] > self.raw[i]
    }
}

/// Upper bounds `φ` with penalty coefficients `α`. Only ε_c and ε_p are
/// penalized unless `penalize_utility` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub bounds: [Option<f64>; 3],
    pub alpha: [f64; 3],
    pub penalize_utility: bool,
}

impl Constraints {
    pub fn unbounded() -> Self {
        Self {
            bounds: [None; 3],
            alpha: [0.0; 3],
            penalize_utility: false,
        }
    }

    pub fn new(phi_u: Option<f64>, phi_c: Option<f64>, phi_p: Option<f64>, alpha: f64) -> Self {
        Self {
            bounds: [phi_u, phi_c, phi_p],
            alpha: [alpha; 3],
            penalize_utility: false,
        }
    }

    fn active(&self, i: usize) -> bool {
        i != U || self.penalize_utility
    }

    /// True when a raw triple satisfies every bound that is in force.
    pub fn is_feasible(&self, t: &ObjectiveTriple) -> bool {
        (0..3).all(|i| !self.active(i) || self.bounds[i].map_or(true, |phi| t.raw[i] <= phi))
    }
}

impl Default for Constraints {
    fn default() -> Self {
        Self::unbounded()
    }
}

/// `ε_i + α_i · max(0, ε_i − φ_i)` on each constrained objective.
pub fn penalize(t: &ObjectiveTriple, c: &Constraints) -> ObjectiveTriple {
    let mut out = ObjectiveTriple::new(t.raw[U], t.raw[C], t.raw[P]);
    for i in 0..3 {
        if let (true, Some(phi)) = (c.active(i), c.bounds[i]) {
            out.penalized[i] = t.raw[i] + c.alpha[i] * (t.raw[i] - phi).max(0.0);
        }
    }
    out
}
