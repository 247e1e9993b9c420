use serde::{Deserialize, Serialize};

/// Seconds per homomorphic operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCosts {
    pub t_enc: f64,
    pub t_dec: f64,
    pub t_add: f64,
}

impl Default for UnitCosts {
    fn default() -> Self {
        Self {
            t_enc: 3e-3,
            t_dec: 1.5e-3,
            t_add: 1e-5,
        }
    }
}

/// Simulated HE operation counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub c_enc: u64,
    pub c_dec: u64,
    pub c_add: u64,
    pub unit: UnitCosts,
}

impl CostLedger {
    pub fn new(unit: UnitCosts) -> Self {
        Self {
            unit,
            ..Self::default()
        }
    }

    pub fn record_encryptions(&mut self, n: u64) {
        self.c_enc += n;
    }

    pub fn record_decryptions(&mut self, n: u64) {
        self.c_dec += n;
    }

    pub fn record_additions(&mut self, n: u64) {
        self.c_add += n;
    }

    /// Counts accrued since `earlier`, priced at this ledger's unit costs.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            c_enc: self.c_enc - earlier.c_enc,
            c_dec: self.c_dec - earlier.c_dec,
            c_add: self.c_add - earlier.c_add,
            unit: self.unit,
        }
    }

    pub fn cost(&self) -> f64 {
        ledger_cost(self)
    }
}

/// Estimated training time in seconds: Σ count × unit time.
pub fn ledger_cost(ledger: &CostLedger) -> f64 {
    ledger.c_enc as f64 * ledger.unit.t_enc
        + ledger.c_dec as f64 * ledger.unit.t_dec
        + ledger.c_add as f64 * ledger.unit.t_add
}
