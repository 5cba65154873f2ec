//! Tuning constants for the CDCL solver, all in one place.

use std::time::Duration;

/// Initial conflict budget between restarts.
pub const RESTART_FIRST: u64 = 100;
/// Each restart interval is this factor times the previous one.
pub const RESTART_FACTOR: f64 = 1.5;
/// Variable activity decay (VSIDS); activities are divided by this each conflict.
pub const VAR_DECAY: f64 = 0.95;
/// Learned-clause activity decay.
pub const CLAUSE_DECAY: f64 = 0.999;
/// Initial learned-clause budget as a fraction of the original clause count.
pub const LEARNT_SIZE_FACTOR: f64 = 1.0 / 3.0;
/// Lower bound on the initial learned-clause budget.
pub const LEARNT_SIZE_MIN: f64 = 1000.0;
/// Growth of the learned-clause budget at every restart.
pub const LEARNT_SIZE_INC: f64 = 1.1;
/// Probability of a random (seeded) branching variable instead of the most active.
pub const RANDOM_DECISION_FREQ: f64 = 0.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Seeds the random branching stream; only used when `random_decision_freq > 0`.
    pub seed: u64,
    pub restart_first: u64,
    pub restart_factor: f64,
    pub var_decay: f64,
    pub clause_decay: f64,
    pub learnt_size_factor: f64,
    pub learnt_size_min: f64,
    pub learnt_size_inc: f64,
    pub random_decision_freq: f64,
    /// Reuse a variable's last value when branching on it again. Fresh
    /// variables are always tried false first.
    pub phase_saving: bool,
    pub conflict_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub emit_proof: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            restart_first: RESTART_FIRST,
            restart_factor: RESTART_FACTOR,
            var_decay: VAR_DECAY,
            clause_decay: CLAUSE_DECAY,
            learnt_size_factor: LEARNT_SIZE_FACTOR,
            learnt_size_min: LEARNT_SIZE_MIN,
            learnt_size_inc: LEARNT_SIZE_INC,
            random_decision_freq: RANDOM_DECISION_FREQ,
            phase_saving: true,
            conflict_limit: None,
            time_limit: None,
            emit_proof: false,
        }
    }
}

impl SolverConfig {
    pub fn with_proof(mut self) -> Self {
        self.emit_proof = true;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_conflict_limit(mut self, limit: u64) -> Self {
        self.conflict_limit = Some(limit);
        self
    }
}
