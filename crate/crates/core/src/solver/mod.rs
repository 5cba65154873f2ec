//! Satisfiability procedures: CDCL with DRAT output, 2-SAT via strongly
//! connected components, exhaustive enumeration, and the shared unit
//! propagation engine.

mod brute;
mod cdcl;
pub mod config;
mod heap;
mod propagate;
mod twosat;

use std::time::Duration;

use thiserror::Error;

use crate::formula::Assignment;
use crate::io::drat::DratProof;

pub use brute::{brute_force_solve, BRUTE_FORCE_MAX_VARS};
pub use cdcl::solve_cdcl;
pub use config::SolverConfig;
pub use propagate::{unit_propagate, PartialAssignment, Propagation, Propagator};
pub use twosat::solve_2sat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("the 2-SAT procedure needs clauses of length 2, got {0}")]
    NotTwoSat(usize),
    #[error("brute force is limited to {max} variables, formula has {n}")]
    TooManyVariables { n: u32, max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Satisfiable(Assignment),
    Unsatisfiable(Option<DratProof>),
    Timeout,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Satisfiable(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsatisfiable(_))
    }

    pub fn proof(&self) -> Option<&DratProof> {
        match self {
            Verdict::Unsatisfiable(p) => p.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOutcome {
    pub verdict: Verdict,
    pub wall_time: Duration,
    pub stats: SolverStats,
}
