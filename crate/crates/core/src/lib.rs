//! Random uniform and geometric k-SAT: instance generation on the unit torus,
//! DIMACS and DRAT I/O, a CDCL solver with proof output, a RUP proof checker,
//! a parallel experiment harness and threshold analysis.

pub mod analysis;
pub mod formula;
pub mod generate;
pub mod harness;
pub mod io;
pub mod proof;
pub mod solver;
pub mod spatial;
pub mod torus;

pub use formula::{Assignment, Clause, DomainError, Formula, GenerationMeta, Lit, Model, Var};
pub use generate::{generate, GenError, GenParams, Layout};
pub use io::drat::{DratProof, DratStep};
pub use proof::{check_rup_proof, compute_proof_metrics, CheckReport, ProofMetrics};
pub use solver::{SolverConfig, SolverOutcome, Verdict};
