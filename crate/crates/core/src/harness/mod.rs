//! Parameter-grid experiments: generate, solve, verify and record one
//! [`RunRecord`] per instance.

mod external;
mod records;

use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Formula, Model};
use crate::generate::{clauses_for_density, derive_instance_seed, generate, GenParams};
use crate::io::drat::DratProof;
use crate::proof::{check_rup_proof, check_rup_proof_with, compute_proof_metrics, ProofMetrics};
use crate::solver::{solve_2sat, solve_cdcl, SolverConfig, Verdict};

pub use external::{run_external_solver, ExternalRun, ExternalSolver};
pub use records::{load_records, persist_records, RecordError, CSV_COLUMNS};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverKind {
    InternalCdcl,
    Internal2Sat,
    External(ExternalSolver),
}

impl SolverKind {
    pub fn id(&self) -> String {
        match self {
            SolverKind::InternalCdcl => "cdcl".to_string(),
            SolverKind::Internal2Sat => "twosat".to_string(),
            SolverKind::External(e) => e.id(),
        }
    }
}

/// Clause counts per cell, either given directly or as densities m/n.
#[derive(Debug, Clone, PartialEq)]
pub enum ClauseCounts {
    Absolute(Vec<usize>),
    Densities(Vec<f64>),
}

impl ClauseCounts {
    fn resolve(&self, n: u32) -> Vec<usize> {
        match self {
            ClauseCounts::Absolute(ms) => ms.clone(),
            ClauseCounts::Densities(ds) => ds.iter().map(|&d| clauses_for_density(d, n)).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            ClauseCounts::Absolute(v) => v.is_empty(),
            ClauseCounts::Densities(v) => v.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub ks: Vec<usize>,
    pub ns: Vec<u32>,
    pub clause_counts: ClauseCounts,
    /// `None` stands for the uniform model.
    pub dimensions: Vec<Option<u32>>,
    pub instances_per_cell: u64,
    pub master_seed: u64,
    pub solver: SolverKind,
    pub timeout: Duration,
    pub emit_proof: bool,
    /// Run the RUP checker on every proof that is produced.
    pub check_proofs: bool,
}

impl ExperimentGrid {
    /// A grid with a single k and n over the given densities, solved by the
    /// internal CDCL without proofs.
    pub fn densities(k: usize, n: u32, densities: Vec<f64>, dimensions: Vec<Option<u32>>, instances: u64) -> Self {
        ExperimentGrid {
            ks: vec![k],
            ns: vec![n],
            clause_counts: ClauseCounts::Densities(densities),
            dimensions,
            instances_per_cell: instances,
            master_seed: 0,
            solver: SolverKind::InternalCdcl,
            timeout: DEFAULT_TIMEOUT,
            emit_proof: false,
            check_proofs: true,
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.instances_per_cell == 0 {
            return Err(GridError::NoInstances);
        }
        if self.ks.is_empty() {
            return Err(GridError::EmptyAxis("k"));
        }
        if self.ns.is_empty() {
            return Err(GridError::EmptyAxis("n"));
        }
        if self.clause_counts.is_empty() {
            return Err(GridError::EmptyAxis("m"));
        }
        if self.dimensions.is_empty() {
            return Err(GridError::EmptyAxis("dimension"));
        }
        if let ClauseCounts::Densities(ds) = &self.clause_counts {
            if let Some(&d) = ds.iter().find(|d| !d.is_finite() || **d < 0.0) {
                return Err(GridError::BadDensity(d));
            }
        }
        Ok(())
    }

    /// Cells in run order: k, then n, then dimension, then m.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &k in &self.ks {
            for &n in &self.ns {
                let ms = self.clause_counts.resolve(n);
                for &dimension in &self.dimensions {
                    for &m in &ms {
                        cells.push(Cell { k, n, m, dimension });
                    }
                }
            }
        }
        cells
    }

    pub fn instance_seed(&self, cell_index: usize, instance: u64) -> u64 {
        derive_instance_seed(self.master_seed, cell_index as u64 * self.instances_per_cell + instance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub k: usize,
    pub n: u32,
    pub m: usize,
    pub dimension: Option<u32>,
}

impl Cell {
    pub fn model(&self) -> Model {
        if self.dimension.is_some() {
            Model::Geometric
        } else {
            Model::Uniform
        }
    }

    pub fn params(&self, seed: u64) -> GenParams {
        match self.dimension {
            Some(d) => GenParams::geometric(self.k, self.n, self.m, d, seed),
            None => GenParams::uniform(self.k, self.n, self.m, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("instances per cell must be at least 1")]
    NoInstances,
    #[error("the {0} axis of the grid is empty")]
    EmptyAxis(&'static str),
    #[error("density {0} is not a finite non-negative number")]
    BadDensity(f64),
    #[error("at least one worker is needed")]
    NoWorkers,
    #[error("could not start the worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecordVerdict {
    Sat,
    Unsat,
    Timeout,
    /// Generation failure, solver crash or unreadable solver output.
    Error,
}

impl RecordVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordVerdict::Sat => "SAT",
            RecordVerdict::Unsat => "UNSAT",
            RecordVerdict::Timeout => "TIMEOUT",
            RecordVerdict::Error => "ERROR",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "SAT" => RecordVerdict::Sat,
            "UNSAT" => RecordVerdict::Unsat,
            "TIMEOUT" => RecordVerdict::Timeout,
            "ERROR" => RecordVerdict::Error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub model: Model,
    pub k: usize,
    pub n: u32,
    pub m: usize,
    pub dimension: Option<u32>,
    pub instance_seed: u64,
    pub solver_id: String,
    pub verdict: RecordVerdict,
    pub wall_time: Duration,
    pub proof_metrics: Option<ProofMetrics>,
    pub proof_checked: Option<bool>,
    pub note: Option<String>,
}

impl RunRecord {
    fn blank(cell: &Cell, seed: u64, solver_id: String) -> Self {
        RunRecord {
            model: cell.model(),
            k: cell.k,
            n: cell.n,
            m: cell.m,
            dimension: cell.dimension,
            instance_seed: seed,
            solver_id,
            verdict: RecordVerdict::Error,
            wall_time: Duration::ZERO,
            proof_metrics: None,
            proof_checked: None,
            note: None,
        }
    }

    /// m/n, or 0 when n is 0.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m as f64 / self.n as f64
        }
    }
}

/// Runs every (cell, instance) task on a pool of `workers` threads. The
/// result is ordered by cell, then instance index, and apart from wall times
/// does not depend on `workers`.
pub fn run_experiment(grid: &ExperimentGrid, workers: usize) -> Result<Vec<RunRecord>, GridError> {
    grid.validate()?;
    if workers == 0 {
        return Err(GridError::NoWorkers);
    }
    let tasks: Vec<(usize, Cell, u64)> = grid
        .cells()
        .into_iter()
        .enumerate()
        .flat_map(|(ci, cell)| (0..grid.instances_per_cell).map(move |i| (ci, cell, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GridError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ci, cell, i)| run_instance(grid, &cell, grid.instance_seed(ci, i)))
            .collect()
    }))
}

/// Generates and solves a single instance of `cell`.
pub fn run_instance(grid: &ExperimentGrid, cell: &Cell, seed: u64) -> RunRecord {
    let mut record = RunRecord::blank(cell, seed, grid.solver.id());
    let formula = match generate(&cell.params(seed)) {
        Ok((f, _)) => f,
        Err(e) => {
            record.note = Some(format!("generation failed: {e}"));
            return record;
        }
    };
    match &grid.solver {
        SolverKind::InternalCdcl => {
            let config = SolverConfig { emit_proof: grid.emit_proof, ..SolverConfig::default() }.with_time_limit(grid.timeout);
            let outcome = solve_cdcl(&formula, &config);
            record.wall_time = outcome.wall_time;
            record.verdict = internal_verdict(&outcome.verdict);
            if let Verdict::Unsatisfiable(Some(proof)) = &outcome.verdict {
                attach_proof(&mut record, grid, &formula, proof, false);
            }
        }
        SolverKind::Internal2Sat => match solve_2sat(&formula) {
            Ok(outcome) => {
                record.wall_time = outcome.wall_time;
                record.verdict = internal_verdict(&outcome.verdict);
            }
            Err(e) => record.note = Some(e.to_string()),
        },
        SolverKind::External(solver) => {
            let run = external::solve_formula(solver, &formula, grid.emit_proof, grid.timeout);
            record.wall_time = run.wall_time;
            record.verdict = run.verdict;
            record.note = run.note;
            if let Some(proof) = &run.proof {
                attach_proof(&mut record, grid, &formula, proof, true);
            }
        }
    }
    record
}

fn internal_verdict(verdict: &Verdict) -> RecordVerdict {
    match verdict {
        Verdict::Satisfiable(_) => RecordVerdict::Sat,
        Verdict::Unsatisfiable(_) => RecordVerdict::Unsat,
        Verdict::Timeout => RecordVerdict::Timeout,
    }
}

fn attach_proof(record: &mut RunRecord, grid: &ExperimentGrid, formula: &Formula, proof: &DratProof, lenient: bool) {
    if record.verdict != RecordVerdict::Unsat {
        return;
    }
    record.proof_metrics = Some(compute_proof_metrics(proof));
    if grid.check_proofs {
        let report = if lenient {
            check_rup_proof_with(formula, proof, true)
        } else {
            check_rup_proof(formula, proof)
        };
        record.proof_checked = Some(report.valid);
        if !report.valid {
            let step = report.failing_step.map_or(String::new(), |s| format!(" at step {s}"));
            let reason = report.reason.map_or(String::new(), |r| r.to_string());
            record.note = Some(format!("proof rejected{step}: {reason}"));
        }
    }
}
