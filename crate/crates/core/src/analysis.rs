//! Satisfiable ratios, critical-density estimates and density × dimension
//! matrices over run records.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::Model;
use crate::harness::{RecordVerdict, RunRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no records for the requested group")]
    EmptyGroup,
    #[error("no density has a decided instance")]
    NoRatios,
    #[error("unknown metric {0:?}; expected sat_ratio, mean_wall_time, mean_proof_clauses or mean_max_proof_len")]
    UnknownMetric(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Records sharing a group key form one ratio curve. Uniform groups have no
/// dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub model: Model,
    pub k: usize,
    pub n: u32,
    pub dimension: Option<u32>,
}

impl GroupKey {
    pub fn of(record: &RunRecord) -> Self {
        GroupKey { model: record.model, k: record.k, n: record.n, dimension: record.dimension }
    }

    pub fn dimension_label(&self) -> String {
        self.dimension.map_or_else(|| "uniform".to_string(), |d| d.to_string())
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} k={} n={} d={}", self.model, self.k, self.n, self.dimension_label())
    }
}

pub fn group_keys(records: &[RunRecord]) -> Vec<GroupKey> {
    let mut keys: Vec<GroupKey> = records.iter().map(GroupKey::of).collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Verdict counts at one clause count of a group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCounts {
    pub m: usize,
    pub density: f64,
    pub sat: usize,
    pub unsat: usize,
    pub timeout: usize,
    pub error: usize,
}

impl DensityCounts {
    pub fn decided(&self) -> usize {
        self.sat + self.unsat
    }

    /// #SAT / (#SAT + #UNSAT), or `None` when nothing was decided.
    pub fn ratio(&self) -> Option<f64> {
        (self.decided() > 0).then(|| self.sat as f64 / self.decided() as f64)
    }
}

/// Per-density verdict counts of `group`, in increasing density.
pub fn density_counts(records: &[RunRecord], group: &GroupKey) -> Result<Vec<DensityCounts>, AnalysisError> {
    let mut by_m: BTreeMap<usize, DensityCounts> = BTreeMap::new();
    for r in records.iter().filter(|r| GroupKey::of(r) == *group) {
        let entry = by_m.entry(r.m).or_insert(DensityCounts {
            m: r.m,
            density: r.density(),
            sat: 0,
            unsat: 0,
            timeout: 0,
            error: 0,
        });
        match r.verdict {
            RecordVerdict::Sat => entry.sat += 1,
            RecordVerdict::Unsat => entry.unsat += 1,
            RecordVerdict::Timeout => entry.timeout += 1,
            RecordVerdict::Error => entry.error += 1,
        }
    }
    if by_m.is_empty() {
        return Err(AnalysisError::EmptyGroup);
    }
    Ok(by_m.into_values().collect())
}

/// Density → satisfiable ratio for `group`. Timeouts and errors are left
/// out; densities without any decided instance are omitted.
pub fn satisfiable_ratio(records: &[RunRecord], group: &GroupKey) -> Result<Vec<(f64, f64)>, AnalysisError> {
    Ok(density_counts(records, group)?.iter().filter_map(|c| c.ratio().map(|r| (c.density, r))).collect())
}

const TIE_EPS: f64 = 1e-12;

/// The density whose ratio is closest to 1/2; ties go to the lowest density.
/// Returns `(density, ratio)`.
pub fn estimate_critical_density(ratios: &[(f64, f64)]) -> Result<(f64, f64), AnalysisError> {
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    for &(density, ratio) in &sorted {
        let better = best.is_none_or(|(_, r)| (ratio - 0.5).abs() < (r - 0.5).abs() - TIE_EPS);
        if better {
            best = Some((density, ratio));
        }
    }
    best.ok_or(AnalysisError::NoRatios)
}

/// Density span of the transition: from the last density with ratio ≥ 0.9
/// below the first density with ratio ≤ 0.1, to that density. `None` when
/// the curve never crosses both levels in that order.
pub fn transition_width(ratios: &[(f64, f64)]) -> Option<f64> {
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hi = sorted.iter().position(|&(_, r)| r <= 0.1)?;
    let lo = sorted[..hi].iter().rposition(|&(_, r)| r >= 0.9)?;
    Some(sorted[hi].0 - sorted[lo].0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub group: GroupKey,
    pub critical_density: f64,
    pub ratio_at_estimate: f64,
    /// Decided instances per density.
    pub sample_sizes: Vec<(f64, usize)>,
    pub timeouts: usize,
    pub errors: usize,
    pub transition_width: Option<f64>,
}

pub fn threshold_estimate(records: &[RunRecord], group: &GroupKey) -> Result<ThresholdEstimate, AnalysisError> {
    let counts = density_counts(records, group)?;
    let ratios: Vec<(f64, f64)> = counts.iter().filter_map(|c| c.ratio().map(|r| (c.density, r))).collect();
    let (critical_density, ratio_at_estimate) = estimate_critical_density(&ratios)?;
    Ok(ThresholdEstimate {
        group: *group,
        critical_density,
        ratio_at_estimate,
        sample_sizes: counts.iter().map(|c| (c.density, c.decided())).collect(),
        timeouts: counts.iter().map(|c| c.timeout).sum(),
        errors: counts.iter().map(|c| c.error).sum(),
        transition_width: transition_width(&ratios),
    })
}

/// One estimate per group, skipping groups without decided instances.
pub fn threshold_estimates(records: &[RunRecord]) -> Vec<ThresholdEstimate> {
    group_keys(records).iter().filter_map(|g| threshold_estimate(records, g).ok()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    SatRatio,
    MeanWallTime,
    MeanProofClauses,
    MeanMaxProofLen,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::SatRatio, Metric::MeanWallTime, Metric::MeanProofClauses, Metric::MeanMaxProofLen];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SatRatio => "sat_ratio",
            Metric::MeanWallTime => "mean_wall_time",
            Metric::MeanProofClauses => "mean_proof_clauses",
            Metric::MeanMaxProofLen => "mean_max_proof_len",
        }
    }

    /// Value of the metric over one cell's records.
    fn evaluate(self, cell: &[&RunRecord]) -> Option<f64> {
        let mean = |values: Vec<f64>| (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        match self {
            Metric::SatRatio => {
                let sat = cell.iter().filter(|r| r.verdict == RecordVerdict::Sat).count();
                let unsat = cell.iter().filter(|r| r.verdict == RecordVerdict::Unsat).count();
                (sat + unsat > 0).then(|| sat as f64 / (sat + unsat) as f64)
            }
            Metric::MeanWallTime => mean(
                cell.iter().filter(|r| r.verdict != RecordVerdict::Error).map(|r| r.wall_time.as_secs_f64()).collect(),
            ),
            Metric::MeanProofClauses => {
                mean(cell.iter().filter_map(|r| r.proof_metrics).map(|p| p.total_clauses as f64).collect())
            }
            Metric::MeanMaxProofLen => {
                mean(cell.iter().filter_map(|r| r.proof_metrics).map(|p| p.max_clause_length as f64).collect())
            }
        }
    }
}

impl FromStr for Metric {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| AnalysisError::UnknownMetric(s.to_string()))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rows are densities, columns dimensions with the uniform model last.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub metric: Metric,
    pub densities: Vec<f64>,
    pub dimensions: Vec<Option<u32>>,
    pub cells: Vec<Vec<Option<f64>>>,
}

// densities are matched after rounding to 1e-9
fn density_key(d: f64) -> i64 {
    (d * 1e9).round() as i64
}

pub fn matrix_export(records: &[RunRecord], metric: Metric) -> Matrix {
    let mut rows: BTreeMap<i64, f64> = BTreeMap::new();
    let mut columns: Vec<Option<u32>> = Vec::new();
    let mut cells: BTreeMap<(i64, Option<u32>), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = density_key(r.density());
        rows.entry(key).or_insert(r.density());
        if !columns.contains(&r.dimension) {
            columns.push(r.dimension);
        }
        cells.entry((key, r.dimension)).or_default().push(r);
    }
    columns.sort_by_key(|d| (d.is_none(), *d));
    let matrix_cells = rows
        .keys()
        .map(|&row| {
            columns
                .iter()
                .map(|&col| cells.get(&(row, col)).and_then(|c| metric.evaluate(c)))
                .collect()
        })
        .collect();
    Matrix { metric, densities: rows.into_values().collect(), dimensions: columns, cells: matrix_cells }
}

impl Matrix {
    /// Header `density,<dims…>,uniform`; empty fields for cells without data.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), AnalysisError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        let mut header = vec!["density".to_string()];
        header.extend(self.dimensions.iter().map(|d| d.map_or_else(|| "uniform".to_string(), |d| d.to_string())));
        w.write_record(&header)?;
        for (density, row) in self.densities.iter().zip(&self.cells) {
            let mut fields = vec![density.to_string()];
            fields.extend(row.iter().map(|c| c.map_or(String::new(), |v| v.to_string())));
            w.write_record(&fields)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// One row per group and density with verdict counts and the ratio.
pub fn write_ratio_table<W: Write>(records: &[RunRecord], sink: W) -> Result<(), AnalysisError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["model", "k", "n", "dimension", "m", "density", "sat", "unsat", "timeout", "error", "ratio"])?;
    for group in group_keys(records) {
        for c in density_counts(records, &group)? {
            w.write_record([
                group.model.as_str().to_string(),
                group.k.to_string(),
                group.n.to_string(),
                group.dimension.map_or(String::new(), |d| d.to_string()),
                c.m.to_string(),
                c.density.to_string(),
                c.sat.to_string(),
                c.unsat.to_string(),
                c.timeout.to_string(),
                c.error.to_string(),
                c.ratio().map_or(String::new(), |r| r.to_string()),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per group with its critical-density estimate.
pub fn write_threshold_table<W: Write>(estimates: &[ThresholdEstimate], sink: W) -> Result<(), AnalysisError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record([
        "model",
        "k",
        "n",
        "dimension",
        "critical_density",
        "ratio_at_estimate",
        "decided",
        "timeouts",
        "errors",
        "transition_width",
    ])?;
    for e in estimates {
        w.write_record([
            e.group.model.as_str().to_string(),
            e.group.k.to_string(),
            e.group.n.to_string(),
            e.group.dimension.map_or(String::new(), |d| d.to_string()),
            e.critical_density.to_string(),
            e.ratio_at_estimate.to_string(),
            e.sample_sizes.iter().map(|s| s.1).sum::<usize>().to_string(),
            e.timeouts.to_string(),
            e.errors.to_string(),
            e.transition_width.map_or(String::new(), |w| w.to_string()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
