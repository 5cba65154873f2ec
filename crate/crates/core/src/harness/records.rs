//! CSV persistence of run records.

use std::io::{Read, Write};
use std::time::Duration;

use thiserror::Error;

use super::{RecordVerdict, RunRecord};
use crate::formula::Model;
use crate::proof::ProofMetrics;

pub const CSV_COLUMNS: [&str; 19] = [
    "model",
    "k",
    "n",
    "m",
    "density",
    "dimension",
    "instance_seed",
    "solver_id",
    "verdict",
    "wall_time_s",
    "proof_total_clauses",
    "proof_additions",
    "proof_deletions",
    "proof_total_literals",
    "proof_literals_additions",
    "proof_literals_deletions",
    "proof_max_clause_length",
    "proof_checked",
    "note",
];

#[derive(Debug, Error)]
pub enum RecordError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header does not match the record format")]
    BadHeader,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Writes a header row and one row per record. Wall times are seconds with
/// six decimals, absent values are empty fields.
pub fn persist_records<W: Write>(records: &[RunRecord], sink: W) -> Result<(), RecordError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    writer.write_record(CSV_COLUMNS)?;
    for r in records {
        let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
        let pm = r.proof_metrics.as_ref();
        writer.write_record([
            r.model.as_str().to_string(),
            r.k.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.density().to_string(),
            r.dimension.map_or(String::new(), |d| d.to_string()),
            r.instance_seed.to_string(),
            r.solver_id.clone(),
            r.verdict.as_str().to_string(),
            format!("{:.6}", r.wall_time.as_secs_f64()),
            opt(pm.map(|p| p.total_clauses)),
            opt(pm.map(|p| p.additions)),
            opt(pm.map(|p| p.deletions)),
            opt(pm.map(|p| p.total_literals)),
            opt(pm.map(|p| p.literals_in_additions)),
            opt(pm.map(|p| p.literals_in_deletions)),
            opt(pm.map(|p| p.max_clause_length)),
            r.proof_checked.map_or(String::new(), |b| b.to_string()),
            r.note.clone().unwrap_or_default(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads records written by [`persist_records`]. Row numbers in errors count
/// the header as row 1.
pub fn load_records<R: Read>(source: R) -> Result<Vec<RunRecord>, RecordError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers()?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(RecordError::BadHeader);
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2;
        let row = row?;
        let fail = |message: String| RecordError::Row { row: row_no, message };
        if row.len() != CSV_COLUMNS.len() {
            return Err(fail(format!("expected {} fields, found {}", CSV_COLUMNS.len(), row.len())));
        }
        let field = |i: usize| &row[i];
        fn num<T: std::str::FromStr>(text: &str, column: &str) -> Result<T, String> {
            text.parse().map_err(|_| format!("bad {column} value {text:?}"))
        }
        fn opt_num<T: std::str::FromStr>(text: &str, column: &str) -> Result<Option<T>, String> {
            if text.is_empty() {
                Ok(None)
            } else {
                num(text, column).map(Some)
            }
        }
        let parsed = (|| -> Result<RunRecord, String> {
            let model: Model = field(0).parse().map_err(|_| format!("bad model {:?}", field(0)))?;
            let dimension: Option<u32> = opt_num(field(5), "dimension")?;
            if dimension.is_some() != (model == Model::Geometric) {
                return Err("dimension must be present exactly for geometric records".into());
            }
            let verdict = RecordVerdict::parse(field(8)).ok_or_else(|| format!("bad verdict {:?}", field(8)))?;
            let secs: f64 = num(field(9), "wall_time_s")?;
            if !secs.is_finite() || secs < 0.0 {
                return Err(format!("bad wall_time_s value {secs}"));
            }
            let metrics: Vec<Option<u64>> =
                (10..17).map(|c| opt_num(field(c), CSV_COLUMNS[c])).collect::<Result<_, _>>()?;
            let proof_metrics = if metrics.iter().all(Option::is_none) {
                None
            } else if metrics.iter().all(Option::is_some) {
                let v: Vec<u64> = metrics.into_iter().flatten().collect();
                Some(ProofMetrics {
                    total_clauses: v[0],
                    additions: v[1],
                    deletions: v[2],
                    total_literals: v[3],
                    literals_in_additions: v[4],
                    literals_in_deletions: v[5],
                    max_clause_length: v[6],
                })
            } else {
                return Err("proof metric columns are partially filled".into());
            };
            Ok(RunRecord {
                model,
                k: num(field(1), "k")?,
                n: num(field(2), "n")?,
                m: num(field(3), "m")?,
                dimension,
                instance_seed: num(field(6), "instance_seed")?,
                solver_id: field(7).to_string(),
                verdict,
                wall_time: Duration::from_micros((secs * 1e6).round() as u64),
                proof_metrics,
                proof_checked: opt_num(field(17), "proof_checked")?,
                note: Some(field(18).to_string()).filter(|s| !s.is_empty()),
            })
        })();
        records.push(parsed.map_err(fail)?);
    }
    Ok(records)
}
