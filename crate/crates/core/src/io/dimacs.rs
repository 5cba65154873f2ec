//! DIMACS CNF reading and writing.
//!
//! Generated formulas carry a `c geosat ...` comment recording model, clause
//! length, dimension and seed; [`read_dimacs`] restores that metadata when the
//! line is present.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::ParseError;
use crate::formula::{Clause, DomainError, Formula, GenerationMeta, Lit, Model};

const META_PREFIX: &str = "c geosat ";

pub fn write_dimacs<W: Write>(formula: &Formula, mut sink: W) -> std::io::Result<()> {
    if let Some(meta) = formula.meta() {
        write!(sink, "{META_PREFIX}model={} k={}", meta.model(), formula.clause_len())?;
        if let Some(d) = meta.dimension() {
            write!(sink, " dim={d}")?;
        }
        writeln!(sink, " seed={}", meta.seed())?;
    }
    writeln!(sink, "p cnf {} {}", formula.num_vars(), formula.num_clauses())?;
    let mut line = String::new();
    for clause in formula.clauses() {
        line.clear();
        for lit in clause.lits() {
            let _ = write!(line, "{} ", lit.to_dimacs());
        }
        line.push_str("0\n");
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()
}

pub fn to_dimacs_string(formula: &Formula) -> String {
    let mut buf = Vec::new();
    write_dimacs(formula, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("DIMACS is ASCII")
}

struct Meta {
    model: Model,
    k: usize,
    dimension: Option<u32>,
    seed: u64,
}

fn parse_meta(rest: &str) -> Option<Meta> {
    let (mut model, mut k, mut dimension, mut seed) = (None, None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "model" => model = value.parse::<Model>().ok(),
            "k" => k = value.parse().ok(),
            "dim" => dimension = value.parse().ok(),
            "seed" => seed = value.parse().ok(),
            _ => {}
        }
    }
    Some(Meta { model: model?, k: k?, dimension, seed: seed? })
}

/// Parses a DIMACS CNF. Clauses may span lines; the terminating `0` ends a
/// clause. Anything from a line starting with `%` onward is ignored.
pub fn read_dimacs<R: BufRead>(source: R) -> Result<Formula, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut meta: Option<Meta> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut clause_lines: Vec<usize> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut current_start = 0;
    let mut last_line = 0;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('c') {
            if let Some(rest) = line.strip_prefix(META_PREFIX) {
                meta = parse_meta(rest);
            }
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line: line_no });
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", n, m] => n.parse::<u32>().ok().zip(m.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some(h) => header = Some(h),
                None => return Err(ParseError::BadHeader { line: line_no, text: trimmed.to_string() }),
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(ParseError::MissingHeader { line: line_no });
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| ParseError::BadToken { line: line_no, token: token.to_string() })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                clause_lines.push(current_start);
                continue;
            }
            if current.is_empty() {
                current_start = line_no;
            }
            if value.unsigned_abs() > n as u64 {
                return Err(ParseError::LiteralOutOfRange { line: line_no, lit: value, n });
            }
            current.push(Lit::from_dimacs(value).expect("nonzero, in range"));
        }
    }

    let Some((n, m)) = header else {
        return Err(ParseError::MissingHeader { line: last_line + 1 });
    };
    if !current.is_empty() {
        return Err(ParseError::MissingTerminator { line: last_line });
    }
    if clauses.len() != m {
        return Err(ParseError::ClauseCount { expected: m, found: clauses.len() });
    }
    let k = match (&meta, clauses.first()) {
        (Some(meta), _) => meta.k,
        (None, Some(first)) => first.len(),
        (None, None) => 0,
    };
    let formula = Formula::new(n, k, clauses).map_err(|e| {
        let clause = match e {
            DomainError::ClauseLength { clause, .. } | DomainError::RepeatedVariable { clause, .. } => clause,
            _ => 0,
        };
        ParseError::Invalid { line: clause_lines.get(clause).copied().unwrap_or(0), source: e }
    })?;
    let meta = meta.and_then(|m| GenerationMeta::new(m.model, m.dimension, m.seed).ok());
    Ok(match meta {
        Some(meta) => formula.with_meta(meta),
        None => formula,
    })
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula, ParseError> {
    read_dimacs(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenParams};

    #[test]
    fn writes_body_line() {
        let f = Formula::new(2, 2, vec![Clause::from_dimacs(&[1, -2])]).unwrap();
        assert_eq!(to_dimacs_string(&f), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn empty_formula_header_only() {
        let f = Formula::new(7, 3, vec![]).unwrap();
        assert_eq!(to_dimacs_string(&f), "p cnf 7 0\n");
    }

    #[test]
    fn reads_simple_file() {
        let f = parse_dimacs_str("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.clauses(), &[Clause::from_dimacs(&[1, -2])]);
    }

    #[test]
    fn clause_may_span_lines() {
        let f = parse_dimacs_str("c split\np cnf 2 1\n1 -2\n0\n").unwrap();
        assert_eq!(f.clauses(), &[Clause::from_dimacs(&[1, -2])]);
    }

    #[test]
    fn trailing_percent_block_ignored() {
        let f = parse_dimacs_str("p cnf 3 1\n1 2 3 0\n%\n0\n\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
    }

    #[test]
    fn clause_count_mismatch() {
        assert!(matches!(
            parse_dimacs_str("p cnf 2 2\n1 -2 0\n"),
            Err(ParseError::ClauseCount { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn rejects_out_of_range_literal() {
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 3 0\n"),
            Err(ParseError::LiteralOutOfRange { line: 2, lit: 3, n: 2 })
        ));
    }

    #[test]
    fn rejects_missing_header_and_bad_tokens() {
        assert!(matches!(parse_dimacs_str("1 2 0\n"), Err(ParseError::MissingHeader { line: 1 })));
        assert!(matches!(parse_dimacs_str(""), Err(ParseError::MissingHeader { .. })));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 x 0\n"),
            Err(ParseError::BadToken { line: 2, .. })
        ));
        assert!(matches!(parse_dimacs_str("p cnf 2\n"), Err(ParseError::BadHeader { line: 1, .. })));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 2\n"),
            Err(ParseError::MissingTerminator { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 2\n1 2 0\n1 0\n"),
            Err(ParseError::Invalid { line: 3, .. })
        ));
    }

    #[test]
    fn duplicates_are_preserved() {
        let f = parse_dimacs_str("p cnf 2 2\n1 2 0\n1 2 0\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
    }

    #[test]
    fn generated_round_trip_keeps_meta() {
        for p in [GenParams::uniform(3, 20, 60, 9), GenParams::geometric(3, 20, 0, 2, 9)] {
            let (f, _) = generate(&p).unwrap();
            let back = parse_dimacs_str(&to_dimacs_string(&f)).unwrap();
            assert_eq!(back, f);
        }
    }
}
