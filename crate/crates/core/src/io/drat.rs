//! Textual DRAT proofs: one step per line, `d ` marks deletions, `0` ends
//! every step, and the line `0` alone adds the empty clause.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::ParseError;
use crate::formula::Lit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Add,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DratStep {
    pub kind: StepKind,
    pub lits: Vec<Lit>,
}

impl DratStep {
    pub fn add(lits: Vec<Lit>) -> Self {
        DratStep { kind: StepKind::Add, lits }
    }

    pub fn delete(lits: Vec<Lit>) -> Self {
        DratStep { kind: StepKind::Delete, lits }
    }

    pub fn is_add(&self) -> bool {
        self.kind == StepKind::Add
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DratProof {
    pub steps: Vec<DratStep>,
}

impl DratProof {
    pub fn new(steps: Vec<DratStep>) -> Self {
        DratProof { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: DratStep) {
        self.steps.push(step);
    }
}

pub fn write_drat<W: Write>(proof: &DratProof, mut sink: W) -> std::io::Result<()> {
    let mut line = String::new();
    for step in &proof.steps {
        line.clear();
        if step.kind == StepKind::Delete {
            line.push_str("d ");
        }
        for lit in &step.lits {
            let _ = write!(line, "{} ", lit.to_dimacs());
        }
        line.push_str("0\n");
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()
}

pub fn to_drat_string(proof: &DratProof) -> String {
    let mut buf = Vec::new();
    write_drat(proof, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("DRAT is ASCII")
}

/// Parses a textual DRAT proof. Blank lines and `c` comments are skipped.
pub fn read_drat<R: BufRead>(source: R) -> Result<DratProof, ParseError> {
    let mut steps = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let mut tokens = line.split_whitespace().peekable();
        let kind = match tokens.peek() {
            None => continue,
            Some(t) if t.starts_with('c') => continue,
            Some(&"d") => {
                tokens.next();
                StepKind::Delete
            }
            Some(_) => StepKind::Add,
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for token in tokens {
            if terminated {
                return Err(ParseError::StrayTokens { line: line_no });
            }
            let value: i64 = token
                .parse()
                .map_err(|_| ParseError::BadToken { line: line_no, token: token.to_string() })?;
            if value == 0 {
                terminated = true;
            } else {
                let lit = Lit::from_dimacs(value).map_err(|e| ParseError::Invalid { line: line_no, source: e })?;
                lits.push(lit);
            }
        }
        if !terminated {
            return Err(ParseError::MissingTerminator { line: line_no });
        }
        steps.push(DratStep { kind, lits });
    }
    Ok(DratProof { steps })
}

pub fn parse_drat_str(text: &str) -> Result<DratProof, ParseError> {
    read_drat(text.as_bytes())
}
