//! Text formats: DIMACS CNF for instances and DRAT for proofs.

pub mod dimacs;
pub mod drat;

use thiserror::Error;

/// A malformed DIMACS or DRAT input.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: missing `p cnf <n> <m>` header before clauses")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds the declared variable count {n}")]
    LiteralOutOfRange { line: usize, lit: i64, n: u32 },
    #[error("header declares {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error("line {line}: clause is not terminated by 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: unexpected tokens after the terminating 0")]
    StrayTokens { line: usize },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: crate::formula::DomainError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
