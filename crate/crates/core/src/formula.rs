//! CNF data model: variables, literals, clauses, formulas and assignments.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// Violations of the CNF data-model invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("variable {var} exceeds the variable count {n}")]
    VariableOutOfRange { var: u32, n: u32 },
    #[error("clause {clause} has {len} literals, expected {k}")]
    ClauseLength { clause: usize, len: usize, k: usize },
    #[error("clause {clause} repeats variable {var}")]
    RepeatedVariable { clause: usize, var: u32 },
    #[error("assignment covers {got} variables, formula has {n}")]
    PartialAssignment { got: usize, n: u32 },
    #[error("density is undefined for a formula without variables")]
    NoVariables,
    #[error("generation metadata: dimension must be present exactly for the geometric model")]
    DimensionMismatch,
}

/// A Boolean variable, 1-indexed as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Result<Self, DomainError> {
        if index == 0 {
            return Err(DomainError::ZeroVariable);
        }
        Ok(Var(index))
    }

    /// The 1-based index.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    /// The 0-based index, for indexing dense per-variable arrays.
    #[inline]
    pub fn offset(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub(crate) fn from_offset(offset: usize) -> Self {
        Var(offset as u32 + 1)
    }

    #[inline]
    pub fn positive(self) -> Lit {
        Lit::new(self, false)
    }

    #[inline]
    pub fn negative(self) -> Lit {
        Lit::new(self, true)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A possibly negated variable.
///
/// Packed as `2 * (var - 1) + negated`, so a literal doubles as an index into
/// per-literal tables and `!lit` is a single xor.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, negated: bool) -> Self {
        Lit(((var.0 - 1) << 1) | negated as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub(crate) fn from_code(code: usize) -> Self {
        Lit(code as u32)
    }

    /// Signed DIMACS form: negative when negated.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().index() as i64;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Parses a nonzero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Self, DomainError> {
        if value == 0 {
            return Err(DomainError::ZeroVariable);
        }
        let index = u32::try_from(value.unsigned_abs()).map_err(|_| DomainError::VariableOutOfRange {
            var: u32::MAX,
            n: u32::MAX,
        })?;
        Ok(Lit::new(Var::new(index)?, value < 0))
    }

    /// Whether this literal is true under `value` for its variable.
    #[inline]
    pub fn satisfied_by(self, value: bool) -> bool {
        value != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept in generation order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Self {
        Clause { lits }
    }

    /// Builds a clause from signed DIMACS integers. Panics on zero.
    pub fn from_dimacs(values: &[i64]) -> Self {
        Clause::new(
            values
                .iter()
                .map(|&v| Lit::from_dimacs(v).expect("nonzero DIMACS literal"))
                .collect(),
        )
    }

    #[inline]
    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.lits.iter().any(|&l| l.satisfied_by(assignment.value(l.var())))
    }

    /// Literals sorted by code; two clauses are the same multiset iff their
    /// keys are equal.
    pub fn multiset_key(&self) -> Vec<Lit> {
        let mut key = self.lits.clone();
        key.sort_unstable();
        key
    }

    pub fn into_lits(self) -> Vec<Lit> {
        self.lits
    }
}

impl From<Vec<Lit>> for Clause {
    fn from(lits: Vec<Lit>) -> Self {
        Clause::new(lits)
    }
}

/// Which random model produced a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    Uniform,
    Geometric,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Uniform => "uniform",
            Model::Geometric => "geometric",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Model::Uniform),
            "geometric" => Ok(Model::Geometric),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

/// Parameters a generated formula was drawn with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenerationMeta {
    model: Model,
    dimension: Option<u32>,
    seed: u64,
}

impl GenerationMeta {
    pub fn new(model: Model, dimension: Option<u32>, seed: u64) -> Result<Self, DomainError> {
        match (model, dimension) {
            (Model::Uniform, None) | (Model::Geometric, Some(1..)) => Ok(GenerationMeta { model, dimension, seed }),
            _ => Err(DomainError::DimensionMismatch),
        }
    }

    pub fn uniform(seed: u64) -> Self {
        GenerationMeta { model: Model::Uniform, dimension: None, seed }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dimension(&self) -> Option<u32> {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// A k-CNF formula over variables `1..=n`.
///
/// Every clause has exactly `k` literals over pairwise distinct variables.
/// Duplicate clauses are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    n: u32,
    k: usize,
    clauses: Vec<Clause>,
    meta: Option<GenerationMeta>,
}

impl Formula {
    pub fn new(n: u32, k: usize, clauses: Vec<Clause>) -> Result<Self, DomainError> {
        let mut seen = vec![u32::MAX; n as usize];
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.len() != k {
                return Err(DomainError::ClauseLength { clause: ci, len: clause.len(), k });
            }
            for lit in clause.lits() {
                let v = lit.var().index();
                if v > n {
                    return Err(DomainError::VariableOutOfRange { var: v, n });
                }
                let slot = &mut seen[lit.var().offset()];
                if *slot == ci as u32 {
                    return Err(DomainError::RepeatedVariable { clause: ci, var: v });
                }
                *slot = ci as u32;
            }
        }
        Ok(Formula { n, k, clauses, meta: None })
    }

    pub(crate) fn new_unchecked(n: u32, k: usize, clauses: Vec<Clause>, meta: Option<GenerationMeta>) -> Self {
        Formula { n, k, clauses, meta }
    }

    pub fn with_meta(mut self, meta: GenerationMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn set_meta(&mut self, meta: Option<GenerationMeta>) {
        self.meta = meta;
    }

    #[inline]
    pub fn num_vars(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    #[inline]
    pub fn clause_len(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn meta(&self) -> Option<&GenerationMeta> {
        self.meta.as_ref()
    }

    /// Clauses-per-variable ratio m/n.
    pub fn density(&self) -> Result<f64, DomainError> {
        density(self.n, self.clauses.len())
    }

    /// Whether every clause has a literal made true by `assignment`.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, DomainError> {
        if assignment.len() != self.n as usize {
            return Err(DomainError::PartialAssignment { got: assignment.len(), n: self.n });
        }
        Ok(self.clauses.iter().all(|c| c.is_satisfied_by(assignment)))
    }
}

/// m/n as a real number.
pub fn density(n: u32, m: usize) -> Result<f64, DomainError> {
    if n == 0 {
        return Err(DomainError::NoVariables);
    }
    Ok(m as f64 / n as f64)
}

/// A total truth assignment over `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// All variables false.
    pub fn all_false(n: u32) -> Self {
        Assignment { values: vec![false; n as usize] }
    }

    /// `values[i]` is the value of variable `i + 1`.
    pub fn from_values(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    #[inline]
    pub fn value(&self, var: Var) -> bool {
        self.values[var.offset()]
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.offset()] = value;
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// The assignment as one true literal per variable, in variable order.
    pub fn literals(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| Lit::new(Var::from_offset(i), !v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u32, k: usize, clauses: &[&[i64]]) -> Formula {
        Formula::new(n, k, clauses.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
    }

    #[test]
    fn literal_double_negation() {
        let l = Lit::from_dimacs(-7).unwrap();
        assert_eq!(!!l, l);
        assert_eq!((!l).to_dimacs(), 7);
        assert_eq!(l.var().index(), 7);
    }

    #[test]
    fn zero_variable_rejected() {
        assert_eq!(Var::new(0), Err(DomainError::ZeroVariable));
        assert!(Lit::from_dimacs(0).is_err());
    }

    #[test]
    fn density_examples() {
        assert!((density(300, 1702).unwrap() - 5.673_333_333_333_333).abs() < 1e-12);
        assert_eq!(density(300, 300).unwrap(), 1.0);
        assert!((density(100, 427).unwrap() - 4.27).abs() < 1e-12);
        assert_eq!(density(0, 5), Err(DomainError::NoVariables));
    }

    #[test]
    fn intro_example_is_satisfied() {
        // (x3 ∨ x1 ∨ ¬x4) ∧ (x2 ∨ x3) ∧ (¬x2 ∨ x3 ∨ ¬x1 ∨ x4) ∧ (¬x2 ∨ ¬x4 ∨ ¬x5)
        // has mixed clause lengths, so it is built without the k check.
        let clauses = vec![
            Clause::from_dimacs(&[3, 1, -4]),
            Clause::from_dimacs(&[2, 3]),
            Clause::from_dimacs(&[-2, 3, -1, 4]),
            Clause::from_dimacs(&[-2, -4, -5]),
        ];
        let formula = Formula::new_unchecked(5, 3, clauses, None);
        for x5 in [false, true] {
            let a = Assignment::from_values(vec![false, false, true, false, x5]);
            assert!(formula.evaluate(&a).unwrap());
        }
    }

    #[test]
    fn empty_formula_is_true() {
        let formula = f(3, 3, &[]);
        assert!(formula.evaluate(&Assignment::all_false(3)).unwrap());
    }

    #[test]
    fn complementary_units_are_false() {
        let formula = f(1, 1, &[&[1], &[-1]]);
        for v in [false, true] {
            assert!(!formula.evaluate(&Assignment::from_values(vec![v])).unwrap());
        }
    }

    #[test]
    fn partial_assignment_rejected() {
        let formula = f(2, 1, &[&[1]]);
        assert_eq!(
            formula.evaluate(&Assignment::all_false(1)),
            Err(DomainError::PartialAssignment { got: 1, n: 2 })
        );
    }

    #[test]
    fn invariants_enforced() {
        assert!(matches!(
            Formula::new(2, 2, vec![Clause::from_dimacs(&[1, 3])]),
            Err(DomainError::VariableOutOfRange { var: 3, n: 2 })
        ));
        assert!(matches!(
            Formula::new(2, 2, vec![Clause::from_dimacs(&[1, -1])]),
            Err(DomainError::RepeatedVariable { clause: 0, var: 1 })
        ));
        assert!(matches!(
            Formula::new(2, 2, vec![Clause::from_dimacs(&[1])]),
            Err(DomainError::ClauseLength { .. })
        ));
        // duplicates are fine
        f(2, 2, &[&[1, 2], &[1, 2]]);
    }

    #[test]
    fn meta_dimension_iff_geometric() {
        assert!(GenerationMeta::new(Model::Uniform, None, 1).is_ok());
        assert!(GenerationMeta::new(Model::Geometric, Some(2), 1).is_ok());
        assert!(GenerationMeta::new(Model::Geometric, None, 1).is_err());
        assert!(GenerationMeta::new(Model::Geometric, Some(0), 1).is_err());
        assert!(GenerationMeta::new(Model::Uniform, Some(3), 1).is_err());
    }

    #[test]
    fn multiset_key_ignores_order() {
        let a = Clause::from_dimacs(&[3, -1, 2]);
        let b = Clause::from_dimacs(&[2, 3, -1]);
        assert_eq!(a.multiset_key(), b.multiset_key());
        assert_ne!(a, b);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // Adding clauses the assignment already satisfies keeps the formula true.
        #[test]
        fn evaluate_monotone_under_satisfied_clauses(
            values in prop::collection::vec(any::<bool>(), 6),
            extra in prop::collection::vec((1u32..=6, any::<bool>()), 1..10),
        ) {
            let a = Assignment::from_values(values);
            let base: Vec<Clause> = (1..=6u32)
                .map(|v| Clause::new(vec![Lit::new(Var::new(v).unwrap(), !a.value(Var::new(v).unwrap()))]))
                .collect();
            let formula = Formula::new(6, 1, base.clone()).unwrap();
            prop_assert!(formula.evaluate(&a).unwrap());
            let mut grown = base;
            for (v, neg) in extra {
                let var = Var::new(v).unwrap();
                let clause = Clause::new(vec![Lit::new(var, neg)]);
                if clause.is_satisfied_by(&a) {
                    grown.push(clause);
                }
            }
            let formula = Formula::new(6, 1, grown).unwrap();
            prop_assert!(formula.evaluate(&a).unwrap());
        }
    }
}
