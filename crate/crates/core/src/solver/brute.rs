//! Exhaustive search over all 2^n assignments, used as a reference oracle.

use std::time::Instant;

use super::{SolverError, SolverOutcome, SolverStats, Verdict};
use crate::formula::{Assignment, Formula};

pub const BRUTE_FORCE_MAX_VARS: u32 = 25;

/// Tries assignments in lexicographic order with x1 as the most significant
/// bit (all false first) and returns the first model found.
pub fn brute_force_solve(formula: &Formula) -> Result<SolverOutcome, SolverError> {
    let start = Instant::now();
    let n = formula.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(SolverError::TooManyVariables { n, max: BRUTE_FORCE_MAX_VARS });
    }
    let bit = |offset: usize| 1u32 << (n as usize - 1 - offset);
    // a clause is satisfied when some variable differs from its falsifying value
    let masks: Vec<(u32, u32)> = formula
        .clauses()
        .iter()
        .map(|c| {
            c.lits().iter().fold((0, 0), |(vars, falsifying), l| {
                let b = bit(l.var().offset());
                (vars | b, if l.is_negated() { falsifying | b } else { falsifying })
            })
        })
        .collect();
    let verdict = (0..1u64 << n)
        .map(|a| a as u32)
        .find(|&a| masks.iter().all(|&(vars, falsifying)| (a ^ falsifying) & vars != 0))
        .map_or(Verdict::Unsatisfiable(None), |a| {
            Verdict::Satisfiable(Assignment::from_values((0..n as usize).map(|i| a & bit(i) != 0).collect()))
        });
    Ok(SolverOutcome { verdict, wall_time: start.elapsed(), stats: SolverStats::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Clause;

    #[test]
    fn first_model_in_lexicographic_order() {
        let f = Formula::new(3, 2, vec![Clause::from_dimacs(&[2, 3]), Clause::from_dimacs(&[-3, 1])]).unwrap();
        let Verdict::Satisfiable(a) = brute_force_solve(&f).unwrap().verdict else { panic!() };
        assert_eq!(a.values(), &[false, true, false]);
    }

    #[test]
    fn unsat_and_limits() {
        let f = Formula::new(1, 1, vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])]).unwrap();
        assert!(brute_force_solve(&f).unwrap().verdict.is_unsat());
        let f = Formula::new(0, 0, vec![Clause::from_dimacs(&[])]).unwrap();
        assert!(brute_force_solve(&f).unwrap().verdict.is_unsat());
        let f = Formula::new(26, 3, vec![]).unwrap();
        assert_eq!(brute_force_solve(&f).unwrap_err(), SolverError::TooManyVariables { n: 26, max: 25 });
    }
}
