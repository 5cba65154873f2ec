//! Linear-time 2-SAT through the implication graph.
//!
//! Each clause (a ∨ b) contributes the edges ¬a → b and ¬b → a. The formula
//! is unsatisfiable iff some variable shares a strongly connected component
//! with its negation. Components come out of Tarjan's algorithm in reverse
//! topological order, so setting x true iff comp(x) precedes comp(¬x) in
//! that order yields a model.

use std::time::Instant;

use super::{SolverError, SolverOutcome, SolverStats, Verdict};
use crate::formula::{Assignment, Formula};

const UNVISITED: u32 = u32::MAX;

pub fn solve_2sat(formula: &Formula) -> Result<SolverOutcome, SolverError> {
    let start = Instant::now();
    if formula.clause_len() != 2 && formula.num_clauses() > 0 {
        return Err(SolverError::NotTwoSat(formula.clause_len()));
    }
    let n = formula.num_vars() as usize;
    let nodes = 2 * n;

    // compressed adjacency
    let mut offsets = vec![0u32; nodes + 1];
    for clause in formula.clauses() {
        let [a, b] = [clause.lits()[0], clause.lits()[1]];
        offsets[(!a).code() + 1] += 1;
        offsets[(!b).code() + 1] += 1;
    }
    for i in 0..nodes {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[nodes] as usize];
    for clause in formula.clauses() {
        let [a, b] = [clause.lits()[0], clause.lits()[1]];
        for (from, to) in [(!a, b), (!b, a)] {
            targets[fill[from.code()] as usize] = to.code() as u32;
            fill[from.code()] += 1;
        }
    }

    let comp = tarjan(nodes, &offsets, &targets);
    let mut values = Vec::with_capacity(n);
    for v in 0..n {
        let (pos, neg) = (comp[2 * v], comp[2 * v + 1]);
        if pos == neg {
            return Ok(SolverOutcome {
                verdict: Verdict::Unsatisfiable(None),
                wall_time: start.elapsed(),
                stats: SolverStats::default(),
            });
        }
        values.push(pos < neg);
    }
    Ok(SolverOutcome {
        verdict: Verdict::Satisfiable(Assignment::from_values(values)),
        wall_time: start.elapsed(),
        stats: SolverStats::default(),
    })
}

/// Iterative Tarjan; returns the component index of every node, numbered in
/// the order components are completed.
fn tarjan(nodes: usize, offsets: &[u32], targets: &[u32]) -> Vec<u32> {
    let mut index = vec![UNVISITED; nodes];
    let mut low = vec![0u32; nodes];
    let mut comp = vec![UNVISITED; nodes];
    let mut on_stack = vec![false; nodes];
    let mut stack: Vec<u32> = Vec::new();
    // (node, next edge position)
    let mut call: Vec<(u32, u32)> = Vec::new();
    let mut counter = 0u32;
    let mut components = 0u32;

    for root in 0..nodes as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, offsets[root as usize]));
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let vu = v as usize;
            if *edge < offsets[vu + 1] {
                let w = targets[*edge as usize];
                *edge += 1;
                let wu = w as usize;
                if index[wu] == UNVISITED {
                    index[wu] = counter;
                    low[wu] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[wu] = true;
                    call.push((w, offsets[wu]));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[vu]);
            }
            if low[vu] == index[vu] {
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = components;
                    if w == v {
                        break;
                    }
                }
                components += 1;
            }
        }
    }
    comp
}
