//! Unit propagation over a mutable clause set.
//!
//! [`Propagator`] keeps a root-level assignment closed under unit propagation
//! while clauses are added and removed, and answers "does asserting these
//! literals lead to a conflict?" by propagating on top of the root and
//! backtracking afterwards. The proof checker runs on it, and
//! [`unit_propagate`] is the one-shot form.

use std::collections::HashMap;

use crate::formula::{Clause, Lit, Var};

const NO_REASON: u32 = u32::MAX;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

/// A partial truth assignment; `None` means unassigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    values: Vec<Option<bool>>,
}

impl PartialAssignment {
    pub fn empty(n: u32) -> Self {
        PartialAssignment { values: vec![None; n as usize] }
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.offset()).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.offset()] = Some(value);
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn assigned(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var::from_offset(i), b)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    NoConflict(PartialAssignment),
    Conflict,
}

pub type ClauseId = u32;

#[derive(Debug, Clone)]
struct Entry {
    lits: Vec<Lit>,
    alive: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Propagator {
    entries: Vec<Entry>,
    // clause ids watching each literal (positions 0 and 1 of clauses of length >= 2)
    watches: Vec<Vec<ClauseId>>,
    units: Vec<ClauseId>,
    empty_clauses: usize,
    // by multiset key, for deletion lookup
    index: HashMap<Vec<Lit>, Vec<ClauseId>>,
    values: Vec<i8>,
    reason: Vec<ClauseId>,
    trail: Vec<Lit>,
    qhead: usize,
    root_len: usize,
    inconsistent: bool,
}

impl Propagator {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        Propagator {
            watches: vec![Vec::new(); 2 * n],
            values: vec![0; 2 * n],
            reason: vec![NO_REASON; n],
            ..Default::default()
        }
    }

    fn ensure_var(&mut self, var: Var) {
        let needed = var.offset() + 1;
        if needed > self.reason.len() {
            self.reason.resize(needed, NO_REASON);
            self.values.resize(2 * needed, 0);
            self.watches.resize(2 * needed, Vec::new());
        }
    }

    #[inline]
    fn value(&self, lit: Lit) -> i8 {
        self.values[lit.code()]
    }

    #[inline]
    fn assign(&mut self, lit: Lit, reason: ClauseId) {
        self.values[lit.code()] = TRUE;
        self.values[(!lit).code()] = FALSE;
        self.reason[lit.var().offset()] = reason;
        self.trail.push(lit);
    }

    fn backtrack_to_root(&mut self) {
        while self.trail.len() > self.root_len {
            let lit = self.trail.pop().expect("non-empty above root");
            self.values[lit.code()] = 0;
            self.values[(!lit).code()] = 0;
            self.reason[lit.var().offset()] = NO_REASON;
        }
        self.qhead = self.root_len;
    }

    /// Whether unit propagation on the current clause set alone conflicts.
    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// Root-level value of a literal, if assigned.
    pub fn root_value(&self, lit: Lit) -> Option<bool> {
        match self.values.get(lit.code()).copied().unwrap_or(0) {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    pub fn num_live_clauses(&self) -> usize {
        self.entries.iter().filter(|e| e.alive).count()
    }

    /// Adds a clause and extends the root assignment by propagation.
    pub fn add_clause(&mut self, lits: &[Lit]) -> ClauseId {
        for l in lits {
            self.ensure_var(l.var());
        }
        let id = self.entries.len() as ClauseId;
        let mut lits = lits.to_vec();
        let mut key = lits.clone();
        key.sort_unstable();
        self.index.entry(key).or_default().push(id);

        match lits.len() {
            0 => {
                self.empty_clauses += 1;
                self.inconsistent = true;
            }
            1 => {
                self.units.push(id);
                if !self.inconsistent {
                    match self.value(lits[0]) {
                        TRUE => {}
                        FALSE => self.inconsistent = true,
                        _ => {
                            self.assign(lits[0], id);
                            self.close_root();
                        }
                    }
                }
            }
            _ => {
                // non-false literals first, true before unassigned
                let rank = |v: i8| match v {
                    TRUE => 0,
                    0 => 1,
                    _ => 2,
                };
                for pos in 0..2 {
                    let best = (pos..lits.len())
                        .min_by_key(|&i| (rank(self.value(lits[i])), i))
                        .expect("at least two literals");
                    lits.swap(pos, best);
                }
                self.watches[lits[0].code()].push(id);
                self.watches[lits[1].code()].push(id);
                if !self.inconsistent {
                    match (self.value(lits[0]), self.value(lits[1])) {
                        (FALSE, _) => self.inconsistent = true,
                        (0, FALSE) => {
                            let unit = lits[0];
                            self.entries.push(Entry { lits, alive: true });
                            self.assign(unit, id);
                            self.close_root();
                            return id;
                        }
                        _ => {}
                    }
                }
            }
        }
        self.entries.push(Entry { lits, alive: true });
        id
    }

    fn close_root(&mut self) {
        if self.propagate().is_some() {
            self.inconsistent = true;
        }
        self.root_len = self.trail.len();
        self.qhead = self.root_len;
    }

    /// Removes one live clause with the same literal multiset. Returns `None`
    /// when no such clause exists.
    pub fn remove_clause(&mut self, lits: &[Lit]) -> Option<ClauseId> {
        let mut key = lits.to_vec();
        key.sort_unstable();
        let ids = self.index.get_mut(&key)?;
        // most recent copy first
        let id = ids.pop()?;
        if ids.is_empty() {
            self.index.remove(&key);
        }
        let entry = &mut self.entries[id as usize];
        entry.alive = false;
        let was_reason = entry
            .lits
            .iter()
            .any(|l| self.reason[l.var().offset()] == id && self.values[l.code()] == TRUE);
        match entry.lits.len() {
            0 => self.empty_clauses -= 1,
            1 => self.units.retain(|&u| u != id),
            _ => {}
        }
        if was_reason || (self.inconsistent && self.empty_clauses == 0) {
            self.rebuild_root();
        }
        Some(id)
    }

    /// Recomputes the root assignment from scratch over the live clauses.
    fn rebuild_root(&mut self) {
        self.root_len = 0;
        self.backtrack_to_root();
        self.inconsistent = self.empty_clauses > 0;
        if self.inconsistent {
            return;
        }
        for i in 0..self.units.len() {
            let id = self.units[i];
            let lit = self.entries[id as usize].lits[0];
            match self.value(lit) {
                TRUE => {}
                FALSE => {
                    self.inconsistent = true;
                    break;
                }
                _ => self.assign(lit, id),
            }
        }
        if !self.inconsistent {
            self.close_root();
        } else {
            self.root_len = self.trail.len();
            self.qhead = self.root_len;
        }
    }

    /// Runs propagation from `qhead`; returns a conflicting clause if any.
    fn propagate(&mut self) -> Option<ClauseId> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            'next: while i < ws.len() {
                let id = ws[i];
                i += 1;
                let entry = &mut self.entries[id as usize];
                if !entry.alive {
                    continue;
                }
                let lits = &mut entry.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if self.values[first.code()] == TRUE {
                    ws[j] = id;
                    j += 1;
                    continue;
                }
                for t in 2..lits.len() {
                    if self.values[lits[t].code()] != FALSE {
                        lits.swap(1, t);
                        self.watches[lits[1].code()].push(id);
                        continue 'next;
                    }
                }
                ws[j] = id;
                j += 1;
                if self.values[first.code()] == FALSE {
                    conflict = Some(id);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, id);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// Asserts `assumptions` on top of the root assignment and reports whether
    /// unit propagation reaches a conflict. The root assignment is restored.
    pub fn conflicts_under(&mut self, assumptions: &[Lit]) -> bool {
        if self.inconsistent {
            return true;
        }
        let conflict = self.assume(assumptions);
        self.backtrack_to_root();
        conflict
    }

    /// Whether `clause` has the reverse-unit-propagation property: asserting
    /// the negation of each of its literals makes propagation conflict.
    pub fn is_rup(&mut self, clause: &[Lit]) -> bool {
        let negated: Vec<Lit> = clause.iter().map(|&l| !l).collect();
        self.conflicts_under(&negated)
    }

    fn assume(&mut self, assumptions: &[Lit]) -> bool {
        for &lit in assumptions {
            self.ensure_var(lit.var());
            match self.value(lit) {
                TRUE => {}
                FALSE => return true,
                _ => self.assign(lit, NO_REASON),
            }
        }
        self.propagate().is_some()
    }

    /// Current assignment (root plus any live assumptions) as a partial assignment.
    fn snapshot(&self, n: u32) -> PartialAssignment {
        let mut out = PartialAssignment::empty(n);
        for lit in &self.trail {
            if lit.var().index() <= n {
                out.set(lit.var(), !lit.is_negated());
            }
        }
        out
    }
}

/// Extends `assignment` by unit propagation over `clauses` until a fixpoint
/// or a clause with every literal false.
pub fn unit_propagate(clauses: &[Clause], assignment: &PartialAssignment) -> Propagation {
    let n = assignment.num_vars();
    let mut prop = Propagator::new(n);
    for c in clauses {
        prop.add_clause(c.lits());
    }
    if prop.is_inconsistent() {
        return Propagation::Conflict;
    }
    let assumptions: Vec<Lit> = assignment.assigned().map(|(v, b)| Lit::new(v, !b)).collect();
    if prop.assume(&assumptions) {
        return Propagation::Conflict;
    }
    Propagation::NoConflict(prop.snapshot(n))
}
