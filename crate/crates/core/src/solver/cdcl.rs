//! Conflict-driven clause learning in the MiniSat mould.
//!
//! Two watched literals with blocker literals, first-UIP learning with
//! recursive minimization, VSIDS branching, geometric restarts and
//! activity-based learned-clause deletion. When proof output is on, every
//! learned clause is written as a DRAT addition, every deleted one as a
//! deletion, and a refutation ends with the empty clause. Learned clauses
//! are RUP with respect to the clauses live at the time they are added.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::heap::VarHeap;
use super::{SolverConfig, SolverOutcome, SolverStats, Verdict};
use crate::formula::{Assignment, Formula, Lit};
use crate::io::drat::{DratProof, DratStep};

const NO_REASON: u32 = u32::MAX;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: Lit,
}

#[derive(Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    activity: f64,
    learnt: bool,
    removed: bool,
}

/// Solves `formula`; deterministic for a given formula and configuration
/// unless a time limit interrupts it.
pub fn solve_cdcl(formula: &Formula, config: &SolverConfig) -> SolverOutcome {
    let start = Instant::now();
    let mut solver = Cdcl::new(formula.num_vars() as usize, config, start);
    let verdict = solver.solve(formula);
    SolverOutcome { verdict, wall_time: start.elapsed(), stats: solver.stats }
}

struct Cdcl<'c> {
    config: &'c SolverConfig,
    start: Instant,
    num_vars: usize,
    // per literal code
    values: Vec<i8>,
    watches: Vec<Vec<Watcher>>,
    // per variable
    level: Vec<u32>,
    reason: Vec<u32>,
    activity: Vec<f64>,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,

    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    clauses: Vec<ClauseData>,
    learnts: Vec<u32>,
    num_original: usize,

    order: VarHeap,
    var_inc: f64,
    clause_inc: f64,
    max_learnts: f64,

    rng: ChaCha8Rng,
    proof: Option<DratProof>,
    stats: SolverStats,

    analyze_stack: Vec<Lit>,
    analyze_toclear: Vec<Lit>,
}

impl<'c> Cdcl<'c> {
    fn new(num_vars: usize, config: &'c SolverConfig, start: Instant) -> Self {
        let activity = vec![0.0; num_vars];
        let mut order = VarHeap::new(num_vars);
        for v in 0..num_vars as u32 {
            order.insert(v, &activity);
        }
        Cdcl {
            config,
            start,
            num_vars,
            values: vec![0; 2 * num_vars],
            watches: (0..2 * num_vars).map(|_| Vec::new()).collect(),
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            activity,
            saved_phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            clauses: Vec::new(),
            learnts: Vec::new(),
            num_original: 0,
            order,
            var_inc: 1.0,
            clause_inc: 1.0,
            max_learnts: 0.0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            proof: config.emit_proof.then(DratProof::default),
            stats: SolverStats::default(),
            analyze_stack: Vec::new(),
            analyze_toclear: Vec::new(),
        }
    }

    #[inline]
    fn value(&self, lit: Lit) -> i8 {
        self.values[lit.code()]
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    #[inline]
    fn enqueue(&mut self, lit: Lit, reason: u32) {
        let v = lit.var().offset();
        self.values[lit.code()] = TRUE;
        self.values[(!lit).code()] = FALSE;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn emit_add(&mut self, lits: &[Lit]) {
        if let Some(p) = self.proof.as_mut() {
            p.push(DratStep::add(lits.to_vec()));
        }
    }

    fn refute(&mut self) -> Verdict {
        self.emit_add(&[]);
        Verdict::Unsatisfiable(self.proof.take())
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let id = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watcher { clause: id, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watcher { clause: id, blocker: lits[0] });
        self.clauses.push(ClauseData { lits, activity: 0.0, learnt, removed: false });
        if learnt {
            self.learnts.push(id);
        }
        id
    }

    fn solve(&mut self, formula: &Formula) -> Verdict {
        for clause in formula.clauses() {
            let lits = clause.lits();
            match lits.len() {
                0 => return self.refute(),
                1 => match self.value(lits[0]) {
                    TRUE => {}
                    FALSE => return self.refute(),
                    _ => self.enqueue(lits[0], NO_REASON),
                },
                _ => {
                    self.attach(lits.to_vec(), false);
                }
            }
        }
        self.num_original = formula.num_clauses();
        self.max_learnts = (self.num_original as f64 * self.config.learnt_size_factor).max(self.config.learnt_size_min);
        self.search()
    }

    fn search(&mut self) -> Verdict {
        let mut restart_limit = self.config.restart_first as f64;
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return self.refute();
                }
                let (learnt, backtrack_level) = self.analyze(conflict);
                self.cancel_until(backtrack_level);
                self.emit_add(&learnt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let asserting = learnt[0];
                    let id = self.attach(learnt, true);
                    self.bump_clause(id);
                    self.enqueue(asserting, id);
                }
                self.var_inc /= self.config.var_decay;
                self.clause_inc /= self.config.clause_decay;

                if self.config.conflict_limit.is_some_and(|l| self.stats.conflicts >= l)
                    || self.config.time_limit.is_some_and(|l| self.start.elapsed() >= l)
                {
                    return Verdict::Timeout;
                }
            } else {
                if conflicts_since_restart as f64 >= restart_limit {
                    conflicts_since_restart = 0;
                    restart_limit *= self.config.restart_factor;
                    self.max_learnts *= self.config.learnt_size_inc;
                    self.cancel_until(0);
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                match self.pick_branch() {
                    Some(lit) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, NO_REASON);
                    }
                    None => return Verdict::Satisfiable(self.model()),
                }
            }
        }
    }

    fn model(&self) -> Assignment {
        Assignment::from_values((0..self.num_vars).map(|v| self.values[2 * v] == TRUE).collect())
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        let mut next = None;
        if self.config.random_decision_freq > 0.0
            && self.order.len() > 0
            && self.rng.gen::<f64>() < self.config.random_decision_freq
        {
            let v = self.order.get(self.rng.gen_range(0..self.order.len()));
            if self.values[2 * v as usize] == 0 {
                next = Some(v);
            }
        }
        while next.is_none() {
            let v = self.order.pop(&self.activity)?;
            if self.values[2 * v as usize] == 0 {
                next = Some(v);
            }
        }
        let v = next.expect("chosen above") as usize;
        // saved_phase holds the value to try; fresh variables start false
        Some(Lit::from_code(2 * v + (!self.saved_phase[v]) as usize))
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for i in (keep..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().offset();
            self.values[lit.code()] = 0;
            self.values[(!lit).code()] = 0;
            self.reason[v] = NO_REASON;
            if self.config.phase_saving {
                self.saved_phase[v] = !lit.is_negated();
            }
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            'next: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.values[w.blocker.code()] == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.clause as usize];
                if clause.removed {
                    continue;
                }
                let lits = &mut clause.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let kept = Watcher { clause: w.clause, blocker: first };
                if first != w.blocker && self.values[first.code()] == TRUE {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                for t in 2..lits.len() {
                    if self.values[lits[t].code()] != FALSE {
                        lits.swap(1, t);
                        self.watches[lits[1].code()].push(kept);
                        continue 'next;
                    }
                }
                ws[j] = kept;
                j += 1;
                if self.values[first.code()] == FALSE {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.clause);
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

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, id: u32) {
        let c = &mut self.clauses[id as usize];
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first, a literal of the backtrack level second) and the level
    /// to backtrack to.
    fn analyze(&mut self, mut conflict: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::from_code(0)];
        let mut pending = 0;
        let mut index = self.trail.len();
        let mut implied: Option<Lit> = None;
        let current = self.decision_level();

        loop {
            if self.clauses[conflict as usize].learnt {
                self.bump_clause(conflict);
            }
            let skip = implied.is_some() as usize;
            for j in skip..self.clauses[conflict as usize].lits.len() {
                let q = self.clauses[conflict as usize].lits[j];
                let v = q.var().offset();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().offset()] {
                    break;
                }
            }
            let p = self.trail[index];
            let v = p.var().offset();
            implied = Some(p);
            conflict = self.reason[v];
            self.seen[v] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        learnt[0] = !implied.expect("at least one literal at the conflict level");

        // recursive minimization
        self.analyze_toclear.clear();
        self.analyze_toclear.extend_from_slice(&learnt);
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, l| acc | self.abstract_level(l.var().offset()));
        let mut kept = 1;
        for i in 1..learnt.len() {
            let lit = learnt[i];
            if self.reason[lit.var().offset()] == NO_REASON || !self.lit_redundant(lit, abstract_levels) {
                learnt[kept] = lit;
                kept += 1;
            }
        }
        learnt.truncate(kept);

        let backtrack_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().offset()] > self.level[learnt[max_i].var().offset()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().offset()]
        };

        for l in self.analyze_toclear.drain(..) {
            self.seen[l.var().offset()] = false;
        }
        (learnt, backtrack_level)
    }

    #[inline]
    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    fn lit_redundant(&mut self, lit: Lit, abstract_levels: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(lit);
        let top = self.analyze_toclear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let reason = self.reason[q.var().offset()] as usize;
            for j in 1..self.clauses[reason].lits.len() {
                let l = self.clauses[reason].lits[j];
                let v = l.var().offset();
                if !self.seen[v] && self.level[v] > 0 {
                    if self.reason[v] != NO_REASON && (self.abstract_level(v) & abstract_levels) != 0 {
                        self.seen[v] = true;
                        self.analyze_stack.push(l);
                        self.analyze_toclear.push(l);
                    } else {
                        for c in self.analyze_toclear.drain(top..) {
                            self.seen[c.var().offset()] = false;
                        }
                        return false;
                    }
                }
            }
        }
        true
    }

    fn locked(&self, id: u32) -> bool {
        let first = self.clauses[id as usize].lits[0];
        self.value(first) == TRUE && self.reason[first.var().offset()] == id
    }

    /// Drops about half of the learned clauses, least active first. Binary
    /// clauses and current reasons stay.
    fn reduce_db(&mut self) {
        let extra_limit = self.clause_inc / self.learnts.len().max(1) as f64;
        let mut learnts = std::mem::take(&mut self.learnts);
        learnts.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            let key = |c: &ClauseData| c.lits.len() > 2;
            // removable candidates first, lowest activity first
            key(cb)
                .cmp(&key(ca))
                .then(ca.activity.total_cmp(&cb.activity))
                .then(a.cmp(&b))
        });
        let half = learnts.len() / 2;
        let mut kept = Vec::with_capacity(learnts.len());
        for (i, &id) in learnts.iter().enumerate() {
            let c = &self.clauses[id as usize];
            if c.lits.len() > 2 && !self.locked(id) && (i < half || c.activity < extra_limit) {
                let c = &mut self.clauses[id as usize];
                c.removed = true;
                let lits = std::mem::take(&mut c.lits);
                if let Some(p) = self.proof.as_mut() {
                    p.push(DratStep::delete(lits));
                }
            } else {
                kept.push(id);
            }
        }
        self.learnts = kept;
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.clause as usize].removed);
        }
    }
}
