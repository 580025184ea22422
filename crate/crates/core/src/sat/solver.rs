//! Conflict-driven clause learning with two watched literals, first-UIP
//! learning, VSIDS-style activities and Luby restarts.
//!
//! Assumptions are decided first, one per decision level, so a failing
//! assumption can be explained in terms of earlier assumptions only.
//! Ties in the decision heuristic go to the lowest atom index, and nothing
//! in the search depends on hashing or timing.

use crate::logic::{Assignment, Atom, CnfProblem, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// A model over every atom of the problem, auxiliaries included.
    Sat(Assignment),
    /// A subset of the assumptions that is unsatisfiable with the clauses,
    /// in ascending literal order. Not necessarily minimal.
    Unsat(Vec<Literal>),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat(_) => None,
        }
    }

    pub fn core(&self) -> Option<&[Literal]> {
        match self {
            SatResult::Sat(_) => None,
            SatResult::Unsat(core) => Some(core),
        }
    }
}

const RESTART_BASE: u64 = 64;
const VAR_DECAY: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct Solver {
    clauses: Vec<Vec<Literal>>,
    watches: Vec<Vec<usize>>,
    values: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Literal>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    root_unsat: bool,
}

/// Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

impl Solver {
    pub fn new(problem: &CnfProblem) -> Self {
        let n = problem.num_atoms();
        let mut solver = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            values: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            phase: vec![false; n],
            seen: vec![false; n],
            root_unsat: false,
        };
        for clause in problem.clauses() {
            solver.add_clause(clause);
        }
        if !solver.root_unsat && solver.propagate().is_some() {
            solver.root_unsat = true;
        }
        solver
    }

    pub fn num_atoms(&self) -> usize {
        self.values.len()
    }

    fn add_clause(&mut self, clause: &[Literal]) {
        match clause.len() {
            0 => self.root_unsat = true,
            1 => match self.value(clause[0]) {
                Value::True => {}
                Value::False => self.root_unsat = true,
                Value::Unassigned => self.enqueue(clause[0], None),
            },
            _ => {
                self.attach(clause.to_vec());
            }
        }
    }

    fn attach(&mut self, lits: Vec<Literal>) -> usize {
        let idx = self.clauses.len();
        self.watches[lits[0].code()].push(idx);
        self.watches[lits[1].code()].push(idx);
        self.clauses.push(lits);
        idx
    }

    fn value(&self, lit: Literal) -> Value {
        match self.values[lit.atom().index()] {
            Value::Unassigned => Value::Unassigned,
            v if (v == Value::True) == lit.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, lit: Literal, reason: Option<usize>) {
        let v = lit.atom().index();
        self.values[v] = if lit.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for lit in self.trail.drain(keep..) {
            let v = lit.atom().index();
            self.phase[v] = lit.is_positive();
            self.values[v] = Value::Unassigned;
            self.reason[v] = None;
        }
        self.trail_lim.truncate(level);
        self.qhead = keep;
    }

    /// Unit propagation; returns the index of a falsified clause.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let false_lit = !self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.value(first) == Value::True {
                    i += 1;
                    continue;
                }
                let replacement =
                    (2..self.clauses[ci].len()).find(|&k| self.value(self.clauses[ci][k]) != Value::False);
                if let Some(k) = replacement {
                    self.clauses[ci].swap(1, k);
                    let new_watch = self.clauses[ci][1];
                    self.watches[new_watch.code()].push(ci);
                    ws.swap_remove(i);
                    continue;
                }
                if self.value(first) == Value::False {
                    self.watches[false_lit.code()] = ws;
                    self.qhead = self.trail.len();
                    return Some(ci);
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
            self.watches[false_lit.code()] = ws;
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Literal>, usize) {
        let mut learnt = vec![Literal::pos(Atom::new(0))];
        let mut pending = 0usize;
        let mut pivot: Option<Literal> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            for k in 0..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = q.atom().index();
                if pivot.is_some_and(|p| p.atom().index() == v) {
                    continue;
                }
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].atom().index()] {
                    break;
                }
            }
            let p = self.trail[idx];
            let v = p.atom().index();
            self.seen[v] = false;
            pending -= 1;
            pivot = Some(p);
            if pending == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal has a reason");
        }
        learnt[0] = !pivot.expect("conflict involves the current level");
        for lit in &learnt[1..] {
            self.seen[lit.atom().index()] = false;
        }
        let mut backjump = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].atom().index()] > self.level[learnt[best].atom().index()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            backjump = self.level[learnt[1].atom().index()] as usize;
        }
        (learnt, backjump)
    }

    /// Collects the assumptions responsible for `failed` being false.
    fn analyze_final(&mut self, failed: Literal) -> Vec<Literal> {
        let mut core = vec![failed];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[failed.atom().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.atom().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => core.push(lit),
                Some(ci) => {
                    for k in 0..self.clauses[ci].len() {
                        let u = self.clauses[ci][k].atom().index();
                        if self.level[u] > 0 {
                            self.seen[u] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[failed.atom().index()] = false;
        core.sort();
        core.dedup();
        core
    }

    fn pick_branch(&self) -> Option<Literal> {
        let mut best: Option<usize> = None;
        for v in 0..self.values.len() {
            if self.values[v] == Value::Unassigned
                && best.is_none_or(|b| self.activity[v] > self.activity[b])
            {
                best = Some(v);
            }
        }
        best.map(|v| Literal::new(Atom::new(v), self.phase[v]))
    }

    pub fn solve(&mut self, assumptions: &[Literal]) -> SatResult {
        if self.root_unsat {
            return SatResult::Unsat(Vec::new());
        }
        self.cancel_until(0);
        let mut conflicts: u64 = 0;
        let mut restarts: u64 = 0;
        let mut restart_at = RESTART_BASE * luby(0);
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.root_unsat = true;
                    return SatResult::Unsat(Vec::new());
                }
                conflicts += 1;
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                self.var_inc /= VAR_DECAY;
                continue;
            }
            if conflicts >= restart_at {
                restarts += 1;
                conflicts = 0;
                restart_at = RESTART_BASE * luby(restarts);
                self.cancel_until(0);
                continue;
            }
            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let p = assumptions[self.decision_level()];
                match self.value(p) {
                    Value::True => self.trail_lim.push(self.trail.len()),
                    Value::False => {
                        let core = self.analyze_final(p);
                        self.cancel_until(0);
                        return SatResult::Unsat(core);
                    }
                    Value::Unassigned => {
                        next = Some(p);
                        break;
                    }
                }
            }
            let decision = match next.or_else(|| self.pick_branch()) {
                Some(lit) => lit,
                None => {
                    let model = Assignment::from_values(
                        self.values.iter().map(|&v| v == Value::True).collect(),
                    );
                    self.cancel_until(0);
                    return SatResult::Sat(model);
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        }
    }
}
