use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Atom, Formula, Literal, Symbols};

/// Clause set over the atoms of a [`Symbols`] table plus Tseitin
/// auxiliaries. Atoms `0..num_original` are the original atoms; the
/// auxiliaries follow them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfProblem {
    clauses: Vec<Vec<Literal>>,
    num_original: usize,
    aux_names: Vec<String>,
}

impl CnfProblem {
    pub fn new(num_atoms: usize) -> Self {
        CnfProblem {
            clauses: Vec::new(),
            num_original: num_atoms,
            aux_names: Vec::new(),
        }
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn num_atoms(&self) -> usize {
        self.num_original + self.aux_names.len()
    }

    pub fn original_atoms(&self) -> impl Iterator<Item = Atom> {
        (0..self.num_original).map(Atom::new)
    }

    pub fn auxiliary_atoms(&self) -> impl Iterator<Item = Atom> {
        (self.num_original..self.num_atoms()).map(Atom::new)
    }

    pub fn aux_name(&self, atom: Atom) -> Option<&str> {
        atom.index()
            .checked_sub(self.num_original)
            .and_then(|i| self.aux_names.get(i))
            .map(String::as_str)
    }

    /// Adds a clause over original atoms, dropping duplicate literals and
    /// tautologies.
    pub fn add_clause(&mut self, clause: impl IntoIterator<Item = Literal>) {
        let mut lits: Vec<Literal> = Vec::new();
        for lit in clause {
            if lits.contains(&!lit) {
                return;
            }
            if !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        self.clauses.push(lits);
    }

    /// DIMACS rendering with 1-based variables.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_atoms(), self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let v = lit.atom().index() as i64 + 1;
                let _ = write!(out, "{} ", if lit.is_positive() { v } else { -v });
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Enc {
    Const(bool),
    Lit(Literal),
}

impl Enc {
    fn negate(self) -> Enc {
        match self {
            Enc::Const(c) => Enc::Const(!c),
            Enc::Lit(l) => Enc::Lit(!l),
        }
    }
}

struct Encoder<'a> {
    cnf: CnfProblem,
    reserved: HashSet<&'a str>,
    next_suffix: usize,
}

impl<'a> Encoder<'a> {
    fn fresh(&mut self) -> Literal {
        let name = loop {
            let name = format!("_t{}", self.next_suffix);
            self.next_suffix += 1;
            if !self.reserved.contains(name.as_str()) {
                break name;
            }
        };
        let atom = Atom::new(self.cnf.num_atoms());
        self.cnf.aux_names.push(name);
        Literal::pos(atom)
    }

    fn clause(&mut self, parts: Vec<Enc>) {
        let mut lits = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                Enc::Const(true) => return,
                Enc::Const(false) => {}
                Enc::Lit(l) => lits.push(l),
            }
        }
        self.cnf.add_clause(lits);
    }

    /// Asserts `f` (or its negation when `positive` is false) at top level.
    fn assert(&mut self, f: &Formula, positive: bool) {
        match (f, positive) {
            (Formula::Const(c), _) => {
                if *c != positive {
                    self.cnf.clauses.push(Vec::new());
                }
            }
            (Formula::Atom(a), _) => self.cnf.add_clause([Literal::new(*a, positive)]),
            (Formula::Not(g), _) => self.assert(g, !positive),
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                self.assert(a, positive);
                self.assert(b, positive);
            }
            (Formula::Implies(a, b), false) => {
                self.assert(a, true);
                self.assert(b, false);
            }
            (Formula::Or(..), true) | (Formula::And(..), false) | (Formula::Implies(..), true) => {
                let mut parts = Vec::new();
                self.disjuncts(f, positive, &mut parts);
                self.clause(parts);
            }
            (Formula::Iff(a, b), _) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                if positive {
                    self.clause(vec![la.negate(), lb]);
                    self.clause(vec![lb.negate(), la]);
                } else {
                    self.clause(vec![la, lb]);
                    self.clause(vec![la.negate(), lb.negate()]);
                }
            }
        }
    }

    /// Flattens a (possibly negated) disjunctive formula into clause parts.
    fn disjuncts(&mut self, f: &Formula, positive: bool, out: &mut Vec<Enc>) {
        match (f, positive) {
            (Formula::Or(a, b), true) | (Formula::And(a, b), false) => {
                self.disjuncts(a, positive, out);
                self.disjuncts(b, positive, out);
            }
            (Formula::Implies(a, b), true) => {
                self.disjuncts(a, false, out);
                self.disjuncts(b, true, out);
            }
            (Formula::Not(g), _) => self.disjuncts(g, !positive, out),
            _ => {
                let e = self.encode(f);
                out.push(if positive { e } else { e.negate() });
            }
        }
    }

    fn flatten<'f>(f: &'f Formula, and: bool, out: &mut Vec<&'f Formula>) {
        match f {
            Formula::And(a, b) if and => {
                Self::flatten(a, and, out);
                Self::flatten(b, and, out);
            }
            Formula::Or(a, b) if !and => {
                Self::flatten(a, and, out);
                Self::flatten(b, and, out);
            }
            _ => out.push(f),
        }
    }

    /// Returns a literal equivalent to `f`, introducing auxiliaries for
    /// compound subformulas.
    fn encode(&mut self, f: &Formula) -> Enc {
        match f {
            Formula::Const(c) => Enc::Const(*c),
            Formula::Atom(a) => Enc::Lit(Literal::pos(*a)),
            Formula::Not(g) => self.encode(g).negate(),
            Formula::And(..) | Formula::Or(..) => {
                let and = matches!(f, Formula::And(..));
                let mut operands = Vec::new();
                Self::flatten(f, and, &mut operands);
                let mut lits = Vec::new();
                for g in operands {
                    match self.encode(g) {
                        // absorbing element
                        Enc::Const(c) if c != and => return Enc::Const(c),
                        Enc::Const(_) => {}
                        Enc::Lit(l) => lits.push(l),
                    }
                }
                self.gate(lits, and)
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a).negate();
                let lb = self.encode(b);
                match (la, lb) {
                    (Enc::Const(true), _) | (_, Enc::Const(true)) => Enc::Const(true),
                    (Enc::Const(false), other) | (other, Enc::Const(false)) => other,
                    (Enc::Lit(x), Enc::Lit(y)) => self.gate(vec![x, y], false),
                }
            }
            Formula::Iff(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                match (la, lb) {
                    (Enc::Const(x), Enc::Const(y)) => Enc::Const(x == y),
                    (Enc::Const(c), other) | (other, Enc::Const(c)) => {
                        if c {
                            other
                        } else {
                            other.negate()
                        }
                    }
                    (Enc::Lit(x), Enc::Lit(y)) => {
                        let t = self.fresh();
                        self.cnf.add_clause([!t, !x, y]);
                        self.cnf.add_clause([!t, x, !y]);
                        self.cnf.add_clause([t, x, y]);
                        self.cnf.add_clause([t, !x, !y]);
                        Enc::Lit(t)
                    }
                }
            }
        }
    }

    /// Defines `t <-> AND(lits)` (or OR when `and` is false).
    fn gate(&mut self, lits: Vec<Literal>, and: bool) -> Enc {
        match lits.len() {
            0 => Enc::Const(and),
            1 => Enc::Lit(lits[0]),
            _ => {
                let t = self.fresh();
                // For OR, encode !t <-> AND(!lits).
                let (out, ins): (Literal, Vec<Literal>) = if and {
                    (t, lits)
                } else {
                    (!t, lits.into_iter().map(|l| !l).collect())
                };
                for &l in &ins {
                    self.cnf.add_clause([!out, l]);
                }
                let mut long: Vec<Literal> = ins.iter().map(|&l| !l).collect();
                long.push(out);
                self.cnf.add_clause(long);
                Enc::Lit(t)
            }
        }
    }
}

/// Encodes the conjunction of `formulas` into an equisatisfiable clause set.
/// Auxiliaries are named `_t<k>` in the order they are introduced.
pub fn to_cnf(formulas: &[Formula], symbols: &Symbols) -> CnfProblem {
    let mut encoder = Encoder {
        cnf: CnfProblem::new(symbols.len()),
        reserved: symbols.names.iter().map(String::as_str).collect(),
        next_suffix: 0,
    };
    for f in formulas {
        encoder.assert(f, true);
    }
    encoder.cnf
}
