//! Propositional syntax and semantics: atoms, literals, formulas, assignments,
//! the concrete formula grammar and the CNF encoding used by the SAT layer.

mod cnf;
mod parse;

pub use cnf::{to_cnf, CnfProblem};
pub use parse::{parse_formula, parse_formula_declaring};
pub(crate) use parse::parse_at;

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};

/// Index of a propositional atom inside a [`Symbols`] table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(u32);

impl Atom {
    pub fn new(index: usize) -> Self {
        Atom(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Name table for atoms. Indices are handed out in declaration order and
/// form a bijection onto `0..len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Symbols {
    names: Vec<String>,
    lookup: HashMap<String, Atom>,
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && name != "true" && name != "false"
}

impl Symbols {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name`, returning the existing atom if it is already known.
    pub fn declare(&mut self, name: &str) -> Result<Atom> {
        if let Some(&atom) = self.lookup.get(name) {
            return Ok(atom);
        }
        if !is_valid_name(name) {
            return Err(Error::InvalidSetting(format!("invalid atom name `{name}`")));
        }
        let atom = Atom::new(self.names.len());
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), atom);
        Ok(atom)
    }

    pub fn get(&self, name: &str) -> Option<Atom> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.names.len()).map(Atom::new)
    }
}

/// An atom with a polarity, packed as `2 * atom + negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    pub fn new(atom: Atom, positive: bool) -> Self {
        Literal(atom.0 << 1 | (!positive) as u32)
    }

    pub fn pos(atom: Atom) -> Self {
        Self::new(atom, true)
    }

    pub fn neg(atom: Atom) -> Self {
        Self::new(atom, false)
    }

    pub fn atom(self) -> Atom {
        Atom(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    pub fn display<'a>(&self, symbols: &'a Symbols) -> impl fmt::Display + 'a {
        let lit = *self;
        DisplayWith(move |f: &mut fmt::Formatter<'_>| {
            if !lit.is_positive() {
                f.write_str("!")?;
            }
            f.write_str(symbols.name(lit.atom()))
        })
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "+{}", self.0 >> 1)
        } else {
            write!(f, "-{}", self.0 >> 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl From<Atom> for Formula {
    fn from(atom: Atom) -> Self {
        Formula::Atom(atom)
    }
}

impl From<Literal> for Formula {
    fn from(lit: Literal) -> Self {
        let atom = Formula::Atom(lit.atom());
        if lit.is_positive() {
            atom
        } else {
            Formula::not(atom)
        }
    }
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: impl Into<Formula>) -> Self {
        Formula::Not(Box::new(f.into()))
    }

    pub fn and(a: impl Into<Formula>, b: impl Into<Formula>) -> Self {
        Formula::And(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn or(a: impl Into<Formula>, b: impl Into<Formula>) -> Self {
        Formula::Or(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn implies(a: impl Into<Formula>, b: impl Into<Formula>) -> Self {
        Formula::Implies(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn iff(a: impl Into<Formula>, b: impl Into<Formula>) -> Self {
        Formula::Iff(Box::new(a.into()), Box::new(b.into()))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Const(true))
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Const(false))
    }

    pub fn evaluate(&self, v: &Assignment) -> Result<bool> {
        Ok(match self {
            Formula::Const(c) => *c,
            Formula::Atom(a) => v
                .get(*a)
                .ok_or_else(|| Error::MissingAtom(format!("#{}", a.index())))?,
            Formula::Not(g) => !g.evaluate(v)?,
            Formula::And(a, b) => a.evaluate(v)? & b.evaluate(v)?,
            Formula::Or(a, b) => a.evaluate(v)? | b.evaluate(v)?,
            Formula::Implies(a, b) => !a.evaluate(v)? | b.evaluate(v)?,
            Formula::Iff(a, b) => a.evaluate(v)? == b.evaluate(v)?,
        })
    }

    /// Evaluation against a valuation callback; total by construction.
    pub fn eval_with(&self, value: &impl Fn(Atom) -> bool) -> bool {
        match self {
            Formula::Const(c) => *c,
            Formula::Atom(a) => value(*a),
            Formula::Not(g) => !g.eval_with(value),
            Formula::And(a, b) => a.eval_with(value) && b.eval_with(value),
            Formula::Or(a, b) => a.eval_with(value) || b.eval_with(value),
            Formula::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
            Formula::Iff(a, b) => a.eval_with(value) == b.eval_with(value),
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) => out.push(*a),
            Formula::Not(g) => g.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn mentions(&self, atom: Atom) -> bool {
        match self {
            Formula::Const(_) => false,
            Formula::Atom(a) => *a == atom,
            Formula::Not(g) => g.mentions(atom),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.mentions(atom) || b.mentions(atom),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }

    /// Pretty-prints with the fewest parentheses that still re-parse to the
    /// same tree.
    pub fn display<'a>(&'a self, symbols: &'a Symbols) -> impl fmt::Display + 'a {
        DisplayWith(move |f: &mut fmt::Formatter<'_>| self.write(f, symbols))
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, symbols: &Symbols) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, g: &Formula, parens: bool| {
            if parens {
                f.write_str("(")?;
                g.write(f, symbols)?;
                f.write_str(")")
            } else {
                g.write(f, symbols)
            }
        };
        let p = self.precedence();
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Atom(a) => f.write_str(symbols.name(*a)),
            Formula::Not(g) => {
                f.write_str("!")?;
                child(f, g, g.precedence() < 5)
            }
            // Left-associative operators: a right operand of equal precedence
            // needs parentheses.
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                let op = match self {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    _ => " <-> ",
                };
                child(f, a, a.precedence() < p)?;
                f.write_str(op)?;
                child(f, b, b.precedence() <= p)
            }
            // Right-associative.
            Formula::Implies(a, b) => {
                child(f, a, a.precedence() <= p)?;
                f.write_str(" -> ")?;
                child(f, b, b.precedence() < p)
            }
        }
    }
}

struct DisplayWith<F>(F);

impl<F: Fn(&mut fmt::Formatter<'_>) -> fmt::Result> fmt::Display for DisplayWith<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (self.0)(f)
    }
}

/// Truth values for the atoms `0..domain()`. Atoms outside the domain are
/// unassigned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(domain: usize) -> Self {
        Assignment {
            values: vec![false; domain],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn from_names(symbols: &Symbols, pairs: &[(&str, bool)]) -> Result<Self> {
        let mut values = vec![None; symbols.len()];
        for &(name, value) in pairs {
            let atom = symbols
                .get(name)
                .ok_or_else(|| Error::MissingAtom(name.to_string()))?;
            values[atom.index()] = Some(value);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MissingAtom(symbols.name(Atom::new(i)).into())))
            .collect::<Result<_>>()?;
        Ok(Assignment { values })
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, atom: Atom) -> Option<bool> {
        self.values.get(atom.index()).copied()
    }

    pub fn set(&mut self, atom: Atom, value: bool) {
        self.values[atom.index()] = value;
    }

    pub fn satisfies(&self, lit: Literal) -> Option<bool> {
        self.get(lit.atom()).map(|v| v == lit.is_positive())
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}
