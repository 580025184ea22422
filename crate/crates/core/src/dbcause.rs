//! Causes for answers to boolean conjunctive queries.
//!
//! The query is grounded into its witnesses (tuple sets that satisfy the body
//! under some binding). Each witness `w` becomes the ground denial
//! `!ab(t1) & ... & !ab(tk) -> !(t1 & ... & tk)` over the facts, every fact is
//! asserted true, and tuple deletions are read off the diagnoses of that
//! setting. Exogenous tuples get no abnormality atom and therefore never
//! appear in a contingency set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::causality::{causes_from_diagnoses, Cause, CauseOptions};
use crate::diagnosis::DiagnosisSetting;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::logic::{Atom, Formula, Symbols};

/// Cause verdict keyed by tuple id (position in [`Database::facts`]).
pub type TupleCause = Cause<usize>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Fact {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses a ground atom such as `R(c,b)`.
    pub fn parse(text: &str) -> Result<Self> {
        parse_fact(text, 1, 1)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// A ground database. Facts are kept sorted, so tuple ids are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Database {
    facts: Vec<Fact>,
    exogenous: BTreeSet<usize>,
    index: HashMap<String, Vec<usize>>,
}

impl Database {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let facts: Vec<Fact> = facts.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        for f in &facts {
            let expected = *arity.entry(&f.predicate).or_insert(f.args.len());
            if expected != f.args.len() {
                return Err(Error::InvalidDatabase(format!(
                    "predicate `{}` used with arities {} and {}",
                    f.predicate,
                    expected,
                    f.args.len()
                )));
            }
        }
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            index.entry(f.predicate.clone()).or_default().push(i);
        }
        Ok(Database {
            facts,
            exogenous: BTreeSet::new(),
            index,
        })
    }

    /// Marks facts as exogenous: present, but not subject to deletion.
    pub fn with_exogenous(mut self, exo: impl IntoIterator<Item = Fact>) -> Result<Self> {
        for f in exo {
            let id = self
                .id_of(&f)
                .ok_or_else(|| Error::InvalidDatabase(format!("exogenous tuple `{f}` is not in the database")))?;
            self.exogenous.insert(id);
        }
        Ok(self)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn fact(&self, id: usize) -> &Fact {
        &self.facts[id]
    }

    pub fn id_of(&self, f: &Fact) -> Option<usize> {
        self.facts.binary_search(f).ok()
    }

    pub fn exogenous(&self) -> &BTreeSet<usize> {
        &self.exogenous
    }

    pub fn is_exogenous(&self, id: usize) -> bool {
        self.exogenous.contains(&id)
    }

    /// Tuple ids open to deletion, ascending.
    pub fn endogenous(&self) -> Vec<usize> {
        (0..self.facts.len()).filter(|i| !self.exogenous.contains(i)).collect()
    }

    fn arity(&self, predicate: &str) -> Option<usize> {
        self.index.get(predicate).map(|ids| self.facts[ids[0]].args.len())
    }

    /// The database without the given tuples. Exogenous marks are kept.
    pub fn without(&self, deleted: &[usize]) -> Database {
        let deleted: BTreeSet<usize> = deleted.iter().copied().collect();
        let keep: Vec<usize> = (0..self.facts.len()).filter(|i| !deleted.contains(i)).collect();
        let mut out = Database::new(keep.iter().map(|&i| self.facts[i].clone())).expect("subset of a valid database");
        out.exogenous = keep
            .iter()
            .enumerate()
            .filter(|(_, old)| self.exogenous.contains(old))
            .map(|(new, _)| new)
            .collect();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryAtom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

/// Existentially quantified conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    body: Vec<QueryAtom>,
}

impl ConjunctiveQuery {
    pub fn new(body: Vec<QueryAtom>) -> Result<Self> {
        if body.is_empty() {
            return Err(Error::InvalidDatabase("query body is empty".into()));
        }
        Ok(ConjunctiveQuery { body })
    }

    /// Parses a comma-separated atom list such as `S(X), R(X,Y), S(Y)`.
    pub fn parse(text: &str) -> Result<Self> {
        parse_query(text, 1, 1)
    }

    pub fn body(&self) -> &[QueryAtom] {
        &self.body
    }

    fn check_arity(&self, d: &Database) -> Result<()> {
        for a in &self.body {
            if let Some(expected) = d.arity(&a.predicate) {
                if expected != a.terms.len() {
                    return Err(Error::ArityMismatch {
                        expected,
                        found: a.terms.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let terms: Vec<String> = a.terms.iter().map(ToString::to_string).collect();
            write!(f, "{}({})", a.predicate, terms.join(","))?;
        }
        Ok(())
    }
}

/// Tuple ids jointly satisfying the query body under one binding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness {
    pub tuples: Vec<usize>,
}

pub fn eval_query(d: &Database, q: &ConjunctiveQuery) -> Result<bool> {
    q.check_arity(d)?;
    let mut found = false;
    ground(d, q, 0, &mut HashMap::new(), &mut Vec::new(), &mut |_| {
        found = true;
        false
    });
    Ok(found)
}

pub fn witnesses(d: &Database, q: &ConjunctiveQuery) -> Result<Vec<Witness>> {
    witnesses_with(d, q, Exec::default())
}

/// Set-minimal witnesses, ordered by size then lexicographically.
pub fn witnesses_with(d: &Database, q: &ConjunctiveQuery, exec: Exec) -> Result<Vec<Witness>> {
    q.check_arity(d)?;
    let first = &q.body[0];
    let starts: Vec<usize> = d.index.get(&first.predicate).cloned().unwrap_or_default();
    let per_start: Vec<BTreeSet<Vec<usize>>> = exec.map(&starts, |&id| {
        let mut sets = BTreeSet::new();
        let mut binding = HashMap::new();
        if unify(&first.terms, &d.facts[id].args, &mut binding).is_some() {
            ground(d, q, 1, &mut binding, &mut vec![id], &mut |used| {
                let mut set = used.to_vec();
                set.sort();
                set.dedup();
                sets.insert(set);
                true
            });
        }
        sets
    });
    let mut all: Vec<Vec<usize>> = per_start.into_iter().flatten().collect::<BTreeSet<_>>().into_iter().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut minimal: Vec<Vec<usize>> = Vec::new();
    for set in all {
        if !minimal.iter().any(|m| m.iter().all(|t| set.binary_search(t).is_ok())) {
            minimal.push(set);
        }
    }
    Ok(minimal.into_iter().map(|tuples| Witness { tuples }).collect())
}

/// Binds `terms` against `args`, returning the variables newly bound.
fn unify(terms: &[Term], args: &[String], binding: &mut HashMap<String, String>) -> Option<Vec<String>> {
    let mut fresh = Vec::new();
    for (t, a) in terms.iter().zip(args) {
        let ok = match t {
            Term::Const(c) => c == a,
            Term::Var(v) => match binding.get(v) {
                Some(b) => b == a,
                None => {
                    binding.insert(v.clone(), a.clone());
                    fresh.push(v.clone());
                    true
                }
            },
        };
        if !ok {
            for v in &fresh {
                binding.remove(v);
            }
            return None;
        }
    }
    Some(fresh)
}

/// Nested-loop join from body position `pos`; `emit` returns false to stop.
fn ground(
    d: &Database,
    q: &ConjunctiveQuery,
    pos: usize,
    binding: &mut HashMap<String, String>,
    used: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if pos == q.body.len() {
        return emit(used);
    }
    let atom = &q.body[pos];
    let Some(ids) = d.index.get(&atom.predicate) else {
        return true;
    };
    for &id in ids {
        if let Some(fresh) = unify(&atom.terms, &d.facts[id].args, binding) {
            used.push(id);
            let go_on = ground(d, q, pos + 1, binding, used, emit);
            used.pop();
            for v in &fresh {
                binding.remove(v);
            }
            if !go_on {
                return false;
            }
        }
    }
    true
}

/// Diagnosis setting of the grounded denial constraint.
#[derive(Debug, Clone)]
pub struct DenialSetting {
    pub setting: DiagnosisSetting,
    pub witnesses: Vec<Witness>,
    /// Abnormality atom of each tuple; `None` for exogenous tuples and for
    /// tuples that occur in no witness.
    pub ab_of_tuple: Vec<Option<Atom>>,
    tuple_of_ab: HashMap<Atom, usize>,
}

impl DenialSetting {
    pub fn tuple_of(&self, ab: Atom) -> usize {
        self.tuple_of_ab[&ab]
    }
}

pub fn build_denial_setting(d: &Database, q: &ConjunctiveQuery) -> Result<DenialSetting> {
    build_denial_setting_with(d, q, Exec::default())
}

pub fn build_denial_setting_with(d: &Database, q: &ConjunctiveQuery, exec: Exec) -> Result<DenialSetting> {
    let ws = witnesses_with(d, q, exec)?;
    if ws.is_empty() {
        return Err(Error::QueryFalse);
    }
    let mut symbols = Symbols::new();
    let fact_atoms: Vec<Atom> = (0..d.len())
        .map(|i| symbols.declare(&format!("t{i}")))
        .collect::<Result<_>>()?;
    let in_witness: BTreeSet<usize> = ws.iter().flat_map(|w| w.tuples.iter().copied()).collect();
    let mut ab_of_tuple = vec![None; d.len()];
    let mut tuple_of_ab = HashMap::new();
    let mut components = Vec::new();
    for &t in &in_witness {
        if d.is_exogenous(t) {
            continue;
        }
        let ab = symbols.declare(&format!("ab_t{t}"))?;
        ab_of_tuple[t] = Some(ab);
        tuple_of_ab.insert(ab, t);
        components.push(ab);
    }
    let mut model: Vec<Formula> = fact_atoms.iter().map(|&a| Formula::Atom(a)).collect();
    for w in &ws {
        let normal = Formula::conj(w.tuples.iter().filter_map(|&t| ab_of_tuple[t]).map(Formula::not));
        let facts = Formula::conj(w.tuples.iter().map(|&t| Formula::Atom(fact_atoms[t])));
        model.push(Formula::implies(normal, Formula::not(facts)));
    }
    let setting = DiagnosisSetting::new(symbols, components, [], model, Vec::new())?;
    Ok(DenialSetting {
        setting,
        witnesses: ws,
        ab_of_tuple,
        tuple_of_ab,
    })
}

/// One verdict per endogenous tuple, in tuple id order.
pub fn tuple_causes(d: &Database, q: &ConjunctiveQuery, opts: CauseOptions) -> Result<Vec<TupleCause>> {
    let ds = build_denial_setting_with(d, q, opts.exec)?;
    let mut by_tuple: BTreeMap<usize, TupleCause> = causes_from_diagnoses(&ds.setting, opts)
        .into_iter()
        .map(|r| {
            let r = r.map_keys(|a| ds.tuple_of(a));
            (r.subject, r)
        })
        .collect();
    Ok(d
        .endogenous()
        .into_iter()
        .map(|t| {
            by_tuple
                .remove(&t)
                .unwrap_or_else(|| Cause::non_cause(t, opts.all_contingencies))
        })
        .collect())
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `P(a,b)` at the given file position into predicate and argument
/// texts.
fn split_atom(text: &str, line: usize, column: usize) -> Result<(String, Vec<(String, usize)>)> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim();
    let col = column + lead;
    let open = body
        .find('(')
        .ok_or_else(|| Error::syntax(line, col, format!("expected `(` in `{body}`")))?;
    let predicate = body[..open].trim();
    if predicate.is_empty()
        || !predicate.starts_with(|c: char| c.is_ascii_alphabetic())
        || !predicate.chars().all(is_ident_char)
    {
        return Err(Error::syntax(line, col, format!("invalid predicate name `{predicate}`")));
    }
    if !body.ends_with(')') {
        return Err(Error::syntax(line, col + body.len(), "expected `)`"));
    }
    let inner = &body[open + 1..body.len() - 1];
    let mut args = Vec::new();
    let mut offset = open + 1;
    for part in inner.split(',') {
        let t = part.trim();
        let at = col + offset + (part.len() - part.trim_start().len());
        if t.is_empty() || !t.chars().all(is_ident_char) {
            return Err(Error::syntax(line, at, format!("invalid term `{t}`")));
        }
        args.push((t.to_string(), at));
        offset += part.len() + 1;
    }
    Ok((predicate.to_string(), args))
}

fn is_variable(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

pub(crate) fn parse_fact(text: &str, line: usize, column: usize) -> Result<Fact> {
    let (predicate, args) = split_atom(text, line, column)?;
    let mut out = Vec::with_capacity(args.len());
    for (a, at) in args {
        if is_variable(&a) {
            return Err(Error::syntax(line, at, format!("variable `{a}` in a ground fact")));
        }
        out.push(a);
    }
    Ok(Fact { predicate, args: out })
}

/// Splits at commas outside parentheses, keeping each piece's byte offset.
fn split_top_level(text: &str) -> Vec<(usize, &str)> {
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut pieces = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                pieces.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push((start, &text[start..]));
    pieces
}

/// Comma-separated ground atoms, e.g. `R(a,b), S(c)`.
pub(crate) fn parse_fact_list(text: &str, line: usize, column: usize) -> Result<Vec<Fact>> {
    split_top_level(text)
        .into_iter()
        .map(|(at, piece)| {
            if piece.trim().is_empty() {
                return Err(Error::syntax(line, column + at, "expected a ground atom"));
            }
            parse_fact(piece, line, column + at)
        })
        .collect()
}

pub(crate) fn parse_query(text: &str, line: usize, column: usize) -> Result<ConjunctiveQuery> {
    let mut body = Vec::new();
    for (at, piece) in split_top_level(text) {
        if piece.trim().is_empty() {
            return Err(Error::syntax(line, column + at, "expected a query atom"));
        }
        let (predicate, args) = split_atom(piece, line, column + at)?;
        let terms = args
            .into_iter()
            .map(|(a, _)| if is_variable(&a) { Term::Var(a) } else { Term::Const(a) })
            .collect();
        body.push(QueryAtom { predicate, terms });
    }
    ConjunctiveQuery::new(body)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::causality::Responsibility;
    use crate::diagnosis::minimal_conflicts;

    pub(crate) fn path_example() -> (Database, ConjunctiveQuery) {
        let facts = ["R(c,b)", "R(a,d)", "R(b,a)", "R(e,f)", "S(a)", "S(b)", "S(c)", "S(d)"];
        let d = Database::new(facts.iter().map(|f| Fact::parse(f).unwrap())).unwrap();
        (d, ConjunctiveQuery::parse("S(X), R(X,Y), S(Y)").unwrap())
    }

    fn ids(d: &Database, facts: &[&str]) -> Vec<usize> {
        facts.iter().map(|f| d.id_of(&Fact::parse(f).unwrap()).unwrap()).collect()
    }

    #[test]
    fn parsing() {
        assert_eq!(Fact::parse(" R(c, b) ").unwrap(), Fact::new("R", ["c", "b"]));
        assert!(matches!(Fact::parse("R(X,b)"), Err(Error::Syntax { column: 3, .. })));
        assert!(matches!(Fact::parse("R c"), Err(Error::Syntax { .. })));
        let q = ConjunctiveQuery::parse("S(X), R(X,y)").unwrap();
        assert_eq!(q.to_string(), "S(X), R(X,y)");
        assert_eq!(q.body()[1].terms[1], Term::Const("y".into()));
        assert!(matches!(ConjunctiveQuery::parse("S(X),,R(X)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn arity_checks() {
        let bad = Database::new([Fact::new("R", ["a"]), Fact::new("R", ["a", "b"])]);
        assert!(matches!(bad, Err(Error::InvalidDatabase(_))));
        let (d, _) = path_example();
        let q = ConjunctiveQuery::parse("R(X)").unwrap();
        assert_eq!(eval_query(&d, &q), Err(Error::ArityMismatch { expected: 2, found: 1 }));
    }

    #[test]
    fn path_example_evaluation_and_witnesses() {
        let (d, q) = path_example();
        assert!(eval_query(&d, &q).unwrap());
        let ws: Vec<Vec<usize>> = witnesses(&d, &q).unwrap().into_iter().map(|w| w.tuples).collect();
        let mut expected = vec![
            ids(&d, &["S(a)", "R(a,d)", "S(d)"]),
            ids(&d, &["S(b)", "R(b,a)", "S(a)"]),
            ids(&d, &["S(c)", "R(c,b)", "S(b)"]),
        ];
        for w in &mut expected {
            w.sort();
        }
        assert_eq!(ws, expected);
        let reduced = d.without(&ids(&d, &["S(a)", "S(b)"]));
        assert!(!eval_query(&reduced, &q).unwrap());
        assert!(!eval_query(&Database::default(), &q).unwrap());
    }

    #[test]
    fn witness_edge_cases() {
        let d = Database::new([Fact::new("S", ["a"])]).unwrap();
        let single = ConjunctiveQuery::parse("S(X)").unwrap();
        assert_eq!(witnesses(&d, &single).unwrap(), vec![Witness { tuples: vec![0] }]);
        let none = ConjunctiveQuery::parse("S(b)").unwrap();
        assert!(witnesses(&d, &none).unwrap().is_empty());
        // A self-join binding that reuses a tuple yields a smaller witness,
        // which subsumes the larger ones.
        let d = Database::new([Fact::new("R", ["a", "a"]), Fact::new("R", ["a", "b"]), Fact::new("R", ["b", "a"])]).unwrap();
        let q = ConjunctiveQuery::parse("R(X,Y), R(Y,X)").unwrap();
        let ws: Vec<Vec<usize>> = witnesses(&d, &q).unwrap().into_iter().map(|w| w.tuples).collect();
        assert_eq!(ws, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn denial_conflicts_are_witnesses() {
        let (d, q) = path_example();
        let ds = build_denial_setting(&d, &q).unwrap();
        let conflicts: Vec<Vec<usize>> = minimal_conflicts(&ds.setting)
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.atoms().into_iter().map(|a| ds.tuple_of(a)).collect();
                v.sort();
                v
            })
            .collect();
        let ws: Vec<Vec<usize>> = ds.witnesses.iter().map(|w| w.tuples.clone()).collect();
        assert_eq!(conflicts, ws);
        let empty = d.without(&ids(&d, &["S(a)", "S(b)"]));
        assert_eq!(build_denial_setting(&empty, &q).unwrap_err(), Error::QueryFalse);
    }

    #[test]
    fn path_example_causes() {
        let (d, q) = path_example();
        let rs = tuple_causes(&d, &q, CauseOptions::default()).unwrap();
        assert_eq!(rs.len(), 8);
        let causes: Vec<String> = rs.iter().filter(|r| r.is_actual).map(|r| d.fact(r.subject).to_string()).collect();
        assert_eq!(causes, ["R(a,d)", "R(b,a)", "R(c,b)", "S(a)", "S(b)", "S(c)", "S(d)"]);
        let rcb = &rs[ids(&d, &["R(c,b)"])[0]];
        assert_eq!(rcb.min_contingency, Some(ids(&d, &["S(a)"])));
        let half = Responsibility { num: 1, den: 2 };
        for f in ["R(c,b)", "S(a)", "S(b)", "S(d)"] {
            assert_eq!(rs[ids(&d, &[f])[0]].responsibility, half, "{f}");
        }
        assert!(!rs[ids(&d, &["R(e,f)"])[0]].is_actual);
    }

    #[test]
    fn single_witness_and_exogenous() {
        let d = Database::new(["S(a)", "R(a,b)", "S(b)", "S(z)"].iter().map(|f| Fact::parse(f).unwrap())).unwrap();
        let q = ConjunctiveQuery::parse("S(X), R(X,Y), S(Y)").unwrap();
        let rs = tuple_causes(&d, &q, CauseOptions::default()).unwrap();
        let counterfactual: Vec<bool> = rs.iter().map(|r| r.is_counterfactual).collect();
        assert_eq!(counterfactual, [true, true, true, false]);

        let (d, q) = path_example();
        let sa = ids(&d, &["S(a)"])[0];
        let d = d.with_exogenous([Fact::parse("S(a)").unwrap()]).unwrap();
        let ds = build_denial_setting(&d, &q).unwrap();
        assert_eq!(ds.ab_of_tuple[sa], None);
        assert_eq!(ds.setting.components().len(), 6);
        let rs = tuple_causes(&d, &q, CauseOptions::default()).unwrap();
        assert_eq!(rs.len(), 7);
        assert!(rs.iter().all(|r| r.subject != sa));
        assert!(d.clone().with_exogenous([Fact::parse("T(q)").unwrap()]).is_err());
    }
}
