//! Brute-force reference implementations.
//!
//! Everything here works by exhaustive enumeration straight from the
//! definitions: satisfiability by truth tables, causes by trying every
//! contingency set, query answers by trying every variable binding over the
//! active domain. Nothing is shared with the SAT-based engine beyond the data
//! types, so agreement between the two is meaningful.

use std::collections::{BTreeMap, BTreeSet};

use crate::causality::{Cause, CauseReport};
use crate::dbcause::{ConjunctiveQuery, Database, Fact, Term, TupleCause};
use crate::diagnosis::DiagnosisSetting;
use crate::error::{Error, Result};
use crate::logic::Atom;

pub const MAX_ATOMS: usize = 20;
pub const MAX_TUPLES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteDiagnoses {
    /// Every diagnosis, canonical order.
    pub all: Vec<Vec<Atom>>,
    pub minimal: Vec<Vec<Atom>>,
    pub minimum: Vec<Vec<Atom>>,
}

/// Truth-table view of a setting: the set of endogenous abnormality patterns
/// (bit `i` set means the `i`-th endogenous atom is abnormal) that extend to a
/// model of `M ∪ Obs` with every exogenous component normal.
struct DiagnosisTable {
    endogenous: Vec<Atom>,
    consistent: Vec<bool>,
}

impl DiagnosisTable {
    fn build(s: &DiagnosisSetting) -> Result<Self> {
        let n = s.symbols().len();
        if n > MAX_ATOMS {
            return Err(Error::TooLarge(format!(
                "{n} atoms exceed the oracle limit of {MAX_ATOMS}"
            )));
        }
        let endogenous = s.endogenous();
        let mut consistent = vec![false; 1 << endogenous.len()];
        for m in 0..1u64 << n {
            let value = |a: Atom| m >> a.index() & 1 == 1;
            if s.exogenous().iter().any(|&x| value(x)) {
                continue;
            }
            if !s.observation().iter().all(|l| value(l.atom()) == l.is_positive()) {
                continue;
            }
            if !s.model().iter().all(|f| f.eval_with(&value)) {
                continue;
            }
            let pattern = endogenous
                .iter()
                .enumerate()
                .filter(|(_, &a)| value(a))
                .fold(0usize, |acc, (i, _)| acc | 1 << i);
            consistent[pattern] = true;
        }
        Ok(DiagnosisTable { endogenous, consistent })
    }

    fn atoms(&self, pattern: usize) -> Vec<Atom> {
        self.endogenous
            .iter()
            .enumerate()
            .filter(|(i, _)| pattern >> i & 1 == 1)
            .map(|(_, &a)| a)
            .collect()
    }
}

fn canonical(mut sets: Vec<Vec<Atom>>) -> Vec<Vec<Atom>> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets
}

fn is_subset(a: usize, b: usize) -> bool {
    a & !b == 0
}

pub fn brute_diagnoses(s: &DiagnosisSetting) -> Result<BruteDiagnoses> {
    let t = DiagnosisTable::build(s)?;
    let diag: Vec<usize> = (0..t.consistent.len()).filter(|&p| t.consistent[p]).collect();
    let minimal: Vec<usize> = diag
        .iter()
        .copied()
        .filter(|&p| !diag.iter().any(|&q| q != p && is_subset(q, p)))
        .collect();
    let least = minimal.iter().map(|p| p.count_ones()).min();
    let minimum: Vec<usize> = minimal.iter().copied().filter(|p| Some(p.count_ones()) == least).collect();
    let to_sets = |ps: &[usize]| canonical(ps.iter().map(|&p| t.atoms(p)).collect());
    Ok(BruteDiagnoses {
        all: to_sets(&diag),
        minimal: to_sets(&minimal),
        minimum: to_sets(&minimum),
    })
}

/// Verdict for every endogenous atom, with all minimal contingency sets.
/// Empty when the all-normal assumption is already consistent.
pub fn brute_causes(s: &DiagnosisSetting) -> Result<Vec<CauseReport>> {
    let t = DiagnosisTable::build(s)?;
    if t.consistent[0] {
        return Ok(Vec::new());
    }
    let n = t.endogenous.len();
    Ok((0..n)
        .map(|i| {
            let (min, all) = contingencies(n, i, |p| t.consistent[p]);
            Cause::from_contingency(
                t.endogenous[i],
                min.map(|p| t.atoms(p)),
                Some(canonical(all.into_iter().map(|p| t.atoms(p)).collect())),
            )
        })
        .collect())
}

/// Minimum (lexicographically least among ties) and all subset-minimal
/// contingency patterns for element `i`, where `restores(p)` tells whether
/// intervening on pattern `p` restores the target.
fn contingencies(n: usize, i: usize, restores: impl Fn(usize) -> bool) -> (Option<usize>, Vec<usize>) {
    let bit = 1usize << i;
    let gammas: Vec<usize> = (0..1usize << n)
        .filter(|&g| g & bit == 0 && !restores(g) && restores(g | bit))
        .collect();
    let minimal: Vec<usize> = gammas
        .iter()
        .copied()
        .filter(|&g| !gammas.iter().any(|&h| h != g && is_subset(h, g)))
        .collect();
    let key = |g: usize| {
        let members: Vec<usize> = (0..n).filter(|j| g >> j & 1 == 1).collect();
        (members.len(), members)
    };
    let min = minimal.iter().copied().min_by_key(|&g| key(g));
    (min, minimal)
}

/// Deletion-semantics verdict for every endogenous tuple, with all minimal
/// contingency sets.
pub fn brute_db_causes(d: &Database, q: &ConjunctiveQuery) -> Result<Vec<TupleCause>> {
    let endogenous = d.endogenous();
    let n = endogenous.len();
    if n > MAX_TUPLES {
        return Err(Error::TooLarge(format!(
            "{n} deletable tuples exceed the oracle limit of {MAX_TUPLES}"
        )));
    }
    let bindings = satisfying_bindings(d, q)?;
    if bindings.is_empty() {
        return Err(Error::QueryFalse);
    }
    // The query survives deleting pattern `p` iff some binding uses no
    // deleted tuple.
    let masks: Vec<usize> = bindings
        .iter()
        .map(|used| {
            endogenous
                .iter()
                .enumerate()
                .filter(|(_, t)| used.contains(t))
                .fold(0usize, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    let query_false: Vec<bool> = (0..1usize << n).map(|p| masks.iter().all(|&m| m & p != 0)).collect();
    let to_ids = |p: usize| -> Vec<usize> { (0..n).filter(|j| p >> j & 1 == 1).map(|j| endogenous[j]).collect() };
    Ok((0..n)
        .map(|i| {
            let (min, all) = contingencies(n, i, |p| query_false[p]);
            let mut all: Vec<Vec<usize>> = all.into_iter().map(to_ids).collect();
            all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            Cause::from_contingency(endogenous[i], min.map(to_ids), Some(all))
        })
        .collect())
}

/// Tuple sets used by each variable binding over the active domain that
/// maps every body atom into the database.
fn satisfying_bindings(d: &Database, q: &ConjunctiveQuery) -> Result<Vec<BTreeSet<usize>>> {
    let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
    for f in d.facts() {
        arity.insert(&f.predicate, f.args.len());
    }
    let mut vars: Vec<&str> = Vec::new();
    for a in q.body() {
        if let Some(&k) = arity.get(a.predicate.as_str()) {
            if k != a.terms.len() {
                return Err(Error::ArityMismatch {
                    expected: k,
                    found: a.terms.len(),
                });
            }
        }
        for t in &a.terms {
            if let Term::Var(v) = t {
                if !vars.contains(&v.as_str()) {
                    vars.push(v);
                }
            }
        }
    }
    let domain: Vec<&str> = d
        .facts()
        .iter()
        .flat_map(|f| f.args.iter().map(String::as_str))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = Vec::new();
    if domain.is_empty() && !vars.is_empty() {
        return Ok(out);
    }
    let total = domain.len().pow(vars.len() as u32);
    for code in 0..total {
        let mut rest = code;
        let mut value = BTreeMap::new();
        for v in &vars {
            value.insert(*v, domain[rest % domain.len()]);
            rest /= domain.len();
        }
        let mut used = BTreeSet::new();
        let ok = q.body().iter().all(|a| {
            let fact = Fact {
                predicate: a.predicate.clone(),
                args: a
                    .terms
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => value[v.as_str()].to_string(),
                        Term::Const(c) => c.clone(),
                    })
                    .collect(),
            };
            match d.id_of(&fact) {
                Some(id) => {
                    used.insert(id);
                    true
                }
                None => false,
            }
        });
        if ok {
            out.push(used);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::Responsibility;
    use crate::classifier::tests::gated_and;
    use crate::classifier::{build_failure_model, Entity, FailureEncoding};
    use crate::dbcause::tests::path_example;
    use crate::diagnosis::tests::{build, two_gate};

    fn names(s: &DiagnosisSetting, sets: &[Vec<Atom>]) -> Vec<Vec<String>> {
        sets.iter().map(|d| s.names(d)).collect()
    }

    #[test]
    fn two_gate_by_hand() {
        let s = two_gate(&["a", "!b", "c", "!d"]);
        let b = brute_diagnoses(&s).unwrap();
        assert_eq!(names(&s, &b.minimal), [["abO"]]);
        assert_eq!(names(&s, &b.minimum), [["abO"]]);
        assert_eq!(names(&s, &b.all), vec![vec!["abO"], vec!["abA", "abO"]]);
        let rs = brute_causes(&s).unwrap();
        assert_eq!(rs[0].responsibility, Responsibility::ZERO);
        assert!(rs[1].is_counterfactual);
        assert_eq!(rs[1].all_minimal_contingencies, Some(vec![vec![]]));
    }

    #[test]
    fn normal_and_exogenous() {
        let s = two_gate(&["a", "b", "c", "d"]);
        assert_eq!(brute_diagnoses(&s).unwrap().minimal, vec![Vec::<Atom>::new()]);
        assert!(brute_causes(&s).unwrap().is_empty());
        let exo = build(&["abA", "abO"], &["abA", "abO"], &crate::diagnosis::tests::TWO_GATE, &["a", "!b", "c", "!d"]);
        assert!(brute_diagnoses(&exo).unwrap().all.is_empty());
        assert!(brute_causes(&exo).unwrap().is_empty());
    }

    #[test]
    fn classifier_setting() {
        let fm = build_failure_model(&gated_and(), &Entity::new(vec![true, false, true, false]), true, FailureEncoding::DoubleImplication).unwrap();
        let rs = brute_causes(&fm.setting).unwrap();
        let cf: Vec<bool> = rs.iter().map(|r| r.is_counterfactual).collect();
        assert_eq!(cf, [false, true, false, true]);
    }

    #[test]
    fn size_limit() {
        let names: Vec<String> = (0..21).map(|i| format!("v{i}")).collect();
        let model = [names.join(" & ")];
        let s = build(&[], &[], &[model[0].as_str()], &[]);
        assert!(matches!(brute_diagnoses(&s), Err(Error::TooLarge(_))));
    }

    #[test]
    fn database_cases() {
        let (d, q) = path_example();
        let rs = brute_db_causes(&d, &q).unwrap();
        let causes: Vec<String> = rs.iter().filter(|r| r.is_actual).map(|r| d.fact(r.subject).to_string()).collect();
        assert_eq!(causes.len(), 7);
        assert!(!causes.contains(&"R(e,f)".to_string()));
        let none = d.without(&[4, 5]);
        assert_eq!(brute_db_causes(&none, &q), Err(Error::QueryFalse));

        let single = Database::new(["S(a)", "R(a,b)", "S(b)"].iter().map(|f| Fact::parse(f).unwrap())).unwrap();
        let rs = brute_db_causes(&single, &q).unwrap();
        assert!(rs.iter().all(|r| r.responsibility == Responsibility::ONE));
    }
}
