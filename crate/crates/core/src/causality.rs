//! Counterfactual and actual causes, contingency sets and responsibility
//! over a diagnosis setting.
//!
//! Two independent routes are provided. [`full_cause_analysis`] searches
//! contingency sets directly: `Γ` is a contingency set for `ab` when `Γ` alone
//! does not restore consistency but `Γ ∪ {ab}` does. [`causes_from_diagnoses`]
//! reads the same information off the minimal diagnoses: `ab` is an actual
//! cause iff it belongs to a minimal diagnosis `Δ`, with contingency set
//! `Δ \ {ab}`. The two agree whenever diagnoses are closed under supersets
//! (weak fault models in particular).
//!
//! Causes are only defined for settings whose all-normal assumption is
//! inconsistent. For a normal setting both routes return an empty list.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnosis::{
    canonical_cmp, is_normal, minimal_conflicts_with, minimal_diagnoses_with, sort_canonical,
    DiagnosisSetting, Prober,
};
use crate::error::Result;
use crate::exec::Exec;
use crate::logic::Atom;

/// `1/(1+k)` for an actual cause with minimum contingency size `k`, `0/1`
/// otherwise. Always in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Responsibility {
    pub num: u64,
    pub den: u64,
}

impl Responsibility {
    pub const ZERO: Responsibility = Responsibility { num: 0, den: 1 };
    pub const ONE: Responsibility = Responsibility { num: 1, den: 1 };

    pub fn from_contingency_size(k: usize) -> Self {
        Responsibility {
            num: 1,
            den: 1 + k as u64,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Responsibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Cause verdict for one subject `K` (an abnormality atom, a feature index,
/// a tuple id). Contingency sets use the same key type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cause<K> {
    pub subject: K,
    pub is_counterfactual: bool,
    pub is_actual: bool,
    /// The smallest contingency set, lexicographically least among ties.
    pub min_contingency: Option<Vec<K>>,
    pub responsibility: Responsibility,
    /// Every subset-minimal contingency set, when requested.
    pub all_minimal_contingencies: Option<Vec<Vec<K>>>,
}

pub type CauseReport = Cause<Atom>;

impl<K> Cause<K> {
    pub fn non_cause(subject: K, with_all: bool) -> Self {
        Cause {
            subject,
            is_counterfactual: false,
            is_actual: false,
            min_contingency: None,
            responsibility: Responsibility::ZERO,
            all_minimal_contingencies: with_all.then(Vec::new),
        }
    }

    /// Builds a verdict from the minimum contingency set (if any) and
    /// optionally all minimal ones.
    pub fn from_contingency(
        subject: K,
        min_contingency: Option<Vec<K>>,
        all: Option<Vec<Vec<K>>>,
    ) -> Self {
        match min_contingency {
            None => Cause {
                all_minimal_contingencies: all.map(|_| Vec::new()),
                ..Cause::non_cause(subject, false)
            },
            Some(gamma) => Cause {
                subject,
                is_counterfactual: gamma.is_empty(),
                is_actual: true,
                responsibility: Responsibility::from_contingency_size(gamma.len()),
                min_contingency: Some(gamma),
                all_minimal_contingencies: all,
            },
        }
    }

    pub fn map_keys<L>(self, mut f: impl FnMut(K) -> L) -> Cause<L> {
        Cause {
            subject: f(self.subject),
            is_counterfactual: self.is_counterfactual,
            is_actual: self.is_actual,
            min_contingency: self
                .min_contingency
                .map(|g| g.into_iter().map(&mut f).collect()),
            responsibility: self.responsibility,
            all_minimal_contingencies: self.all_minimal_contingencies.map(|all| {
                all.into_iter()
                    .map(|g| g.into_iter().map(&mut f).collect())
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CauseOptions {
    /// Also report every subset-minimal contingency set. The direct search
    /// then enumerates all candidate sets, which is exponential.
    pub all_contingencies: bool,
    pub exec: Exec,
}

pub fn is_counterfactual_cause(s: &DiagnosisSetting, ab: Atom) -> Result<bool> {
    s.check_endogenous(ab)?;
    let mut prober = Prober::new(s);
    Ok(!prober.consistent(&[]) && prober.consistent(&[ab]))
}

/// Direct search for a minimum contingency set of `ab`.
pub fn is_actual_cause(s: &DiagnosisSetting, ab: Atom) -> Result<(bool, Option<Vec<Atom>>)> {
    s.check_endogenous(ab)?;
    if is_normal(s) {
        return Ok((false, None));
    }
    let pool = CandidatePool::for_setting(s, Exec::Sequential);
    let mut search = ContingencySearch::new(s);
    let gamma = search.minimum(ab, &pool);
    Ok((gamma.is_some(), gamma))
}

pub fn responsibility(s: &DiagnosisSetting, ab: Atom) -> Result<Responsibility> {
    Ok(match is_actual_cause(s, ab)? {
        (true, Some(gamma)) => Responsibility::from_contingency_size(gamma.len()),
        _ => Responsibility::ZERO,
    })
}

/// Cause reports read off the minimal diagnoses.
pub fn causes_from_diagnoses(s: &DiagnosisSetting, opts: CauseOptions) -> Vec<CauseReport> {
    let diagnoses = minimal_diagnoses_with(s, opts.exec);
    if diagnoses.iter().any(|d| d.atoms.is_empty()) {
        return Vec::new();
    }
    s.endogenous()
        .into_iter()
        .map(|ab| {
            let mut gammas: Vec<Vec<Atom>> = diagnoses
                .iter()
                .filter(|d| d.atoms.contains(&ab))
                .map(|d| d.atoms.iter().copied().filter(|&a| a != ab).collect())
                .collect();
            sort_canonical(&mut gammas);
            let min = gammas.first().cloned();
            Cause::from_contingency(ab, min, opts.all_contingencies.then_some(gammas))
        })
        .collect()
}

/// One report per endogenous component by direct contingency-set search.
pub fn full_cause_analysis(s: &DiagnosisSetting, opts: CauseOptions) -> Vec<CauseReport> {
    if is_normal(s) {
        return Vec::new();
    }
    let pool = CandidatePool::for_setting(s, opts.exec);
    let endogenous = s.endogenous();
    opts.exec.map_init(
        &endogenous,
        || ContingencySearch::new(s),
        |search, &ab| {
            let min = search.minimum(ab, &pool);
            let all = opts
                .all_contingencies
                .then(|| search.all_minimal(ab, &pool));
            Cause::from_contingency(ab, min, all)
        },
    )
}

/// Components worth trying in contingency sets. In weak models every minimum
/// contingency set plus its cause is a minimal diagnosis, so only atoms that
/// occur in some minimal conflict can help; elsewhere every endogenous
/// component is a candidate.
struct CandidatePool {
    atoms: Vec<Atom>,
    conflict_atoms_only: bool,
}

impl CandidatePool {
    fn for_setting(s: &DiagnosisSetting, exec: Exec) -> Self {
        if s.is_weak_model() {
            let mut atoms: Vec<Atom> = minimal_conflicts_with(s, exec)
                .iter()
                .flat_map(|c| c.atoms())
                .collect();
            atoms.sort();
            atoms.dedup();
            CandidatePool {
                atoms,
                conflict_atoms_only: true,
            }
        } else {
            CandidatePool {
                atoms: s.endogenous(),
                conflict_atoms_only: false,
            }
        }
    }

    /// Candidates for a contingency set of `ab`, or `None` when `ab` cannot
    /// be a cause at all.
    fn for_cause(&self, ab: Atom) -> Option<Vec<Atom>> {
        if self.conflict_atoms_only && !self.atoms.contains(&ab) {
            return None;
        }
        Some(self.atoms.iter().copied().filter(|&a| a != ab).collect())
    }
}

struct ContingencySearch<'a> {
    prober: Prober<'a>,
    cache: HashMap<Vec<Atom>, bool>,
}

impl<'a> ContingencySearch<'a> {
    fn new(s: &'a DiagnosisSetting) -> Self {
        ContingencySearch {
            prober: Prober::new(s),
            cache: HashMap::new(),
        }
    }

    fn restores(&mut self, abnormal: Vec<Atom>) -> bool {
        if let Some(&v) = self.cache.get(&abnormal) {
            return v;
        }
        let v = self.prober.consistent(&abnormal);
        self.cache.insert(abnormal, v);
        v
    }

    /// Conditions (b1) and (b2): `Γ` alone leaves the setting inconsistent,
    /// `Γ ∪ {ab}` restores consistency.
    fn is_contingency(&mut self, ab: Atom, gamma: &[Atom]) -> bool {
        let mut with = gamma.to_vec();
        with.push(ab);
        with.sort();
        self.restores(with) && !self.restores(gamma.to_vec())
    }

    fn minimum(&mut self, ab: Atom, candidates: &CandidatePool) -> Option<Vec<Atom>> {
        let pool = candidates.for_cause(ab)?;
        for k in 0..=pool.len() {
            let mut found = None;
            for_each_combination(&pool, k, &mut |gamma| {
                if self.is_contingency(ab, gamma) {
                    found = Some(gamma.to_vec());
                    return false;
                }
                true
            });
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn all_minimal(&mut self, ab: Atom, candidates: &CandidatePool) -> Vec<Vec<Atom>> {
        let mut found: Vec<Vec<Atom>> = Vec::new();
        let Some(pool) = candidates.for_cause(ab) else {
            return found;
        };
        for k in 0..=pool.len() {
            for_each_combination(&pool, k, &mut |gamma| {
                let redundant = found
                    .iter()
                    .any(|f| f.iter().all(|a| gamma.binary_search(a).is_ok()));
                if !redundant && self.is_contingency(ab, gamma) {
                    found.push(gamma.to_vec());
                }
                true
            });
        }
        found.sort_by(|a, b| canonical_cmp(a, b));
        found
    }
}

/// Visits the `k`-subsets of `pool` in lexicographic order until `visit`
/// returns false. `pool` must be sorted, and so is every visited subset.
pub(crate) fn for_each_combination<T: Copy>(
    pool: &[T],
    k: usize,
    visit: &mut dyn FnMut(&[T]) -> bool,
) -> bool {
    fn rec<T: Copy>(
        pool: &[T],
        start: usize,
        k: usize,
        current: &mut Vec<T>,
        visit: &mut dyn FnMut(&[T]) -> bool,
    ) -> bool {
        if current.len() == k {
            return visit(current);
        }
        let needed = k - current.len();
        for i in start..=pool.len().saturating_sub(needed) {
            if pool.len() < needed {
                break;
            }
            current.push(pool[i]);
            let go_on = rec(pool, i + 1, k, current, visit);
            current.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    if k > pool.len() {
        return true;
    }
    rec(pool, 0, k, &mut Vec::with_capacity(k), visit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnosis::tests::{build, two_gate};
    use crate::error::Error;

    fn atom(s: &DiagnosisSetting, name: &str) -> Atom {
        s.symbols().get(name).unwrap()
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_combination(&[1, 2, 3, 4], 2, &mut |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
        let mut count = 0;
        for_each_combination(&[1, 2], 0, &mut |c| {
            assert!(c.is_empty());
            count += 1;
            true
        });
        assert_eq!(count, 1);
        for_each_combination(&[1, 2], 3, &mut |_| panic!("no 3-subsets"));
    }

    #[test]
    fn two_gate_verdicts() {
        let s = two_gate(&["a", "!b", "c", "!d"]);
        let (ab_a, ab_o) = (atom(&s, "abA"), atom(&s, "abO"));
        assert!(is_counterfactual_cause(&s, ab_o).unwrap());
        assert!(!is_counterfactual_cause(&s, ab_a).unwrap());
        assert_eq!(is_actual_cause(&s, ab_o).unwrap(), (true, Some(vec![])));
        assert_eq!(is_actual_cause(&s, ab_a).unwrap(), (false, None));
        assert_eq!(responsibility(&s, ab_o).unwrap(), Responsibility::ONE);
        assert_eq!(responsibility(&s, ab_a).unwrap(), Responsibility::ZERO);

        for opts in [
            CauseOptions::default(),
            CauseOptions {
                all_contingencies: true,
                exec: Exec::Sequential,
            },
        ] {
            let direct = full_cause_analysis(&s, opts);
            let via = causes_from_diagnoses(&s, opts);
            assert_eq!(direct, via);
            assert_eq!(direct.len(), 2);
            assert_eq!(direct[0].subject, ab_a);
            assert!(!direct[0].is_actual);
            assert!(direct[1].is_counterfactual);
        }
    }

    #[test]
    fn normal_settings_have_no_causes() {
        let s = two_gate(&["a", "b", "c", "d"]);
        let ab_o = atom(&s, "abO");
        assert!(!is_counterfactual_cause(&s, ab_o).unwrap());
        assert_eq!(is_actual_cause(&s, ab_o).unwrap(), (false, None));
        assert!(causes_from_diagnoses(&s, CauseOptions::default()).is_empty());
        assert!(full_cause_analysis(&s, CauseOptions::default()).is_empty());
    }

    #[test]
    fn all_exogenous_gives_no_reports() {
        let s = build(&["abA", "abO"], &["abA", "abO"], &crate::diagnosis::tests::TWO_GATE, &["a"]);
        assert!(full_cause_analysis(&s, CauseOptions::default()).is_empty());
    }

    #[test]
    fn invalid_subjects() {
        let s = build(&["abA", "abO"], &["abA"], &crate::diagnosis::tests::TWO_GATE, &["a", "!d"]);
        assert_eq!(
            is_actual_cause(&s, atom(&s, "abA")),
            Err(Error::ExogenousComponent("abA".into()))
        );
        assert_eq!(
            responsibility(&s, atom(&s, "x")),
            Err(Error::UnknownComponent("x".into()))
        );
    }

    #[test]
    fn contingency_with_two_atoms() {
        // Output o is an OR of three buffers; all three must be broken to
        // explain o = 0 with every input 1.
        let s = build(
            &["g1", "g2", "g3"],
            &[],
            &["!g1 -> (w1 <-> i1)", "!g2 -> (w2 <-> i2)", "!g3 -> (w3 <-> i3)", "o <-> w1 | w2 | w3"],
            &["i1", "i2", "i3", "!o"],
        );
        let opts = CauseOptions {
            all_contingencies: true,
            exec: Exec::Sequential,
        };
        let direct = full_cause_analysis(&s, opts);
        assert_eq!(direct, causes_from_diagnoses(&s, opts));
        for report in &direct {
            assert!(report.is_actual && !report.is_counterfactual);
            assert_eq!(report.responsibility, Responsibility { num: 1, den: 3 });
            assert_eq!(report.min_contingency.as_ref().unwrap().len(), 2);
        }
    }

    #[test]
    fn responsibility_display() {
        assert_eq!(Responsibility::from_contingency_size(2).to_string(), "1/3");
        assert_eq!(Responsibility::ZERO.to_string(), "0/1");
    }
}
