//! Diagnosis settings ⟨components, model, observation⟩ and their minimal
//! conflicts and minimal/minimum diagnoses.
//!
//! Minimal diagnoses are the minimal hitting sets of the minimal conflicts.
//! They are enumerated breadth-first with a hitting-set tree whose node labels
//! are minimal conflicts, discovered lazily: a node whose path hits every known
//! conflict issues one SAT probe assuming `!ab` for every endogenous component
//! off the path (path components are left unconstrained). An unsatisfiable
//! probe yields a core, shrunk to a minimal conflict before it is used as a
//! label. Since labels are always minimal, superset pruning and node merging
//! are sound without further correction.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::logic::{to_cnf, Atom, CnfProblem, Formula, Literal, Symbols};
use crate::sat::{SatResult, Solver};

#[derive(Debug, Clone)]
pub struct DiagnosisSetting {
    symbols: Symbols,
    components: Vec<Atom>,
    exogenous: BTreeSet<Atom>,
    model: Vec<Formula>,
    observation: Vec<Literal>,
    cnf: CnfProblem,
}

impl DiagnosisSetting {
    pub fn new(
        symbols: Symbols,
        components: Vec<Atom>,
        exogenous: impl IntoIterator<Item = Atom>,
        model: Vec<Formula>,
        observation: Vec<Literal>,
    ) -> Result<Self> {
        let exogenous: BTreeSet<Atom> = exogenous.into_iter().collect();
        let in_range = |a: Atom| a.index() < symbols.len();
        let mut seen = BTreeSet::new();
        for &c in &components {
            if !in_range(c) {
                return Err(Error::InvalidSetting(format!("component #{} is undeclared", c.index())));
            }
            if !seen.insert(c) {
                return Err(Error::InvalidSetting(format!(
                    "component `{}` listed twice",
                    symbols.name(c)
                )));
            }
        }
        if let Some(&x) = exogenous.iter().find(|x| !seen.contains(x)) {
            return Err(Error::InvalidSetting(format!(
                "exogenous atom `{}` is not a component",
                if in_range(x) { symbols.name(x).to_string() } else { format!("#{}", x.index()) }
            )));
        }
        for f in &model {
            if let Some(a) = f.atoms().into_iter().find(|&a| !in_range(a)) {
                return Err(Error::InvalidSetting(format!("model mentions undeclared atom #{}", a.index())));
            }
        }
        for lit in &observation {
            if !in_range(lit.atom()) {
                return Err(Error::InvalidSetting("observation mentions an undeclared atom".into()));
            }
            if seen.contains(&lit.atom()) {
                return Err(Error::InvalidSetting(format!(
                    "observation mentions abnormality atom `{}`",
                    symbols.name(lit.atom())
                )));
            }
        }

        let mut cnf = to_cnf(&model, &symbols);
        for &lit in &observation {
            cnf.add_clause([lit]);
        }
        for &x in &exogenous {
            cnf.add_clause([Literal::neg(x)]);
        }
        Ok(DiagnosisSetting {
            symbols,
            components,
            exogenous,
            model,
            observation,
            cnf,
        })
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn components(&self) -> &[Atom] {
        &self.components
    }

    pub fn exogenous(&self) -> &BTreeSet<Atom> {
        &self.exogenous
    }

    pub fn model(&self) -> &[Formula] {
        &self.model
    }

    pub fn observation(&self) -> &[Literal] {
        &self.observation
    }

    /// Clauses for `M ∪ Obs` plus `!ab` for every exogenous component.
    pub fn cnf(&self) -> &CnfProblem {
        &self.cnf
    }

    pub fn is_component(&self, atom: Atom) -> bool {
        self.components.contains(&atom)
    }

    /// Components open to intervention, in ascending atom order.
    pub fn endogenous(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self
            .components
            .iter()
            .copied()
            .filter(|c| !self.exogenous.contains(c))
            .collect();
        out.sort();
        out
    }

    pub fn name(&self, atom: Atom) -> &str {
        self.symbols.name(atom)
    }

    /// True when every formula is either free of abnormality atoms or of the
    /// form `!ab1 & ... & !abk -> φ` with `φ` free of abnormality atoms.
    /// Diagnoses of such models are closed under supersets.
    pub fn is_weak_model(&self) -> bool {
        let ab_free = |f: &Formula| !self.components.iter().any(|&c| f.mentions(c));
        self.model.iter().all(|f| {
            if ab_free(f) {
                return true;
            }
            match f {
                Formula::Implies(guard, body) => ab_free(body) && self.is_normality_guard(guard),
                _ => false,
            }
        })
    }

    fn is_normality_guard(&self, f: &Formula) -> bool {
        match f {
            Formula::And(a, b) => self.is_normality_guard(a) && self.is_normality_guard(b),
            Formula::Not(inner) => matches!(**inner, Formula::Atom(a) if self.is_component(a)),
            _ => false,
        }
    }

    pub(crate) fn check_endogenous(&self, atom: Atom) -> Result<()> {
        if !self.is_component(atom) {
            let name = if atom.index() < self.symbols.len() {
                self.symbols.name(atom).to_string()
            } else {
                format!("#{}", atom.index())
            };
            return Err(Error::UnknownComponent(name));
        }
        if self.exogenous.contains(&atom) {
            return Err(Error::ExogenousComponent(self.symbols.name(atom).to_string()));
        }
        Ok(())
    }

    /// Canonical (sorted, deduplicated) form of a component set after
    /// validation.
    pub(crate) fn canonical_set(&self, atoms: &[Atom]) -> Result<Vec<Atom>> {
        for &a in atoms {
            self.check_endogenous(a)?;
        }
        let mut v = atoms.to_vec();
        v.sort();
        v.dedup();
        Ok(v)
    }

    pub fn names(&self, atoms: &[Atom]) -> Vec<String> {
        atoms.iter().map(|&a| self.name(a).to_string()).collect()
    }
}

/// A set of abnormality atoms whose abnormality restores consistency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnosis {
    pub atoms: Vec<Atom>,
    pub minimal: bool,
    pub minimum: bool,
}

/// A set of negative abnormality literals inconsistent with `M ∪ Obs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Conflict {
    pub literals: Vec<Literal>,
    pub minimal: bool,
}

impl Conflict {
    pub fn atoms(&self) -> Vec<Atom> {
        self.literals.iter().map(|l| l.atom()).collect()
    }
}

/// Orders component sets by size, then lexicographically by atom index.
pub fn canonical_cmp(a: &[Atom], b: &[Atom]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub(crate) fn sort_canonical(sets: &mut [Vec<Atom>]) {
    sets.sort_by(|a, b| canonical_cmp(a, b));
}

fn is_subset(small: &[Atom], big: &[Atom]) -> bool {
    small.iter().all(|a| big.binary_search(a).is_ok())
}

/// Solver wrapper issuing consistency probes against one setting.
pub(crate) struct Prober<'a> {
    setting: &'a DiagnosisSetting,
    endogenous: Vec<Atom>,
    solver: Solver,
}

impl<'a> Prober<'a> {
    pub(crate) fn new(setting: &'a DiagnosisSetting) -> Self {
        Prober {
            setting,
            endogenous: setting.endogenous(),
            solver: Solver::new(setting.cnf()),
        }
    }

    /// `M ∪ Obs ∪ {ab : ab ∈ abnormal} ∪ {!ab : other components}`.
    /// `abnormal` must be sorted.
    pub(crate) fn consistent(&mut self, abnormal: &[Atom]) -> bool {
        let assumptions: Vec<Literal> = self
            .endogenous
            .iter()
            .map(|&c| Literal::new(c, abnormal.binary_search(&c).is_ok()))
            .collect();
        self.solver.solve(&assumptions).is_sat()
    }

    /// Probe leaving the atoms of `free` unconstrained and assuming every other
    /// endogenous component normal. `free` must be sorted.
    fn probe_free(&mut self, free: &[Atom]) -> SatResult {
        let assumptions: Vec<Literal> = self
            .endogenous
            .iter()
            .filter(|c| free.binary_search(c).is_err())
            .map(|&c| Literal::neg(c))
            .collect();
        self.solver.solve(&assumptions)
    }

    /// Probe assuming exactly the components in `normal` are normal, the rest
    /// unconstrained.
    fn probe_normal(&mut self, normal: &[Atom]) -> SatResult {
        let assumptions: Vec<Literal> = normal.iter().map(|&c| Literal::neg(c)).collect();
        self.solver.solve(&assumptions)
    }

    fn shrink(&mut self, core: &[Literal]) -> Vec<Atom> {
        let minimal = self
            .solver
            .minimize_core(core)
            .expect("probe core is unsatisfiable");
        minimal.iter().map(|l| l.atom()).collect()
    }

    fn setting(&self) -> &DiagnosisSetting {
        self.setting
    }
}

pub fn is_normal(s: &DiagnosisSetting) -> bool {
    Prober::new(s).consistent(&[])
}

/// Checks `M ∪ Obs ∪ Δ ∪ {!abC : abC ∉ Δ}` for satisfiability.
pub fn is_diagnosis(s: &DiagnosisSetting, delta: &[Atom]) -> Result<bool> {
    let delta = s.canonical_set(delta)?;
    Ok(Prober::new(s).consistent(&delta))
}

pub fn minimal_conflicts(s: &DiagnosisSetting) -> Vec<Conflict> {
    minimal_conflicts_with(s, Exec::default())
}

/// Enumerates all minimal conflicts breadth-first over sets of normality
/// assumptions. A satisfiable node is expanded along a minimal correction
/// set of its model: every conflict extending the node must contain one of
/// those components.
pub fn minimal_conflicts_with(s: &DiagnosisSetting, exec: Exec) -> Vec<Conflict> {
    let endogenous = s.endogenous();
    let mut found: Vec<Vec<Atom>> = Vec::new();
    let mut level: Vec<Vec<Atom>> = vec![Vec::new()];

    while !level.is_empty() {
        let outcomes = exec.map_init(
            &level,
            || Prober::new(s),
            |prober, node| match prober.probe_normal(node) {
                SatResult::Unsat(_) => None,
                SatResult::Sat(model) => {
                    // Grow the normal set greedily to a maximal consistent one.
                    let mut normal = node.clone();
                    let mut abnormal: Vec<Atom> = endogenous
                        .iter()
                        .copied()
                        .filter(|c| node.binary_search(c).is_err() && model.get(*c) == Some(true))
                        .collect();
                    let mut extra: Vec<Atom> = endogenous
                        .iter()
                        .copied()
                        .filter(|c| node.binary_search(c).is_err() && model.get(*c) != Some(true))
                        .collect();
                    normal.append(&mut extra);
                    normal.sort();
                    let candidates = abnormal.clone();
                    for c in candidates {
                        let mut trial = normal.clone();
                        trial.push(c);
                        trial.sort();
                        if prober.probe_normal(&trial).is_sat() {
                            normal = trial;
                            abnormal.retain(|&x| x != c);
                        }
                    }
                    Some(abnormal)
                }
            },
        );

        let mut next: BTreeSet<Vec<Atom>> = BTreeSet::new();
        let mut leaves = Vec::new();
        for (node, outcome) in level.iter().zip(&outcomes) {
            if outcome.is_none() {
                leaves.push(node.clone());
            }
        }
        found.extend(leaves);
        for (node, outcome) in level.iter().zip(outcomes) {
            if let Some(correction) = outcome {
                for c in correction {
                    let mut child = node.clone();
                    child.push(c);
                    child.sort();
                    if !found.iter().any(|f| is_subset(f, &child)) {
                        next.insert(child);
                    }
                }
            }
        }
        level = next.into_iter().collect();
    }

    sort_canonical(&mut found);
    let verified = exec.map_init(
        &found,
        || Prober::new(s),
        |prober, conflict| {
            (0..conflict.len()).all(|i| {
                let mut rest = conflict.clone();
                rest.remove(i);
                prober.probe_normal(&rest).is_sat()
            })
        },
    );
    found
        .into_iter()
        .zip(verified)
        .map(|(atoms, minimal)| Conflict {
            literals: atoms.into_iter().map(Literal::neg).collect(),
            minimal,
        })
        .collect()
}

pub fn minimal_diagnoses(s: &DiagnosisSetting) -> Vec<Diagnosis> {
    minimal_diagnoses_with(s, Exec::default())
}

pub fn minimal_diagnoses_with(s: &DiagnosisSetting, exec: Exec) -> Vec<Diagnosis> {
    let mut sets = hitting_set_tree(s, exec);
    sort_canonical(&mut sets);
    let min_len = sets.first().map(Vec::len);
    sets.into_iter()
        .map(|atoms| {
            let minimum = Some(atoms.len()) == min_len;
            Diagnosis {
                atoms,
                minimal: true,
                minimum,
            }
        })
        .collect()
}

pub fn minimum_diagnoses(s: &DiagnosisSetting) -> Vec<Diagnosis> {
    minimum_diagnoses_with(s, Exec::default())
}

pub fn minimum_diagnoses_with(s: &DiagnosisSetting, exec: Exec) -> Vec<Diagnosis> {
    minimal_diagnoses_with(s, exec)
        .into_iter()
        .filter(|d| d.minimum)
        .collect()
}

fn hitting_set_tree(s: &DiagnosisSetting, exec: Exec) -> Vec<Vec<Atom>> {
    let mut conflicts: Vec<Vec<Atom>> = Vec::new();
    let mut found: Vec<Vec<Atom>> = Vec::new();
    let mut level: Vec<Vec<Atom>> = vec![Vec::new()];

    let unhit = |conflicts: &[Vec<Atom>], node: &[Atom]| -> Option<usize> {
        conflicts
            .iter()
            .position(|c| !c.iter().any(|a| node.binary_search(a).is_ok()))
    };

    while !level.is_empty() {
        let to_probe: Vec<Vec<Atom>> = level
            .iter()
            .filter(|node| unhit(&conflicts, node).is_none())
            .cloned()
            .collect();
        let probed = exec.map_init(
            &to_probe,
            || Prober::new(s),
            |prober, node| match prober.probe_free(node) {
                SatResult::Sat(_) => None,
                SatResult::Unsat(core) => Some(prober.shrink(&core)),
            },
        );
        for conflict in probed.into_iter().flatten() {
            if conflict.is_empty() {
                // M ∪ Obs is inconsistent on its own: nothing can be hit.
                return Vec::new();
            }
            if !conflicts.contains(&conflict) {
                conflicts.push(conflict);
            }
        }
        conflicts.sort_by(|a, b| canonical_cmp(a, b));

        let mut expand = Vec::new();
        for node in &level {
            match unhit(&conflicts, node) {
                None => found.push(node.clone()),
                Some(label) => expand.push((node, label)),
            }
        }
        let mut next: BTreeSet<Vec<Atom>> = BTreeSet::new();
        for (node, label) in expand {
            for &c in &conflicts[label] {
                let mut child = node.clone();
                child.push(c);
                child.sort();
                if !found.iter().any(|f| is_subset(f, &child)) {
                    next.insert(child);
                }
            }
        }
        level = next.into_iter().collect();
    }
    debug_assert!({
        let mut prober = Prober::new(s);
        found.iter().all(|d| prober.consistent(d)) || prober.setting().components().is_empty()
    });
    found
}
