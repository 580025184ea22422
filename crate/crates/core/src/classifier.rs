//! Explanations for boolean classifiers.
//!
//! White-box circuits are reduced to a diagnosis setting: each feature gets an
//! abnormality atom whose truth flips the feature's observed value, and the
//! observation asks for the complement of the produced label. Causes are then
//! read off the minimal diagnoses. Black-box classifiers (truth tables or any
//! callable) are explained by direct intervention on the entity.

use std::collections::BTreeSet;

use crate::causality::{causes_from_diagnoses, for_each_combination, Cause, CauseOptions};
use crate::diagnosis::{minimal_diagnoses_with, DiagnosisSetting};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::logic::{Assignment, Atom, Formula, Literal, Symbols};

/// Cause verdict keyed by feature position.
pub type FeatureCause = Cause<usize>;

/// Anything that maps a fixed-width bit vector to a label.
pub trait BooleanClassifier: Sync {
    fn arity(&self) -> usize;

    fn label(&self, bits: &[bool]) -> bool;

    fn feature_name(&self, i: usize) -> String {
        format!("x{}", i + 1)
    }
}

/// An input entity: one value per feature, in feature order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    pub values: Vec<bool>,
}

impl Entity {
    pub fn new(values: Vec<bool>) -> Self {
        Entity { values }
    }

    /// Parses comma-separated bits such as `1,0,1,0`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .enumerate()
            .map(|(i, part)| match part.trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::syntax(1, i + 1, format!("expected 0 or 1, found `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Entity { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy of the entity with the features in `flips` inverted.
    pub fn flipped(&self, flips: &[usize]) -> Vec<bool> {
        let mut bits = self.values.clone();
        for &i in flips {
            bits[i] = !bits[i];
        }
        bits
    }

    fn check_arity(&self, arity: usize) -> Result<()> {
        if self.values.len() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// A circuit given by biconditional definitions `atom <-> body`, each body
/// over features and previously defined atoms.
#[derive(Debug, Clone)]
pub struct CircuitClassifier {
    symbols: Symbols,
    features: Vec<Atom>,
    output: Atom,
    definitions: Vec<(Atom, Formula)>,
}

impl CircuitClassifier {
    pub fn new(
        symbols: Symbols,
        features: Vec<Atom>,
        output: Atom,
        definitions: Vec<(Atom, Formula)>,
    ) -> Result<Self> {
        let mut known: BTreeSet<Atom> = BTreeSet::new();
        for &f in &features {
            if !known.insert(f) {
                return Err(Error::InvalidClassifier(format!(
                    "feature `{}` listed twice",
                    symbols.name(f)
                )));
            }
        }
        for (atom, body) in &definitions {
            if let Some(undefined) = body.atoms().into_iter().find(|a| !known.contains(a)) {
                return Err(Error::InvalidClassifier(format!(
                    "definition of `{}` uses `{}` before it is defined",
                    symbols.name(*atom),
                    symbols.name(undefined)
                )));
            }
            if !known.insert(*atom) {
                return Err(Error::InvalidClassifier(format!(
                    "`{}` is defined more than once or is a feature",
                    symbols.name(*atom)
                )));
            }
        }
        if !definitions.iter().any(|(a, _)| *a == output) {
            return Err(Error::InvalidClassifier(format!(
                "output `{}` has no definition",
                symbols.name(output)
            )));
        }
        Ok(CircuitClassifier {
            symbols,
            features,
            output,
            definitions,
        })
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn features(&self) -> &[Atom] {
        &self.features
    }

    pub fn output(&self) -> Atom {
        self.output
    }

    pub fn definitions(&self) -> &[(Atom, Formula)] {
        &self.definitions
    }

    /// Forward evaluation of every defined atom.
    pub fn evaluate(&self, e: &Entity) -> Result<Assignment> {
        e.check_arity(self.features.len())?;
        Ok(self.run(&e.values))
    }

    fn run(&self, bits: &[bool]) -> Assignment {
        let mut v = Assignment::new(self.symbols.len());
        for (&f, &b) in self.features.iter().zip(bits) {
            v.set(f, b);
        }
        for (atom, body) in &self.definitions {
            let value = body.eval_with(&|a| v.get(a).unwrap_or(false));
            v.set(*atom, value);
        }
        v
    }

    pub fn classify(&self, e: &Entity) -> Result<bool> {
        Ok(self.evaluate(e)?.get(self.output).unwrap_or(false))
    }

    /// Induced truth table as a [`TableClassifier`].
    pub fn to_table(&self) -> TableClassifier {
        let n = self.features.len();
        let positives = (0..1u64 << n)
            .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|bits| self.label(bits))
            .collect();
        TableClassifier { arity: n, positives }
    }
}

impl BooleanClassifier for CircuitClassifier {
    fn arity(&self) -> usize {
        self.features.len()
    }

    fn label(&self, bits: &[bool]) -> bool {
        self.run(bits).get(self.output).unwrap_or(false)
    }

    fn feature_name(&self, i: usize) -> String {
        self.symbols.name(self.features[i]).to_string()
    }
}

/// Truth table listing the entities labelled 1; everything else is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableClassifier {
    arity: usize,
    positives: BTreeSet<Vec<bool>>,
}

impl TableClassifier {
    pub fn new(arity: usize, positives: impl IntoIterator<Item = Vec<bool>>) -> Result<Self> {
        let positives: BTreeSet<Vec<bool>> = positives.into_iter().collect();
        if let Some(row) = positives.iter().find(|r| r.len() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: row.len(),
            });
        }
        Ok(TableClassifier { arity, positives })
    }

    pub fn positives(&self) -> &BTreeSet<Vec<bool>> {
        &self.positives
    }

    pub fn classify(&self, e: &Entity) -> Result<bool> {
        e.check_arity(self.arity)?;
        Ok(self.positives.contains(&e.values))
    }

    /// The table as a one-gate circuit `O <-> (row1 | row2 | ...)` over
    /// features `x1..xn`.
    pub fn to_circuit(&self) -> CircuitClassifier {
        let mut symbols = Symbols::new();
        let features: Vec<Atom> = (0..self.arity)
            .map(|i| symbols.declare(&self.feature_name(i)).expect("valid feature name"))
            .collect();
        let body = Formula::disj(self.positives.iter().map(|row| {
            Formula::conj(
                features
                    .iter()
                    .zip(row)
                    .map(|(&f, &b)| Formula::from(Literal::new(f, b))),
            )
        }));
        let output = symbols.declare("O").expect("valid name");
        CircuitClassifier::new(symbols, features, output, vec![(output, body)]).expect("acyclic by construction")
    }
}

impl BooleanClassifier for TableClassifier {
    fn arity(&self) -> usize {
        self.arity
    }

    fn label(&self, bits: &[bool]) -> bool {
        self.positives.contains(bits)
    }
}

/// Adapter for a closure oracle.
pub struct FnClassifier<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(&[bool]) -> bool + Sync> FnClassifier<F> {
    pub fn new(arity: usize, f: F) -> Self {
        FnClassifier { arity, f }
    }
}

impl<F: Fn(&[bool]) -> bool + Sync> BooleanClassifier for FnClassifier<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn label(&self, bits: &[bool]) -> bool {
        (self.f)(bits)
    }
}

/// How abnormality of a feature is tied to its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailureEncoding {
    /// `!ab(x) <-> ℓ`, where `ℓ` is `x` or `!x` according to the entity.
    #[default]
    DoubleImplication,
    /// `!ab(x) -> ℓ` only, together with the modified notion of diagnosis
    /// that also inverts the inputs of abnormal features; the inversion is
    /// compiled into the model as `ab(x) -> !ℓ`.
    WeakWithInversion,
}

/// Diagnosis setting for a circuit whose output should have been `desired`.
#[derive(Debug, Clone)]
pub struct FailureModel {
    pub setting: DiagnosisSetting,
    /// Abnormality atom of each feature, in feature order.
    pub ab_atoms: Vec<Atom>,
}

impl FailureModel {
    pub fn feature_of(&self, ab: Atom) -> usize {
        self.ab_atoms
            .iter()
            .position(|&a| a == ab)
            .expect("abnormality atom of a feature")
    }
}

pub fn build_failure_model(
    c: &CircuitClassifier,
    e: &Entity,
    desired: bool,
    encoding: FailureEncoding,
) -> Result<FailureModel> {
    if c.classify(e)? == desired {
        return Err(Error::NoExplanationNeeded);
    }
    let mut symbols = c.symbols.clone();
    let mut ab_atoms = Vec::with_capacity(c.features.len());
    for &f in &c.features {
        let mut name = format!("ab_{}", c.symbols.name(f));
        while symbols.get(&name).is_some() {
            name.push('_');
        }
        ab_atoms.push(symbols.declare(&name)?);
    }
    let mut model: Vec<Formula> = c
        .definitions
        .iter()
        .map(|(atom, body)| Formula::iff(*atom, body.clone()))
        .collect();
    for ((&f, &ab), &value) in c.features.iter().zip(&ab_atoms).zip(&e.values) {
        let observed = Literal::new(f, value);
        match encoding {
            FailureEncoding::DoubleImplication => {
                model.push(Formula::iff(Formula::not(ab), observed));
            }
            FailureEncoding::WeakWithInversion => {
                model.push(Formula::implies(Formula::not(ab), observed));
                model.push(Formula::implies(ab, !observed));
            }
        }
    }
    let observation = vec![Literal::new(c.output, desired)];
    let setting = DiagnosisSetting::new(symbols, ab_atoms.clone(), [], model, observation)?;
    Ok(FailureModel { setting, ab_atoms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExplainOptions {
    pub causes: CauseOptions,
    pub encoding: FailureEncoding,
}

/// Explanation of a circuit's label through its failure model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitExplanation {
    pub observed: bool,
    pub desired: bool,
    /// Minimal diagnoses as sets of feature positions.
    pub minimal_diagnoses: Vec<Vec<usize>>,
    pub causes: Vec<FeatureCause>,
}

pub fn explain_circuit(c: &CircuitClassifier, e: &Entity, opts: ExplainOptions) -> Result<CircuitExplanation> {
    let observed = c.classify(e)?;
    explain_circuit_towards(c, e, !observed, opts)
}

pub fn explain_circuit_towards(
    c: &CircuitClassifier,
    e: &Entity,
    desired: bool,
    opts: ExplainOptions,
) -> Result<CircuitExplanation> {
    let observed = c.classify(e)?;
    let fm = build_failure_model(c, e, desired, opts.encoding)?;
    let diagnoses = minimal_diagnoses_with(&fm.setting, opts.causes.exec);
    if diagnoses.is_empty() {
        return Err(Error::NoDiagnosis);
    }
    let minimal_diagnoses = diagnoses
        .iter()
        .map(|d| {
            let mut v: Vec<usize> = d.atoms.iter().map(|&a| fm.feature_of(a)).collect();
            v.sort();
            v
        })
        .collect();
    let causes = causes_from_diagnoses(&fm.setting, opts.causes)
        .into_iter()
        .map(|r| r.map_keys(|a| fm.feature_of(a)))
        .collect();
    Ok(CircuitExplanation {
        observed,
        desired,
        minimal_diagnoses,
        causes,
    })
}

/// Direct intervention semantics: `Γ` is a contingency set for feature `i`
/// when flipping `Γ` keeps the label and flipping `Γ ∪ {i}` changes it.
pub fn explain_blackbox<C: BooleanClassifier + ?Sized>(
    c: &C,
    e: &Entity,
    opts: CauseOptions,
) -> Result<Vec<FeatureCause>> {
    e.check_arity(c.arity())?;
    let original = c.label(&e.values);
    let features: Vec<usize> = (0..c.arity()).collect();
    Ok(opts.exec.map(&features, |&i| {
        let changes = |flips: &[usize]| c.label(&e.flipped(flips)) != original;
        let is_contingency = |gamma: &[usize]| {
            let mut with: Vec<usize> = gamma.to_vec();
            with.push(i);
            !changes(gamma) && changes(&with)
        };
        let pool: Vec<usize> = features.iter().copied().filter(|&j| j != i).collect();
        let mut min = None;
        for k in 0..=pool.len() {
            for_each_combination(&pool, k, &mut |gamma| {
                if is_contingency(gamma) {
                    min = Some(gamma.to_vec());
                    return false;
                }
                true
            });
            if min.is_some() {
                break;
            }
        }
        let all = opts.all_contingencies.then(|| {
            let mut found: Vec<Vec<usize>> = Vec::new();
            for k in 0..=pool.len() {
                for_each_combination(&pool, k, &mut |gamma| {
                    let redundant = found.iter().any(|f| f.iter().all(|x| gamma.contains(x)));
                    if !redundant && is_contingency(gamma) {
                        found.push(gamma.to_vec());
                    }
                    true
                });
            }
            found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            found
        });
        Cause::from_contingency(i, min, all)
    }))
}

/// Subset-minimal flip sets that change the label, in canonical order.
pub fn minimal_flip_sets<C: BooleanClassifier + ?Sized>(c: &C, e: &Entity) -> Result<Vec<Vec<usize>>> {
    e.check_arity(c.arity())?;
    let original = c.label(&e.values);
    let features: Vec<usize> = (0..c.arity()).collect();
    let mut found: Vec<Vec<usize>> = Vec::new();
    for k in 0..=features.len() {
        for_each_combination(&features, k, &mut |flips| {
            let redundant = found.iter().any(|f| f.iter().all(|x| flips.contains(x)));
            if !redundant && c.label(&e.flipped(flips)) != original {
                found.push(flips.to_vec());
            }
            true
        });
    }
    Ok(found)
}

/// Explains a circuit by intervention on its induced truth table.
pub fn explain_circuit_blackbox(c: &CircuitClassifier, e: &Entity, exec: Exec) -> Result<Vec<FeatureCause>> {
    explain_blackbox(
        c,
        e,
        CauseOptions {
            all_contingencies: false,
            exec,
        },
    )
}
