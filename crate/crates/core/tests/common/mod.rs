//! Instance generators shared by the integration tests and benchmarks.
#![allow(dead_code)]

use std::path::PathBuf;

use diagcause::classifier::CircuitClassifier;
use diagcause::dbcause::{ConjunctiveQuery, Database, Fact};
use diagcause::diagnosis::DiagnosisSetting;
use diagcause::logic::{Atom, Formula, Literal, Symbols};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[Atom], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..12) {
            0 => Formula::Const(rng.gen()),
            _ => Formula::Atom(*atoms.choose(rng).expect("atoms")),
        };
    }
    let a = random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..6) {
        0 => Formula::not(a),
        1 | 2 => Formula::and(a, random_formula(rng, atoms, depth - 1)),
        3 => Formula::or(a, random_formula(rng, atoms, depth - 1)),
        4 => Formula::implies(a, random_formula(rng, atoms, depth - 1)),
        _ => Formula::iff(a, random_formula(rng, atoms, depth - 1)),
    }
}

/// A weak fault model: every component is described only under normality,
/// `!ab_i -> φ_i` (sometimes with a second normality premise), plus a few
/// ab-free background formulas and an observation over the other atoms.
pub fn random_weak_setting<R: Rng>(rng: &mut R, max_ab: usize, max_other: usize) -> DiagnosisSetting {
    let mut s = Symbols::new();
    let k = rng.gen_range(1..=max_ab);
    let m = rng.gen_range(1..=max_other);
    let ab: Vec<Atom> = (0..k).map(|i| s.declare(&format!("ab{}", i + 1)).unwrap()).collect();
    let other: Vec<Atom> = (0..m).map(|i| s.declare(&format!("v{}", i + 1)).unwrap()).collect();
    let mut model = Vec::new();
    for &a in &ab {
        let mut premise = Formula::not(a);
        if k > 1 && rng.gen_bool(0.2) {
            let b = *ab.choose(rng).unwrap();
            if b != a {
                premise = Formula::and(premise, Formula::not(b));
            }
        }
        model.push(Formula::implies(premise, random_formula(rng, &other, 2)));
    }
    for _ in 0..rng.gen_range(0..=1) {
        model.push(random_formula(rng, &other, 1));
    }
    let mut observed = other.clone();
    observed.shuffle(rng);
    observed.truncate(rng.gen_range(0..=m));
    let observation = observed.into_iter().map(|a| Literal::new(a, rng.gen())).collect();
    let exogenous: Vec<Atom> = ab.iter().copied().filter(|_| rng.gen_bool(0.1)).collect();
    DiagnosisSetting::new(s, ab, exogenous, model, observation).unwrap()
}

/// A random acyclic circuit over `n` features with a few internal gates.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize) -> CircuitClassifier {
    let mut s = Symbols::new();
    let features: Vec<Atom> = (0..n).map(|i| s.declare(&format!("x{}", i + 1)).unwrap()).collect();
    let mut known = features.clone();
    let mut definitions = Vec::new();
    let gates = rng.gen_range(1..=3);
    for g in 0..gates {
        let body = random_formula(rng, &known, 2);
        let name = if g + 1 == gates { "O".to_string() } else { format!("g{g}") };
        let atom = s.declare(&name).unwrap();
        definitions.push((atom, body));
        known.push(atom);
    }
    let output = s.get("O").unwrap();
    CircuitClassifier::new(s, features, output, definitions).unwrap()
}

/// A small database over `R/2` and `S/1` with a random query of one to three
/// atoms; constants come from a domain of `domain` symbols.
pub fn random_database<R: Rng>(rng: &mut R, max_tuples: usize, domain: usize) -> (Database, ConjunctiveQuery) {
    let consts: Vec<String> = (0..domain).map(|i| format!("c{i}")).collect();
    let mut facts = Vec::new();
    for _ in 0..rng.gen_range(1..=max_tuples) {
        let pick = |rng: &mut R| consts.choose(rng).unwrap().clone();
        let f = if rng.gen_bool(0.5) {
            Fact::new("R", [pick(rng), pick(rng)])
        } else {
            Fact::new("S", [pick(rng)])
        };
        facts.push(f);
    }
    let mut d = Database::new(facts).unwrap();
    if rng.gen_bool(0.2) && !d.is_empty() {
        let f = d.fact(rng.gen_range(0..d.len())).clone();
        d = d.with_exogenous([f]).unwrap();
    }
    let vars = ["X", "Y", "Z"];
    let term = |rng: &mut R| {
        if rng.gen_bool(0.85) {
            vars.choose(rng).unwrap().to_string()
        } else {
            consts.choose(rng).unwrap().clone()
        }
    };
    let atoms: Vec<String> = (0..rng.gen_range(1..=3))
        .map(|_| {
            if rng.gen_bool(0.5) {
                format!("R({},{})", term(rng), term(rng))
            } else {
                format!("S({})", term(rng))
            }
        })
        .collect();
    (d, ConjunctiveQuery::parse(&atoms.join(", ")).unwrap())
}

/// `n` AND gates in series, `x_i = x_{i-1} & u_i`, with every input 1 and
/// the final output observed 0. Every single gate is a minimal diagnosis.
pub fn and_chain(n: usize) -> DiagnosisSetting {
    let mut s = Symbols::new();
    let ab: Vec<Atom> = (1..=n).map(|i| s.declare(&format!("ab{i}")).unwrap()).collect();
    let x: Vec<Atom> = (0..=n).map(|i| s.declare(&format!("x{i}")).unwrap()).collect();
    let u: Vec<Atom> = (1..=n).map(|i| s.declare(&format!("u{i}")).unwrap()).collect();
    let model = (0..n)
        .map(|i| Formula::implies(Formula::not(ab[i]), Formula::iff(x[i + 1], Formula::and(x[i], u[i]))))
        .collect();
    let mut observation: Vec<Literal> = u.iter().map(|&a| Literal::pos(a)).collect();
    observation.push(Literal::pos(x[0]));
    observation.push(Literal::neg(x[n]));
    DiagnosisSetting::new(s, ab, [], model, observation).unwrap()
}

/// Database text with 200 tuples of which 60 form 30 witnesses of
/// `S(X), R(X,Y,Z), S(Z)`: three hub constants, each closing ten
/// `R(h,m,h)` loops. The remaining tuples never join.
pub fn scale_database() -> (Database, ConjunctiveQuery) {
    let mut facts = Vec::new();
    for h in 0..3 {
        facts.push(Fact::new("S", [format!("h{h}")]));
        for j in 0..10 {
            facts.push(Fact::new("R", [format!("h{h}"), format!("m{h}_{j}"), format!("h{h}")]));
        }
    }
    let mut k = 0;
    while facts.len() < 200 {
        if k % 2 == 0 {
            facts.push(Fact::new("R", [format!("p{k}"), format!("q{k}"), format!("r{k}")]));
        } else {
            facts.push(Fact::new("S", [format!("s{k}")]));
        }
        k += 1;
    }
    let d = Database::new(facts).unwrap();
    (d, ConjunctiveQuery::parse("S(X), R(X,Y,Z), S(Z)").unwrap())
}

/// Subset-minimal hitting sets by enumeration over `universe`, canonical
/// order.
pub fn minimal_hitting_sets(sets: &[Vec<Atom>], universe: &[Atom]) -> Vec<Vec<Atom>> {
    let n = universe.len();
    let masks: Vec<u32> = sets
        .iter()
        .map(|s| {
            s.iter()
                .map(|a| 1u32 << universe.iter().position(|u| u == a).unwrap())
                .fold(0, |x, y| x | y)
        })
        .collect();
    let hits: Vec<u32> = (0..1u32 << n).filter(|&h| masks.iter().all(|&m| m & h != 0)).collect();
    let mut out: Vec<Vec<Atom>> = hits
        .iter()
        .filter(|&&h| !hits.iter().any(|&g| g != h && g & !h == 0))
        .map(|&h| (0..n).filter(|i| h >> i & 1 == 1).map(|i| universe[i]).collect())
        .collect();
    out.sort_by(|a: &Vec<Atom>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}
