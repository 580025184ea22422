//! Text formats for models, circuits, truth tables, databases and queries.
//!
//! All formats are line based, `#` starts a comment, and a line of the form
//! `name:` opens a section (anything after the colon belongs to it). In
//! formats with unlabelled lines (tables, databases, queries) such a header
//! line stands alone and the following lines are unlabelled again.
//! Errors carry the 1-based line and column of the offending text.
//!
//! Model file:
//!
//! ```text
//! ab: abA, abO
//! exo:
//! model:
//!   !abA -> (x <-> (a & b))
//!   !abO -> (d <-> (x | c))
//! obs: a, !b, c, !d
//! ```
//!
//! Circuit file: `features:` list, `output:` atom, `defs:` block of
//! `atom <-> formula` lines, each over features and earlier definitions.
//! Table file: `arity: N`, then `bits label` rows; rows not listed have
//! label 0. Database file: ground atoms, plus optional `exo:` lines. Query
//! file: comma-separated body atoms, plus optional `exo:` lines.

use std::collections::BTreeMap;

use crate::classifier::{CircuitClassifier, TableClassifier};
use crate::dbcause::{parse_fact_list, parse_query, ConjunctiveQuery, Database, Fact, QueryAtom};
use crate::diagnosis::DiagnosisSetting;
use crate::error::{Error, Result};
use crate::logic::{is_valid_name, parse_at, Atom, Formula, Literal, Symbols};

/// A non-blank piece of text with its position.
#[derive(Debug, Clone, Copy)]
struct Item<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

#[derive(Debug)]
struct Section<'a> {
    name: &'a str,
    items: Vec<Item<'a>>,
}

/// Splits `text` into sections. Lines before the first header go to
/// `default`, or are rejected when there is none.
fn sections<'a>(text: &'a str, allowed: &[&'a str], default: Option<&'a str>) -> Result<Vec<Section<'a>>> {
    let mut out: Vec<Section<'a>> = Vec::new();
    if let Some(name) = default {
        out.push(Section { name, items: Vec::new() });
    }
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let trimmed = content.trim_start();
        let header = trimmed
            .split_once(':')
            .filter(|(name, _)| !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        if let Some((name, rest)) = header {
            let Some(&name) = allowed.iter().find(|&&a| a == name) else {
                return Err(Error::syntax(line, lead + 1, format!("unknown section `{name}`")));
            };
            let mut section = Section { name, items: Vec::new() };
            let inline = !rest.trim().is_empty();
            if inline {
                let offset = lead + name.len() + 1;
                section.items.push(item(line, offset, rest));
            }
            out.push(section);
            // With a default section, a header carrying its own content
            // covers that line only.
            if let (true, Some(name)) = (inline, default) {
                out.push(Section { name, items: Vec::new() });
            }
            continue;
        }
        match out.last_mut() {
            Some(section) => section.items.push(item(line, 0, content)),
            None => {
                return Err(Error::syntax(
                    line,
                    lead + 1,
                    format!("expected a section header ({})", allowed.join(", ")),
                ))
            }
        }
    }
    Ok(out)
}

fn item(line: usize, offset: usize, text: &str) -> Item<'_> {
    let lead = text.len() - text.trim_start().len();
    Item {
        line,
        column: offset + lead + 1,
        text: text.trim(),
    }
}

/// Items of every section called `name`, in file order.
fn items<'a>(secs: &[Section<'a>], name: &str) -> Vec<Item<'a>> {
    secs.iter().filter(|s| s.name == name).flat_map(|s| s.items.iter().copied()).collect()
}

/// Names separated by commas or whitespace.
fn words(it: Item<'_>) -> Vec<Item<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in it.text.char_indices().chain([(it.text.len(), ' ')]) {
        let sep = c == ',' || c.is_whitespace();
        match (start, sep) {
            (None, false) => start = Some(i),
            (Some(s), true) => {
                out.push(Item {
                    line: it.line,
                    column: it.column + s,
                    text: &it.text[s..i],
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn name_at(w: Item<'_>) -> Result<&str> {
    if is_valid_name(w.text) {
        Ok(w.text)
    } else {
        Err(Error::syntax(w.line, w.column, format!("invalid atom name `{}`", w.text)))
    }
}

/// Pieces between commas, with positions; empty pieces are errors.
fn comma_pieces(it: Item<'_>) -> Result<Vec<Item<'_>>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in it.text.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        if piece.trim().is_empty() {
            return Err(Error::syntax(it.line, it.column + offset, "empty list entry"));
        }
        out.push(Item {
            line: it.line,
            column: it.column + offset + lead,
            text: piece.trim(),
        });
        offset += piece.len() + 1;
    }
    Ok(out)
}

pub fn parse_model(text: &str) -> Result<DiagnosisSetting> {
    let secs = sections(text, &["ab", "exo", "model", "obs"], None)?;
    let mut symbols = Symbols::new();
    let mut components = Vec::new();
    for w in items(&secs, "ab").into_iter().flat_map(words) {
        let atom = symbols.declare(name_at(w)?)?;
        if components.contains(&atom) {
            return Err(Error::syntax(w.line, w.column, format!("component `{}` listed twice", w.text)));
        }
        components.push(atom);
    }
    let mut exogenous = Vec::new();
    for w in items(&secs, "exo").into_iter().flat_map(words) {
        match symbols.get(name_at(w)?) {
            Some(a) => exogenous.push(a),
            None => {
                return Err(Error::syntax(
                    w.line,
                    w.column,
                    format!("exogenous atom `{}` is not listed under ab:", w.text),
                ))
            }
        }
    }
    let mut declare = |name: &str| symbols.declare(name).ok();
    let mut model = Vec::new();
    for it in items(&secs, "model") {
        model.push(parse_at(it.text, it.line, it.column, &mut declare)?);
    }
    let mut observation = Vec::new();
    for it in items(&secs, "obs") {
        for piece in comma_pieces(it)? {
            let lit = match parse_at(piece.text, piece.line, piece.column, &mut declare)? {
                Formula::Atom(a) => Literal::pos(a),
                Formula::Not(inner) => match *inner {
                    Formula::Atom(a) => Literal::neg(a),
                    _ => return Err(Error::syntax(piece.line, piece.column, "observation must be a literal")),
                },
                _ => return Err(Error::syntax(piece.line, piece.column, "observation must be a literal")),
            };
            observation.push(lit);
        }
    }
    DiagnosisSetting::new(symbols, components, exogenous, model, observation)
}

pub fn parse_circuit(text: &str) -> Result<CircuitClassifier> {
    let secs = sections(text, &["features", "output", "defs"], None)?;
    let mut symbols = Symbols::new();
    let mut features = Vec::new();
    for w in items(&secs, "features").into_iter().flat_map(words) {
        let name = name_at(w)?;
        if symbols.get(name).is_some() {
            return Err(Error::syntax(w.line, w.column, format!("feature `{name}` listed twice")));
        }
        features.push(symbols.declare(name)?);
    }
    if features.is_empty() {
        return Err(Error::syntax(1, 1, "circuit declares no features"));
    }
    let mut definitions: Vec<(Atom, Formula)> = Vec::new();
    for it in items(&secs, "defs") {
        let Some((lhs, body)) = it.text.split_once("<->") else {
            return Err(Error::syntax(it.line, it.column, "expected `atom <-> formula`"));
        };
        let name = lhs.trim();
        if !is_valid_name(name) {
            return Err(Error::syntax(it.line, it.column, format!("invalid atom name `{name}`")));
        }
        if symbols.get(name).is_some() {
            return Err(Error::syntax(it.line, it.column, format!("`{name}` is already defined")));
        }
        let body_col = it.column + lhs.len() + 3;
        let f = parse_at(body, it.line, body_col, &mut |n: &str| symbols.get(n))?;
        definitions.push((symbols.declare(name)?, f));
    }
    let outputs = items(&secs, "output");
    let [out] = outputs.as_slice() else {
        return Err(Error::syntax(
            outputs.get(1).map_or(1, |o| o.line),
            1,
            "expected exactly one output atom",
        ));
    };
    let output = match symbols.get(out.text) {
        Some(a) if definitions.iter().any(|(d, _)| *d == a) => a,
        _ => {
            return Err(Error::syntax(
                out.line,
                out.column,
                format!("output `{}` has no definition", out.text),
            ))
        }
    };
    CircuitClassifier::new(symbols, features, output, definitions)
}

pub fn parse_table(text: &str) -> Result<TableClassifier> {
    let secs = sections(text, &["arity"], Some("rows"))?;
    let header = items(&secs, "arity");
    let [arity_item] = header.as_slice() else {
        return Err(Error::syntax(1, 1, "expected one `arity: N` header"));
    };
    let arity: usize = arity_item
        .text
        .parse()
        .map_err(|_| Error::syntax(arity_item.line, arity_item.column, "arity must be a non-negative integer"))?;
    if let Some(early) = secs[0].items.first() {
        return Err(Error::syntax(early.line, early.column, "rows must follow the arity header"));
    }
    let mut labels: BTreeMap<Vec<bool>, bool> = BTreeMap::new();
    for it in items(&secs, "rows") {
        let (bits_text, label_text) = it
            .text
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| Error::syntax(it.line, it.column, "expected `bits label`"))?;
        let bits = bits_text
            .chars()
            .filter(|&c| c != ',' && !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::syntax(it.line, it.column, format!("invalid bit `{c}`"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if bits.len() != arity {
            return Err(Error::syntax(
                it.line,
                it.column,
                format!("row has {} bits, arity is {arity}", bits.len()),
            ));
        }
        let label = match label_text.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::syntax(
                    it.line,
                    it.column + bits_text.len() + 1,
                    format!("label must be 0 or 1, found `{other}`"),
                ))
            }
        };
        if labels.insert(bits, label).is_some_and(|prev| prev != label) {
            return Err(Error::syntax(it.line, it.column, "row listed with both labels"));
        }
    }
    TableClassifier::new(arity, labels.into_iter().filter(|(_, l)| *l).map(|(b, _)| b))
}

fn exo_facts<'a>(secs: &[Section<'a>]) -> Result<Vec<(Item<'a>, Fact)>> {
    let mut out = Vec::new();
    for it in items(secs, "exo") {
        for f in parse_fact_list(it.text, it.line, it.column)? {
            out.push((it, f));
        }
    }
    Ok(out)
}

/// Database file; `exo:` lines must name facts of the database.
pub fn parse_database(text: &str) -> Result<Database> {
    let secs = sections(text, &["exo"], Some("facts"))?;
    let mut facts = Vec::new();
    for it in items(&secs, "facts") {
        facts.extend(parse_fact_list(it.text, it.line, it.column)?);
    }
    let db = Database::new(facts)?;
    let exo = exo_facts(&secs)?;
    check_exogenous(&db, &exo)?;
    db.with_exogenous(exo.into_iter().map(|(_, f)| f))
}

/// Query file: body atoms (possibly over several lines) and the facts its
/// `exo:` lines mark as exogenous.
pub fn parse_query_file(text: &str) -> Result<(ConjunctiveQuery, Vec<Fact>)> {
    let secs = sections(text, &["exo"], Some("query"))?;
    let mut body: Vec<QueryAtom> = Vec::new();
    for it in items(&secs, "query") {
        let text = it.text.strip_suffix(',').unwrap_or(it.text);
        body.extend(parse_query(text, it.line, it.column)?.body().iter().cloned());
    }
    let q = ConjunctiveQuery::new(body)?;
    Ok((q, exo_facts(&secs)?.into_iter().map(|(_, f)| f).collect()))
}

fn check_exogenous(db: &Database, exo: &[(Item<'_>, Fact)]) -> Result<()> {
    match exo.iter().find(|(_, f)| db.id_of(f).is_none()) {
        Some((it, f)) => Err(Error::syntax(
            it.line,
            it.column,
            format!("exogenous tuple `{f}` is not in the database"),
        )),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Entity;
    use crate::diagnosis::{is_diagnosis, minimal_diagnoses};

    const TWO_GATE: &str = "\
# two gates in series
ab: abA, abO
model:
  !abA -> (x <-> (a & b))
  !abO -> (d <-> (x | c))
obs: a, !b, c, !d
";

    #[test]
    fn model_file() {
        let s = parse_model(TWO_GATE).unwrap();
        assert_eq!(s.names(s.components()), ["abA", "abO"]);
        let ds = minimal_diagnoses(&s);
        assert_eq!(s.names(&ds[0].atoms), ["abO"]);
        let abo = s.symbols().get("abO").unwrap();
        assert!(is_diagnosis(&s, &[abo]).unwrap());
        let with_exo = parse_model(&format!("{TWO_GATE}exo: abO\n")).unwrap();
        assert_eq!(with_exo.exogenous().len(), 1);
    }

    #[test]
    fn model_errors_name_lines() {
        let err = parse_model("ab: abA\nmodel:\n  abA & (\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }), "{err}");
        let err = parse_model("ab: abA\nexo: abB\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 6, .. }), "{err}");
        let err = parse_model("ab: abA\nobs: a & b\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 6, .. }), "{err}");
        let err = parse_model("bogus: x\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }), "{err}");
        let err = parse_model("x & y\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }), "{err}");
        let err = parse_model("ab: abA, abA\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, column: 10, .. }), "{err}");
    }

    const FIG5: &str = "\
features: x1, x2, x3, x4
output: O
defs:
  y <-> !x2
  x <-> y & x3 & x4
  z <-> x2 | x
  O <-> x1 & z
";

    #[test]
    fn circuit_file() {
        let c = parse_circuit(FIG5).unwrap();
        assert!(!c.classify(&Entity::parse("1,0,1,0").unwrap()).unwrap());
        assert!(c.classify(&Entity::parse("1,1,1,0").unwrap()).unwrap());
        let err = parse_circuit("features: a\noutput: o\ndefs:\n  o <-> a & q\n").unwrap_err();
        assert_eq!(
            err,
            Error::UndeclaredAtom {
                name: "q".into(),
                line: 4,
                column: 13
            }
        );
        let err = parse_circuit("features: a\noutput: p\ndefs:\n  o <-> a\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err}");
        let err = parse_circuit("features: a\noutput: o\ndefs:\n  o = a\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 4, .. }), "{err}");
    }

    #[test]
    fn table_file() {
        let t = parse_table("arity: 4\n0001 1\n1110 1\n1001 0\n").unwrap();
        assert_eq!(t.positives().len(), 2);
        assert!(!t.classify(&Entity::parse("1,0,0,1").unwrap()).unwrap());
        let t2 = parse_table("arity: 4\n0,0,0,1 1\n").unwrap();
        assert_eq!(t2.positives().len(), 1);
        assert!(matches!(parse_table("arity: 3\n0001 1\n"), Err(Error::Syntax { line: 2, .. })));
        assert!(matches!(parse_table("arity: 2\n01 2\n"), Err(Error::Syntax { line: 2, column: 4, .. })));
        assert!(matches!(parse_table("arity: 2\n01 1\n01 0\n"), Err(Error::Syntax { line: 3, .. })));
        assert!(matches!(parse_table("01 1\n"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn database_and_query_files() {
        let db = parse_database("R(c,b)\nR(a,d)\nS(a), S(b)\n# comment\nexo: S(a)\n").unwrap();
        assert_eq!(db.len(), 4);
        assert_eq!(db.exogenous().len(), 1);
        let err = parse_database("R(a,b)\nexo: R(b,a)\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 6, .. }), "{err}");
        assert!(matches!(parse_database("R(a,\n"), Err(Error::Syntax { line: 1, .. })));
        let (q, exo) = parse_query_file("S(X), R(X,Y),\nS(Y)\nexo: S(b)\n").unwrap();
        assert_eq!(q.to_string(), "S(X), R(X,Y), S(Y)");
        assert_eq!(exo, vec![Fact::new("S", ["b"])]);
    }
}
