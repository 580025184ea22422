//! Command-line front end.
//!
//! [`run`] takes the argument vector and output streams and returns the exit
//! code: 0 on success (a consistent setting included), 1 for usage and parse
//! errors, 2 for well-formed input that cannot be analysed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::causality::{causes_from_diagnoses, full_cause_analysis, Cause, CauseOptions, Responsibility};
use crate::classifier::{
    explain_blackbox, explain_circuit_towards, minimal_flip_sets, BooleanClassifier, Entity, ExplainOptions,
    FailureEncoding, FeatureCause,
};
use crate::dbcause::{build_denial_setting_with, tuple_causes, Database, TupleCause};
use crate::diagnosis::{is_normal, minimal_diagnoses_with, minimum_diagnoses_with, DiagnosisSetting};
use crate::error::Error;
use crate::exec::Exec;
use crate::files;
use crate::logic::Atom;

#[derive(Debug, Parser)]
#[command(name = "diagcause", version, about = "Diagnoses, actual causes and responsibility scores")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Print the canonical JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Run every search on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal (and optionally minimum-cardinality) diagnoses of a model file.
    Diagnose {
        model: PathBuf,
        /// Report every minimal diagnosis (the default).
        #[arg(long)]
        all_minimal: bool,
        /// Also report the minimum-cardinality diagnoses.
        #[arg(long)]
        minimum: bool,
    },
    /// Actual causes and responsibilities of the abnormality atoms.
    Causes {
        model: PathBuf,
        /// Read causes off the minimal diagnoses instead of searching
        /// contingency sets directly.
        #[arg(long)]
        via_diagnoses: bool,
        /// Also list every subset-minimal contingency set.
        #[arg(long)]
        all_contingencies: bool,
    },
    /// Explain a circuit classifier's label through its failure model.
    ExplainCircuit {
        circuit: PathBuf,
        /// Feature values, e.g. 1,0,1,0.
        #[arg(long)]
        entity: String,
        /// Label to explain the absence of; defaults to the complement of
        /// the produced label.
        #[arg(long, value_parser = ["0", "1"])]
        desired: Option<String>,
        /// Use the weak failure model with input inversion.
        #[arg(long)]
        weak: bool,
        #[arg(long)]
        all_contingencies: bool,
    },
    /// Explain a truth-table classifier's label by intervention.
    ExplainTable {
        table: PathBuf,
        #[arg(long)]
        entity: String,
        #[arg(long)]
        all_contingencies: bool,
    },
    /// Tuple causes for a boolean conjunctive query over a database.
    DbCauses {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        all_contingencies: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Consistent,
    Inconsistent,
}

/// One actual cause. Exactly one of `atom`, `feature` and `tuple` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauseEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
    /// Observed value of the feature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple: Option<String>,
    pub counterfactual: bool,
    pub actual: bool,
    /// A minimum contingency set.
    pub contingency: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_contingencies: Option<Vec<Vec<String>>>,
    pub responsibility: Responsibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    pub minimal_diagnoses: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum_diagnoses: Option<Vec<Vec<String>>>,
    pub causes: Vec<CauseEntry>,
    pub timing_ms: Option<f64>,
}

impl Report {
    fn consistent() -> Self {
        Report {
            status: Status::Consistent,
            minimal_diagnoses: vec![Vec::new()],
            minimum_diagnoses: None,
            causes: Vec::new(),
            timing_ms: None,
        }
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let status = match self.status {
            Status::Consistent => "consistent",
            Status::Inconsistent => "inconsistent",
        };
        s.push_str(&format!("status: {status}\n"));
        let sets = |sets: &[Vec<String>]| -> String {
            sets.iter()
                .map(|d| format!("  {{{}}}\n", d.join(", ")))
                .collect()
        };
        s.push_str("minimal diagnoses:\n");
        s.push_str(&sets(&self.minimal_diagnoses));
        if let Some(min) = &self.minimum_diagnoses {
            s.push_str("minimum diagnoses:\n");
            s.push_str(&sets(min));
        }
        if !self.causes.is_empty() {
            s.push_str("causes:\n");
            for c in &self.causes {
                let subject = match (&c.atom, &c.feature, &c.value, &c.tuple) {
                    (Some(a), _, _, _) => a.clone(),
                    (_, Some(f), Some(v), _) => format!("{f}={v}"),
                    (_, _, _, Some(t)) => t.clone(),
                    _ => String::from("?"),
                };
                let kind = if c.counterfactual { "counterfactual" } else { "actual" };
                s.push_str(&format!(
                    "  {subject}  {kind}  responsibility {}  contingency {{{}}}\n",
                    c.responsibility,
                    c.contingency.join(", ")
                ));
                for g in c.all_contingencies.iter().flatten() {
                    s.push_str(&format!("    minimal contingency {{{}}}\n", g.join(", ")));
                }
            }
        }
        if let Some(ms) = self.timing_ms {
            s.push_str(&format!("time: {ms:.3} ms\n"));
        }
        s
    }
}

enum Failure {
    Usage(String),
    Semantic(String),
}

impl Failure {
    fn in_file(path: &Path, e: Error) -> Self {
        let message = format!("{}: {e}", path.display());
        if e.is_semantic() {
            Failure::Semantic(message)
        } else {
            Failure::Usage(message)
        }
    }

    fn semantic(e: Error) -> Self {
        Failure::Semantic(e.to_string())
    }
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                1
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok(mut report) => {
            if cli.common.timing {
                report.timing_ms = Some(start.elapsed().as_secs_f64() * 1000.0);
            }
            let text = if cli.common.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            match out.write_all(text.as_bytes()) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Semantic(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> crate::Result<T>) -> Result<T, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure::in_file(path, e))
}

fn parse_entity(text: &str) -> Result<Entity, Failure> {
    Entity::parse(text).map_err(|e| Failure::Usage(format!("--entity: {e}")))
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    let exec = if cli.common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match &cli.command {
        Command::Diagnose { model, minimum, .. } => {
            let s = load(model, files::parse_model)?;
            diagnose(&s, *minimum, exec)
        }
        Command::Causes {
            model,
            via_diagnoses,
            all_contingencies,
        } => {
            let s = load(model, files::parse_model)?;
            let opts = CauseOptions {
                all_contingencies: *all_contingencies,
                exec,
            };
            causes(&s, *via_diagnoses, opts)
        }
        Command::ExplainCircuit {
            circuit,
            entity,
            desired,
            weak,
            all_contingencies,
        } => {
            let c = load(circuit, files::parse_circuit)?;
            let e = parse_entity(entity)?;
            let observed = c.classify(&e).map_err(Failure::semantic)?;
            let desired = desired.as_deref().map_or(!observed, |d| d == "1");
            let opts = ExplainOptions {
                causes: CauseOptions {
                    all_contingencies: *all_contingencies,
                    exec,
                },
                encoding: if *weak {
                    FailureEncoding::WeakWithInversion
                } else {
                    FailureEncoding::DoubleImplication
                },
            };
            match explain_circuit_towards(&c, &e, desired, opts) {
                Ok(x) => Ok(feature_report(&c, &e, &x.minimal_diagnoses, &x.causes)),
                Err(Error::NoExplanationNeeded) => Ok(Report::consistent()),
                Err(err) => Err(Failure::semantic(err)),
            }
        }
        Command::ExplainTable {
            table,
            entity,
            all_contingencies,
        } => {
            let t = load(table, files::parse_table)?;
            let e = parse_entity(entity)?;
            let opts = CauseOptions {
                all_contingencies: *all_contingencies,
                exec,
            };
            let causes = explain_blackbox(&t, &e, opts).map_err(Failure::semantic)?;
            let flips = minimal_flip_sets(&t, &e).map_err(Failure::semantic)?;
            if flips.is_empty() {
                return Err(Failure::semantic(Error::NoDiagnosis));
            }
            Ok(feature_report(&t, &e, &flips, &causes))
        }
        Command::DbCauses {
            db,
            query,
            all_contingencies,
        } => {
            let d = load(db, files::parse_database)?;
            let (q, exo) = load(query, files::parse_query_file)?;
            let d = d.with_exogenous(exo).map_err(|e| Failure::in_file(query, e))?;
            let opts = CauseOptions {
                all_contingencies: *all_contingencies,
                exec,
            };
            db_report(&d, &q, opts)
        }
    }
}

fn names(s: &DiagnosisSetting, sets: impl IntoIterator<Item = Vec<Atom>>) -> Vec<Vec<String>> {
    sets.into_iter().map(|d| s.names(&d)).collect()
}

fn diagnose(s: &DiagnosisSetting, minimum: bool, exec: Exec) -> Result<Report, Failure> {
    if is_normal(s) {
        let mut r = Report::consistent();
        if minimum {
            r.minimum_diagnoses = Some(vec![Vec::new()]);
        }
        return Ok(r);
    }
    let minimal = minimal_diagnoses_with(s, exec);
    if minimal.is_empty() {
        return Err(Failure::semantic(Error::NoDiagnosis));
    }
    Ok(Report {
        status: Status::Inconsistent,
        minimal_diagnoses: names(s, minimal.into_iter().map(|d| d.atoms)),
        minimum_diagnoses: minimum.then(|| names(s, minimum_diagnoses_with(s, exec).into_iter().map(|d| d.atoms))),
        causes: Vec::new(),
        timing_ms: None,
    })
}

fn entry<K>(
    c: Cause<K>,
    name: impl Fn(&K) -> String,
    mut subject: CauseEntry,
) -> CauseEntry {
    subject.counterfactual = c.is_counterfactual;
    subject.actual = c.is_actual;
    subject.contingency = c.min_contingency.iter().flatten().map(&name).collect();
    subject.all_contingencies = c
        .all_minimal_contingencies
        .map(|all| all.iter().map(|g| g.iter().map(&name).collect()).collect());
    subject.responsibility = c.responsibility;
    subject
}

fn blank() -> CauseEntry {
    CauseEntry {
        atom: None,
        feature: None,
        value: None,
        tuple: None,
        counterfactual: false,
        actual: false,
        contingency: Vec::new(),
        all_contingencies: None,
        responsibility: Responsibility::ZERO,
    }
}

fn causes(s: &DiagnosisSetting, via_diagnoses: bool, opts: CauseOptions) -> Result<Report, Failure> {
    let mut r = diagnose(s, false, opts.exec)?;
    if r.status == Status::Consistent {
        return Ok(r);
    }
    let reports = if via_diagnoses {
        causes_from_diagnoses(s, opts)
    } else {
        full_cause_analysis(s, opts)
    };
    r.causes = reports
        .into_iter()
        .filter(|c| c.is_actual)
        .map(|c| {
            let atom = s.name(c.subject).to_string();
            entry(c, |a| s.name(*a).to_string(), CauseEntry { atom: Some(atom), ..blank() })
        })
        .collect();
    Ok(r)
}

fn feature_report<C: BooleanClassifier>(
    c: &C,
    e: &Entity,
    flips: &[Vec<usize>],
    causes: &[FeatureCause],
) -> Report {
    let ab = |i: &usize| format!("ab_{}", c.feature_name(*i));
    Report {
        status: Status::Inconsistent,
        minimal_diagnoses: flips.iter().map(|d| d.iter().map(ab).collect()).collect(),
        minimum_diagnoses: None,
        causes: causes
            .iter()
            .filter(|r| r.is_actual)
            .map(|r| {
                let subject = CauseEntry {
                    feature: Some(c.feature_name(r.subject)),
                    value: Some(u8::from(e.values[r.subject])),
                    ..blank()
                };
                entry(r.clone(), |i| c.feature_name(*i), subject)
            })
            .collect(),
        timing_ms: None,
    }
}

fn db_report(d: &Database, q: &crate::dbcause::ConjunctiveQuery, opts: CauseOptions) -> Result<Report, Failure> {
    let ds = build_denial_setting_with(d, q, opts.exec).map_err(Failure::semantic)?;
    let minimal = minimal_diagnoses_with(&ds.setting, opts.exec);
    if minimal.is_empty() {
        return Err(Failure::semantic(Error::NoDiagnosis));
    }
    let tuple = |t: &usize| d.fact(*t).to_string();
    let causes: Vec<TupleCause> = tuple_causes(d, q, opts).map_err(Failure::semantic)?;
    Ok(Report {
        status: Status::Inconsistent,
        minimal_diagnoses: minimal
            .iter()
            .map(|m| {
                let mut ts: Vec<usize> = m.atoms.iter().map(|&a| ds.tuple_of(a)).collect();
                ts.sort();
                ts.iter().map(tuple).collect()
            })
            .collect(),
        minimum_diagnoses: None,
        causes: causes
            .into_iter()
            .filter(|r| r.is_actual)
            .map(|r| {
                let subject = CauseEntry {
                    tuple: Some(tuple(&r.subject)),
                    ..blank()
                };
                entry(r, tuple, subject)
            })
            .collect(),
        timing_ms: None,
    })
}
