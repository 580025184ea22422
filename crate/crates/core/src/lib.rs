//! Consistency-based diagnosis and actual causality over propositional
//! models.
//!
//! A [`diagnosis::DiagnosisSetting`] bundles components (abnormality atoms),
//! a system model and an observation. From it the crate computes minimal and
//! minimum diagnoses, minimal conflicts, counterfactual and actual causes with
//! contingency sets, and exact responsibility scores. Boolean classifiers and
//! conjunctive queries over ground databases are explained by reducing them
//! to diagnosis settings ([`classifier`], [`dbcause`]); [`oracle`] holds
//! brute-force reference implementations used to cross-check the engine.

pub mod causality;
pub mod classifier;
pub mod cli;
pub mod dbcause;
pub mod diagnosis;
pub mod error;
pub mod exec;
pub mod files;
pub mod logic;
pub mod oracle;
pub mod sat;

pub use error::{Error, Result};
