use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undeclared atom `{name}` at {line}:{column}")]
    UndeclaredAtom {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("atom `{0}` is not assigned a value")]
    MissingAtom(String),

    #[error("`{0}` is not a component of this setting")]
    UnknownComponent(String),

    #[error("`{0}` is exogenous and cannot be intervened on")]
    ExogenousComponent(String),

    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("core is satisfiable together with the clauses")]
    SatisfiableCore,

    #[error("arity mismatch: expected {expected}, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("observed label already equals the desired label; nothing to explain")]
    NoExplanationNeeded,

    #[error("no diagnosis exists")]
    NoDiagnosis,

    #[error("query is false in the database; nothing to explain")]
    QueryFalse,

    #[error("invalid database: {0}")]
    InvalidDatabase(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// Semantic errors are well-formed input that cannot be analysed; everything
    /// else is a parse or usage problem.
    pub fn is_semantic(&self) -> bool {
        !matches!(self, Error::Syntax { .. } | Error::UndeclaredAtom { .. })
    }
}
