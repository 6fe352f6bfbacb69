use std::fmt;

use serde::{Deserialize, Serialize};

/// A single field that failed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_fields(fields: &[FieldError]) -> String {
    fields
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Best parameters reached by a fit that did not converge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub best_params: Vec<f64>,
    pub best_mse: f64,
    /// Objective value after each accepted iteration of the best restart.
    pub trace: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {}", join_fields(.0))]
    Validation(Vec<FieldError>),

    #[error("unknown sector `{0}`")]
    UnknownSector(String),

    #[error("finite-difference stencil leaves the domain at corner {corner} ({v}, {e})")]
    Stencil { corner: &'static str, v: f64, e: f64 },

    #[error("model is not identifiable from the data: {0}")]
    NonIdentifiable(String),

    #[error("fit did not converge after {iterations} iterations (best mse {:.3e})", .failure.best_mse)]
    NonConvergence {
        iterations: usize,
        failure: Box<FitFailure>,
    },

    #[error("degenerate comparison: {0}")]
    DegenerateComparison(String),

    #[error("function is numerically constant (variance {0:.3e})")]
    ConstantFunction(f64),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("infeasible population spec: {0}")]
    Infeasible(String),

    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("duplicate org_id `{0}`")]
    DuplicateOrgId(String),

    #[error("too many invalid rows: {rejected} of {total} exceed the {max_fraction} budget")]
    ErrorBudget {
        rejected: usize,
        total: usize,
        max_fraction: f64,
    },

    #[error("corrupt portfolio file at line {line}: {message} (last good record: {})", .last_good.as_deref().unwrap_or("<header>"))]
    Corrupt {
        line: usize,
        message: String,
        last_good: Option<String>,
    },

    #[error("portfolio format version {found} needs migration to {expected}")]
    MigrationNeeded { found: String, expected: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {x}")))
    }
}
