//! Universal ordinary distributions, their resolutions, universal Kolyvagin
//! classes and the double complex `K(r)`, all at finite squarefree level.
//!
//! Every check returns an [`Outcome`]: a verdict plus structured details.

pub mod context;
pub mod distribution;
pub mod doublecomplex;
pub mod engine;
pub mod kolyvagin;
pub mod resolution;
pub mod suite;

pub use engine::Engine;

use kolyrec_linalg::LinalgError;
use serde_json::{Map, Value};
use thiserror::Error;

pub use context::{Context, Fraction, GroupElement, GroupRingElement, Level};

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("admissibility: {0}")]
    Admissibility(String),
    #[error("not a generator: {root} mod {prime}")]
    NotAGenerator { prime: u64, root: u64 },
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("l divides level: {0}")]
    DividesLevel(String),
    #[error("not a divisor: {0}")]
    NotADivisor(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("invariance violation: {0}")]
    InvarianceViolation(String),
    #[error("not invariant: {0}")]
    NotInvariant(String),
    #[error("no lift in window: {0}")]
    NoLift(String),
    #[error("internal contradiction: {0}")]
    Contradiction(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl CoreError {
    /// Errors that can only come from a bug or a false statement being checked.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            CoreError::InvarianceViolation(_)
                | CoreError::NotInvariant(_)
                | CoreError::NoLift(_)
                | CoreError::Contradiction(_)
                | CoreError::Linalg(_)
        )
    }
}

/// Verdict of one check with its supporting data.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    failures: Vec<String>,
    details: Map<String, Value>,
}

impl Outcome {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    /// Records a named condition; a false one fails the check.
    pub fn require(&mut self, label: impl Into<String>, ok: bool) -> bool {
        if !ok {
            self.failures.push(label.into());
        }
        ok
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn details(&self) -> &Map<String, Value> {
        &self.details
    }

    /// Folds a sub-check in, prefixing its failures.
    pub fn absorb(&mut self, prefix: &str, other: Outcome) {
        for f in other.failures {
            self.failures.push(format!("{prefix}: {f}"));
        }
        self.details.insert(prefix.to_string(), Value::Object(other.details));
    }

    pub fn into_parts(self) -> (Vec<String>, Map<String, Value>) {
        (self.failures, self.details)
    }
}

/// Renders big integers as JSON strings when they do not fit in `i64`.
pub fn int_json(x: &kolyrec_linalg::Int) -> Value {
    use num_traits::ToPrimitive;
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

pub fn ints_json(xs: &[kolyrec_linalg::Int]) -> Value {
    Value::Array(xs.iter().map(int_json).collect())
}
