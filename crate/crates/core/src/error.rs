use std::fmt;

use thiserror::Error;

use crate::textio::parse::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

/// Chain of dimensions visited by repeated symmetric lifts, e.g. `8 -> 36 -> 666 -> 222111`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimChain(pub Vec<usize>);

impl fmt::Display for DimChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" → ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("lift dimension limit exceeded: chain {chain} passes max_lift_dim {max}")]
    LimitExceeded { chain: DimChain, max: usize },

    #[error("numerical failure in {context}: residual {residual:e}")]
    NumericalFailure { context: String, residual: f64 },

    #[error("subspace is not invariant: worst residual {residual:e} exceeds {bound:e}")]
    InvarianceViolated { residual: f64, bound: f64 },

    #[error("operators do not commute: |ST - TS| = {defect:e} exceeds {bound:e}")]
    NotCommuting { defect: f64, bound: f64 },

    #[error("no convergence after {restarts} restarts")]
    NonConvergence { restarts: usize },

    #[error("resolvent cubic has no bracketed nonnegative root")]
    BracketFailure,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(context: impl Into<String>, residual: f64) -> Self {
        Error::NumericalFailure {
            context: context.into(),
            residual,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }
}
