use thiserror::Error;

use crate::model::Violation;

/// Errors raised by the library. Infeasible plans are reported as data, not
/// as errors; only malformed input and out-of-domain arguments end up here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of domain: {value} ({constraint})")]
    Domain {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// The energy queue has no stationary distribution because arrivals
    /// keep up with consumption; the battery never drains.
    #[error("energy queue unstable: lambda/mu = {rho} >= 1")]
    UnstableQueue { rho: f64 },

    #[error("stationary distribution needs more than {l_max} states to reach tail mass {tol}")]
    Truncation { l_max: usize, tol: f64 },

    #[error("exhaustive search over {cells} cells refused (limit {limit}); use the two-stage planner instead")]
    TooManyCells { cells: usize, limit: usize },

    #[error("unknown cell id `{0}`")]
    UnknownCell(String),

    #[error("scenario invalid: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("no planning method selected")]
    NoMethods,

    #[error("profile error: {0}")]
    Profile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn domain(what: &'static str, value: f64, constraint: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        constraint,
    }
}
