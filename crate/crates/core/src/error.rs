use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} lies outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("input is not sorted in nondecreasing order (first violation at index {index})")]
    NotSorted { index: usize },

    #[error("quantile grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("adaptive quadrature on [{a}, {b}] did not converge (estimate {estimate}, error {error})")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("could not bracket the quantile at level {u} after {expansions} expansions")]
    BracketFailure { u: f64, expansions: usize },

    #[error("no exact reference solution for {0}")]
    UnsupportedReference(String),

    #[error("at parameter value {parameter}: {source}")]
    AtPoint {
        parameter: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }

    /// True for failures of a numerical procedure (as opposed to bad input
    /// or I/O). The CLI maps these to a dedicated exit code.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::QuadratureNonConvergence { .. }
            | Error::BracketFailure { .. }
            | Error::NonMonotoneGrid { .. } => true,
            Error::AtPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True for invalid parameters, unsupported combinations or malformed input.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Domain { .. }
            | Error::InvalidConfig(_)
            | Error::LengthMismatch { .. }
            | Error::EmptyInput
            | Error::NotSorted { .. }
            | Error::UnsupportedReference(_) => true,
            Error::AtPoint { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
