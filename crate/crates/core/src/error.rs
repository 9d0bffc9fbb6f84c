use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {triangle} references node {node}, but the mesh has {node_count} nodes")]
    IndexOutOfRange {
        triangle: usize,
        node: usize,
        node_count: usize,
    },

    #[error("node {node} belongs to no triangle")]
    IsolatedNode { node: usize },

    #[error("edge ({from}, {to}) is traversed twice in the same direction; orientation is inconsistent")]
    InconsistentOrientation { from: usize, to: usize },

    #[error("normal at node {node} vanishes (incident triangles fold over)")]
    DegenerateNormal { node: usize },

    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateElement { triangle: usize, area: f64 },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("numeric blow-up: {field} is non-finite at node {node}")]
    BlowUp { field: &'static str, node: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "conjugate gradient did not converge in {iterations} iterations \
         (relative residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("the thickness function is only defined on a stationary surface (kappa = 0)")]
    EvolvingSurface,

    #[error("invalid data: {0}")]
    Data(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Whether this error (possibly wrapped in a step context) comes from configuration.
    pub fn is_config(&self) -> bool {
        match self {
            Error::ConfigParse { .. } | Error::ConfigValue { .. } | Error::InvalidParameter { .. } => {
                true
            }
            Error::AtStep { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
