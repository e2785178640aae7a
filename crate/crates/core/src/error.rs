use thiserror::Error;

/// Errors produced by node generation, stencil construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("star construction failed at node {center}: quadrant {quadrant} has fewer than {needed} candidate(s)")]
    EmptyQuadrant { center: usize, quadrant: usize, needed: usize },

    #[error("ill-conditioned star at node {center} (condition {condition:.3e})")]
    IllConditionedStar { center: usize, condition: f64 },

    #[error("RBF stencil failure at node {center}: saddle system condition {condition:.3e}")]
    SingularSaddle { center: usize, condition: f64 },

    #[error("singular matrix (zero pivot in column {column})")]
    SingularMatrix { column: usize },

    #[error("discretization failed at node {node}: {source}")]
    Discretization {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    /// The Krylov solver stopped without reaching the requested tolerance.
    #[error("Bi-CGSTAB did not converge after {iterations} iterations (relative residual {final_residual:.3e})")]
    NonConvergence { iterations: usize, final_residual: f64, history: Vec<f64> },

    /// The outer fixed-point loop hit its iteration cap.
    #[error("Picard iteration did not converge after {iterations} iterations (last change {last_change:.3e})")]
    PicardNonConvergence { iterations: usize, last_change: f64, history: Vec<f64> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by an iterative process running out of iterations.
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::PicardNonConvergence { .. } => true,
            Error::Discretization { source, .. } => source.is_non_convergence(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
