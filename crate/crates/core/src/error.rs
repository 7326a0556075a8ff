use thiserror::Error;

pub type Result<T> = std::result::Result<T, BloccError>;

#[derive(Debug, Error)]
pub enum BloccError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in {context} at iteration {iteration}: {detail}")]
    NonFinite {
        context: &'static str,
        iteration: usize,
        detail: String,
    },

    #[error("non-finite evaluation at coordinate {coordinate} of the finite-difference stencil")]
    NonFiniteStencil { coordinate: usize },

    #[error("inner {side}-side solve failed at outer iteration {outer_iter}: {source}")]
    InnerAbort {
        side: &'static str,
        outer_iter: usize,
        #[source]
        source: Box<BloccError>,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl BloccError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        BloccError::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        BloccError::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(BloccError::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
