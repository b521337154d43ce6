use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the valid domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("labeled sample is not realizable by the class")]
    Unrealizable,

    #[error("approximation budget exceeded: no multiset of size up to {max_size} achieved deviation {epsilon} after {attempts} draws (best {best_deviation})")]
    ApproximationBudget {
        epsilon: f64,
        max_size: usize,
        attempts: usize,
        best_deviation: f64,
    },

    #[error("game of {rows}x{cols} exceeds the exact solver cap of {cap} entries; use solve_mw")]
    ExactCapExceeded { rows: usize, cols: usize, cap: usize },

    #[error("multiplicative weights did not converge within {iterations} iterations (last certified exploitability {exploitability})")]
    Convergence { iterations: usize, exploitability: f64 },

    #[error("weak learning failed: best per-point agreement {best_value} < 2/3 with subset budget {budget}")]
    WeakLearning { best_value: f64, budget: usize },

    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: usize, message: String },

    /// Reconstruction found a decoded subset with no consistent concept.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn decode(offset: usize, msg: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            message: msg.into(),
        }
    }
}
