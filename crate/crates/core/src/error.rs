use crate::ipiano::Trace;

/// Errors produced anywhere in the super-resolution pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported or malformed format: {0}")]
    Format(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("optimizer diverged at iteration {iteration}: non-finite {what}")]
    Divergence {
        iteration: usize,
        what: &'static str,
        trace: Trace,
    },
    #[error("backtracking stalled at iteration {iteration} after {backtracks} step-size reductions")]
    Stall {
        iteration: usize,
        backtracks: usize,
        trace: Trace,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! contract {
    ($cond:expr, $($arg:tt)*) => {
        // Negated so that NaN operands fail the check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err($crate::Error::Contract(format!($($arg)*)));
        }
    };
}
pub(crate) use contract;
