use thiserror::Error;

use crate::nlpsg::NlpsgVerdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its physical range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("pole: {0}")]
    Pole(String),

    /// Mode swap on a near-zero diagonal entry. `mode` is 1-based; `block` is
    /// the network block (1..=3) or `None` for the outer swap.
    #[error("singular pivot swapping mode {mode}{}: |g| = {magnitude:e}", block_suffix(*.block))]
    SingularPivot {
        mode: usize,
        block: Option<usize>,
        magnitude: f64,
    },

    #[error("matrix is not unitary (residual {0:e})")]
    NonUnitary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid mode map: {0}")]
    ModeMap(String),

    #[error("invalid measurement pattern: {0}")]
    Pattern(String),

    #[error("amplitudes are not normalized (norm^2 = {0})")]
    Normalization(f64),

    #[error("phase of A is undefined (|A| = {0:e})")]
    UndefinedPhase(f64),

    #[error("NLPSG {gate} violates the success constraints (residual {:e}, S11 residual {:e})", .verdict.residual, .verdict.s11_residual)]
    InvalidNlpsg {
        gate: usize,
        verdict: Box<NlpsgVerdict>,
    },
}

fn block_suffix(block: Option<usize>) -> String {
    match block {
        Some(b) => format!(" in block {b}"),
        None => " in the outer swap".to_string(),
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value.abs() <= 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "[-1, 1]",
        })
    }
}
