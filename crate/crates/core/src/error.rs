use thiserror::Error;

/// Errors produced by kernel evaluation, moment computation and the study drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {order} exceeds maximum supported order {max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("non-finite input: {0}")]
    NonFiniteInput(f64),

    #[error("decay-constant fit failed: {0}")]
    FitFailure(String),

    #[error("invalid interval: ceil(n*a) > floor(n*b) for n={n}, a={a}, b={b}")]
    InvalidInterval { n: u32, a: i64, b: i64 },

    #[error("moment of order {nu} risks divergence against decay exponent {exponent}")]
    DivergenceRisk { nu: f64, exponent: f64 },

    #[error("adaptive quadrature did not converge to tolerance {tol} (best error {err})")]
    QuadratureNonConvergence { tol: f64, err: f64 },

    #[error("Strang-Fix conditions not verified up to order {0}")]
    StrangFixUnverified(usize),

    #[error("residual imaginary part {0} above tolerance")]
    ResidualImaginary(f64),

    #[error("zeta series diverges: exponent {0} <= 1")]
    ZetaDivergence(f64),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
