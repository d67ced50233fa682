use thiserror::Error;

/// Every failure mode the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid base q = {0}: need 0 < q < 1")]
    InvalidQ(f64),

    #[error("argument must be nonzero")]
    ZeroArgument,

    #[error("non-terminating series needs |z| < 1, got |z| = {0}")]
    DivergentArgument(f64),

    #[error("denominator parameter vanishes at term {0}")]
    PoleInDenominator(usize),

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("direct summation out of range: {0}")]
    SummationOutOfRange(String),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("Wronskian vanishes (|W| = {0:e}); z is at or near an eigenvalue")]
    SingularWronskian(f64),

    #[error("zero at y = {0} is not simple")]
    NonSimpleZero(f64),

    #[error("window too wide for grid resolution: {0}")]
    WindowTooWide(String),

    #[error("discrete tail not converged: {0}")]
    WindowTooNarrow(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("pole encountered at {0}")]
    PoleEncountered(String),

    #[error("outside domain: {0}")]
    DomainViolation(String),

    #[error("eigensolver did not converge")]
    ConvergenceFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
