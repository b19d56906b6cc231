use thiserror::Error;

/// Errors raised by the numerical pipeline and the scenario front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Neither the series nor the asymptotic regime could certify the
    /// requested tolerance. `estimate` is the best relative error bound found.
    #[error("accuracy loss in {what}: relative error estimate {estimate:.3e}")]
    AccuracyLoss { what: &'static str, estimate: f64 },

    #[error("wavelength {lambda_um} um outside valid range [{min_um}, {max_um}] um of {label}")]
    OutOfRange {
        lambda_um: f64,
        min_um: f64,
        max_um: f64,
        label: String,
    },

    #[error("infeasible grating design: {0}")]
    InfeasibleDesign(String),

    #[error("unitarity violated: |A|^2 - |B|^2 - 1 = {residual:.3e}")]
    Unitarity { residual: f64 },

    #[error("squeezing angle undefined: |V| = {magnitude:.3e}")]
    UndefinedAngle { magnitude: f64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("integration tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("grid coverage: {0}")]
    GridCoverage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
