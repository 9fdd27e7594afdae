use thiserror::Error;

/// Errors produced by the simulator and the analytic routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, \
         error {error_estimate:e} after {subdivisions} subdivisions"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    /// The samples have zero variance or a mean of exactly 0 or 1.
    #[error("degenerate Beta fit: {0}")]
    DegenerateFit(String),

    /// The sample variance is too large for any Beta distribution with that mean.
    #[error("infeasible moments: mean {mean}, variance {variance} (must be below {bound})")]
    InfeasibleMoments { mean: f64, variance: f64, bound: f64 },

    /// Even a silent interferer population misses the reliability target.
    #[error("design target {target} is infeasible: success without interference is {achievable}")]
    Infeasible { target: f64, achievable: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
