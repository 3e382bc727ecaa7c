use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state has {got} components, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("nonpositive density in component 0: {value}")]
    NonPositiveDensity { value: f64 },

    #[error("nonpositive internal energy: {value}")]
    NonPositiveInternalEnergy { value: f64 },

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("riemann solver did not converge after {iterations} iterations (last density {last})")]
    RiemannNonConvergence { iterations: usize, last: f64 },

    #[error("degenerate flux input: {0}")]
    DegenerateInput(String),

    #[error("cubic trace equation has no root in (-{rho_star}, {rho_star})")]
    NoCubicRoot { rho_star: f64 },

    #[error("sonic fix failed: {0}")]
    SonicFix(String),

    #[error("profile oracle: {0}")]
    Oracle(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid state in cell {cell} at t = {time}: {source}")]
    InvalidCell {
        cell: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("interface solver fell back to least squares for {steps} consecutive steps (t = {time})")]
    FallbackStreak { steps: usize, time: f64 },

    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("unknown scenario '{name}', valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
