use thiserror::Error;

/// Errors raised by the solvers, evaluators and exponent certifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented precondition of an exponent construction does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// No witness could be produced for an exponent system.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Explicit time stepping left its stability region.
    #[error("step-size error in {stage} at step {step}: {detail}")]
    StepSize {
        stage: &'static str,
        step: usize,
        detail: String,
    },

    /// A solver produced non-finite or exploding values.
    #[error("divergence in {stage} at step {step}")]
    Divergence { stage: &'static str, step: usize },

    /// The Picard fixed-point loop hit its iteration cap.
    #[error("no convergence after {} iterations (last residual {:e})", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { residuals: Vec<f64> },

    /// A density that must stay nonnegative went negative.
    #[error("positivity violated in {stage}: min value {min:e} at frame {frame}")]
    Positivity {
        stage: &'static str,
        frame: usize,
        min: f64,
    },

    /// A 1-D numeric routine (bracketing, quadrature) failed.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
