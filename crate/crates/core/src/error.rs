//! Crate-wide error type.
//!
//! Errors split into two rough classes. Validation errors mean the input data
//! never described a well-posed computation (bad parameters, mismatched grids,
//! malformed config text). Numerical errors mean a well-posed computation
//! failed at runtime (an iteration did not converge, an iterate escaped its
//! bracket, a constant search exhausted its budget). The CLI maps the first
//! class to exit code 2 and the second to exit code 3.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented precondition. The message names the
    /// offending field or config key.
    #[error("validation: {0}")]
    Validation(String),

    /// A matrix argument that must be symmetric is not.
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },

    /// Evaluation left the domain of a logarithm or negative power.
    #[error("domain: {0}")]
    Domain(String),

    /// A negative power of a nonpositive grid value was requested.
    #[error("singular term evaluated at nonpositive value at node {node} (r = {r:.6})")]
    Singularity { node: usize, r: f64 },

    /// An iterate left the sub/supersolution bracket and damping did not
    /// recover it.
    #[error("iterate escaped the solution bracket at node {node} by {overshoot:.3e}")]
    BracketViolation { node: usize, overshoot: f64 },

    /// An inner iteration hit its sweep budget before meeting its tolerance.
    #[error("no convergence after {sweeps} sweeps (last update {last_update:.3e})")]
    NonConvergence { sweeps: usize, last_update: f64 },

    /// The regularization continuation stopped making progress while still
    /// far from its tolerance.
    #[error("continuation stagnated: last gap {gap:.3e}, previous gap {prev_gap:.3e}")]
    ContinuationStagnation { gap: f64, prev_gap: f64 },

    /// The operator coefficient policy kept flipping between sweeps.
    #[error("coefficient policy kept oscillating after {sweeps} sweeps")]
    PolicyOscillation { sweeps: usize },

    /// An eigenfunction iterate lost interior positivity.
    #[error("eigenfunction iterate lost positivity at sweep {sweep}")]
    PositivityLoss { sweep: usize },

    /// A transform sandwich check failed beyond its mesh tolerance.
    #[error("sandwich inequality `{chain}` violated at node {node}: slack {slack:.3e} < -{tol:.3e}")]
    SandwichViolation {
        chain: &'static str,
        node: usize,
        slack: f64,
        tol: f64,
    },

    /// A barrier constant search ran out of steps without certifying.
    #[error("constant search for {inequality} exhausted after {steps} steps (best margin {best_margin:.3e})")]
    SearchExhausted {
        inequality: String,
        steps: usize,
        best_margin: f64,
    },

    /// An ordering audit between a claimed subsolution and supersolution
    /// failed.
    #[error("comparison failed at node {node}: ordering gap {gap:.3e}")]
    ComparisonFailure { node: usize, gap: f64 },

    /// A least-squares fit had too little usable data.
    #[error("fit: {0}")]
    Fit(String),

    /// A quotient diagnostic hit a nonpositive infimum.
    #[error("infimum of the boundary quotient is nonpositive at scale {scale:.6e}")]
    DegenerateInfimum { scale: f64 },

    /// A command needs an artifact that an earlier command has not produced.
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed config or CSV text.
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::NotSymmetric { .. }
                | Error::Parse(_)
                | Error::MissingArtifact(_)
        )
    }
}
