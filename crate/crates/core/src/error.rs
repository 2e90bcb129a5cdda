use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("axis jet must have Q'(0) = 0, got {q1}")]
    AxisSlope { q1: f64 },

    #[error("series seed residual {residual:e} at r = {r} exceeds {limit:e}")]
    SeedTooCoarse { r: f64, residual: f64, limit: f64 },

    #[error("profile slope {slope} exceeded 10 at r = {r}")]
    BlowupDetected { r: f64, slope: f64 },

    #[error("Q - r = {excess:e} is not positive at r = {r}")]
    NonPositiveTail { r: f64, excess: f64 },

    #[error("u0 = {value:e} is not positive at r = {r}")]
    PositivityViolated { r: f64, value: f64 },

    #[error("minimal profile invariant violated: {0}")]
    ProfileInvariant(String),

    #[error("field grid does not match the operator grid ({expected} vs {found} nodes)")]
    GridMismatch { expected: usize, found: usize },

    #[error("tail exponent {exponent} of (A*)^-1 f / u0 is too close to -1; enlarge r_max")]
    BranchAmbiguous { exponent: f64 },

    #[error("f J u0 is not integrable at the axis (local exponent {exponent})")]
    NotIntegrableAtAxis { exponent: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("tail exponent {exponent} is at least the stationary exponent {limit}")]
    TailTooFat { exponent: f64, limit: f64 },

    #[error("Newton iteration diverged at t = {t} (dt = {dt:e})")]
    NewtonDiverged { t: f64, dt: f64 },

    #[error("profile became non-positive at t = {t}")]
    QNonPositive { t: f64 },

    #[error("fit window spans {decades:.3} decades of T - t; need at least 1")]
    WindowTooNarrow { decades: f64 },

    #[error("sample (r = {r}, t = {t}) lies outside the region where v+ > 0")]
    SampleOutsideValidity { r: f64, t: f64 },

    #[error("Q - r reaches {min_gap:e} < 0 on the barrier domain")]
    ConePrerequisiteFailed { min_gap: f64 },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// True for rejected inputs and failed hypotheses, false for numerical
    /// breakdowns (non-convergence, divergence, collapse of the profile).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NewtonDiverged { .. }
                | Error::SeedTooCoarse { .. }
                | Error::BlowupDetected { .. }
                | Error::QNonPositive { .. }
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
