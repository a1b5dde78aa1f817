use thiserror::Error;

/// Errors raised by the solvers, the planner and the grid oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    /// An input lies outside the domain of the formula being evaluated.
    #[error("invalid {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    /// The quadratic in M has no real roots.
    #[error("negative discriminant {discriminant:e} (a={a:e}, b={b:e}, c={c:e})")]
    Numerical {
        discriminant: f64,
        a: f64,
        b: f64,
        c: f64,
    },

    /// The bisection endpoints do not straddle a sign change.
    #[error("bracket [{lo}, {hi}] does not straddle a root: g(lo)={g_lo:e}, g(hi)={g_hi:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("bisection did not converge after {iterations} halvings (width {width:e})")]
    MaxIter { iterations: usize, width: f64 },

    /// The sweeper cannot advance inwards from the given radius.
    #[error("no inward progress at radius {radius}: delta = {delta:e}")]
    NoProgress { radius: f64, delta: f64 },

    /// The linear end game cannot clean the remaining region.
    #[error(
        "end game infeasible: delta_v = {delta_v} is below the cleaning threshold {threshold} \
         (margin {margin:e})"
    )]
    Infeasible {
        delta_v: f64,
        threshold: f64,
        margin: f64,
    },

    /// Bad run settings: oracle resolution, study ranges, output sinks.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl SweepError {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        SweepError::Domain {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = SweepError> = std::result::Result<T, E>;
