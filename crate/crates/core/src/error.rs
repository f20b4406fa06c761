use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("solver requires a uniform grid")]
    NonUniformGrid,

    #[error("Laplace transform singular at p = {p}: pole at {pole}")]
    Singularity { p: Complex64, pole: Complex64 },

    #[error("Laplace transform requested at p = {p} outside the convergence half-plane Re p > {abscissa}")]
    OutsideConvergence { p: Complex64, abscissa: f64 },

    #[error("moment {requested} diverges: kernel declares only moments 0..{finite} as finite")]
    DivergentMoment { requested: usize, finite: usize },

    #[error("need moments up to order {needed}, table has order {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("expansion order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("expansion orders do not match: {0}")]
    OrderMismatch(String),

    #[error("degenerate pole: G~_0 = 0 is an unsupported regime")]
    DegeneratePole,

    #[error("step size underflow at t = {t} (lambda = {lambda}, rates = {rates:?})")]
    StepUnderflow {
        t: f64,
        lambda: f64,
        rates: Vec<Complex64>,
    },

    #[error("time-convolutionless order {0} is not available (use 2 or 4)")]
    UnsupportedTclOrder(u32),

    #[error("operation requires a single resonant Lorentz peak")]
    NotSingleResonantPeak,

    #[error("|x| = {abs_x:e} at t = {t} is below the node tolerance")]
    NodeSingularity { t: f64, abs_x: f64 },

    #[error("propagator is singular: x(t1) = 0")]
    SingularPropagator,

    #[error("t = {t} lies outside the trajectory range [0, {t_max}]")]
    Extrapolation { t: f64, t_max: f64 },

    #[error("Re p~ >= 0 with |r| > 1: the perturbative part never becomes physical")]
    NoFiniteTstar,

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
