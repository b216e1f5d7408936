use thiserror::Error;

use crate::characteristic::CharKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root solver hit the iteration cap; best estimate {estimate}")]
    MaxIterations { estimate: f64 },

    #[error("adaptive quadrature did not converge; best estimate {estimate}")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series exponential needs a zero constant term, got {0}")]
    NonZeroConstantTerm(f64),

    #[error("singular point at u = {0}")]
    Singular(f64),

    #[error("characteristic function {0:?} needs a speed parameter")]
    MissingSpeed(CharKind),

    #[error("Dirichlet coefficient q_{n} = {value:e} exceeds the overflow guard")]
    CoefficientOverflow { n: usize, value: f64 },

    #[error("series parameter eps = {eps} outside (0, {max})")]
    EpsOutOfRange { eps: f64, max: f64 },

    #[error("t = {t} is not below the certified series horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("solution blew up at t = {t} (u = {value:e})")]
    BlowUp { t: f64, value: f64 },

    #[error("tail neither converged nor oscillated by t = {t_end}")]
    InconclusiveTail { t_end: f64 },

    #[error("explicit step dt = {dt} violates the stability bound {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("delay {tau} shorter than the time step {dt}")]
    HistoryUnderflow { tau: f64, dt: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("profile never crosses level {level}")]
    NoCrossing { level: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error(
        "D_m membership disagrees at tau = {tau}, c = {c}: roots say {by_roots}, T(c) = {t_of_c} says {by_boundary}"
    )]
    Inconsistency {
        tau: f64,
        c: f64,
        t_of_c: f64,
        by_roots: bool,
        by_boundary: bool,
    },

    #[error("no bracket found: {0}")]
    NonBracketing(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
