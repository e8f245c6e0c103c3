use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("effective frequency is imaginary: {which} radicand {radicand} <= 0")]
    FrequencyImaginary { which: &'static str, radicand: f64 },

    #[error("invalid mode count {0}: need at least 2")]
    InvalidModeCount(usize),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not converge at t = {t}: error estimate {estimate:e} after {intervals} intervals")]
    QuadratureFailure {
        t: f64,
        estimate: f64,
        intervals: usize,
    },

    #[error("coefficient grid spacing {step} exceeds resolvable bound {bound}")]
    GridTooCoarse { step: f64, bound: f64 },

    #[error("time {t} outside coefficient table range [0, {t_max}]")]
    TimeOutOfRange { t: f64, t_max: f64 },

    #[error("step {dt} exceeds stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("covariance is in the {found} basis, expected {expected}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("mode count {0} unsupported for this state family")]
    UnsupportedModeCount(usize),

    #[error("unphysical moments: m3 = {m3} <= 2|m1| = {two_abs_m1}")]
    UnphysicalMoments { m3: f64, two_abs_m1: f64 },

    #[error("mode index ({i}, {j}) invalid for {n} modes")]
    IndexError { i: usize, j: usize, n: usize },

    #[error("operation needs {expected} modes, state has {found}")]
    WrongModeCount { expected: usize, found: usize },

    #[error("no sign change of the late-time verdict between r = {r_lo} and r = {r_hi}")]
    NoSignChange { r_lo: f64, r_hi: f64 },

    #[error("every sweep row failed; first error: {0}")]
    SweepFailed(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::TimeOutOfRange { .. }
                | Error::UnphysicalMoments { .. }
                | Error::NoSignChange { .. }
                | Error::SweepFailed(_)
        )
    }
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
