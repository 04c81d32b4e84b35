use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A level above the materialization or summation cap was requested.
    LevelTooLarge { level: u32, max: u32, hint: &'static str },
    /// A level below the minimum an operation needs.
    LevelTooSmall { level: u32, min: u32 },
    /// A mediant would not fit in 64 bits.
    Overflow { level: u32 },
    /// An argument outside the operation's domain.
    Domain { what: &'static str, value: f64 },
    /// An index outside `[1, len]`.
    IndexOutOfRange { index: u64, len: u64 },
    /// The eigen-iteration hit its iteration limit.
    NoConvergence { iterations: usize, residual: f64 },
    /// A finite-difference stencil would cross the β = 1 boundary.
    StepCollision { beta: f64, step: f64 },
    /// The truncation uncertainty is too large for the requested use.
    TruncationTooCoarse { beta: f64, dim: usize, uncertainty: f64, signal: f64 },
    /// A size or count parameter is out of range.
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LevelTooLarge { level, max, hint } => {
                write!(f, "level {level} exceeds the cap of {max}")?;
                if !hint.is_empty() {
                    write!(f, "; {hint}")?;
                }
                Ok(())
            }
            Error::LevelTooSmall { level, min } => {
                write!(f, "level {level} is below the minimum of {min}")
            }
            Error::Overflow { level } => {
                write!(f, "denominators at level {level} overflow 64-bit integers (max level 88)")
            }
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range 1..={len}")
            }
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "eigen-iteration did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::StepCollision { beta, step } => write!(
                f,
                "difference stencil at beta={beta} with step {step} leaves the open interval (0, 1)"
            ),
            Error::TruncationTooCoarse { beta, dim, uncertainty, signal } => write!(
                f,
                "truncation uncertainty {uncertainty:e} at beta={beta}, M={dim} exceeds 10% of |beta f| = {signal:e}; \
                 a truncation larger than {dim} is required"
            ),
            Error::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}
