use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `M * reverse(M)` deviates from 1 by more than the accepted tolerance.
    NonUnitMotor { deviation: f64 },
    /// The conformal point has no finite Euclidean position (e∞·P = 0).
    PointAtInfinity,
    /// The motor logarithm is evaluated too close to the branch cut.
    LogBranch { angle: f64 },
    DimensionMismatch { expected: usize, found: usize },
    /// Malformed robot description or problem definition.
    Invalid(String),
    /// End-effector points closer than the pointpair singularity threshold.
    PointPairSingularity { separation: f64 },
    NonFiniteCost,
    /// Levenberg damping grew past its cap without finding a descent step.
    DampingCap { damping: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonUnitMotor { deviation } => {
                write!(f, "motor is not unit: |M~M - 1| = {deviation:e}")
            }
            Error::PointAtInfinity => write!(f, "point at infinity has no Euclidean position"),
            Error::LogBranch { angle } => {
                write!(f, "motor logarithm undefined near the branch cut (rotation magnitude {angle})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::PointPairSingularity { separation } => write!(
                f,
                "cooperative pointpair singular: end-effector separation {separation} m"
            ),
            Error::NonFiniteCost => write!(f, "cost evaluated to a non-finite value"),
            Error::DampingCap { damping } => {
                write!(f, "damping {damping:e} exceeded its cap without a descent step")
            }
        }
    }
}

impl core::error::Error for Error {}
