use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Hadamard order or transform length that is not a power of two >= 2.
    InvalidOrder(usize),
    InvalidLength { expected: usize, actual: usize },
    /// HCM data vectors must leave component 0 empty.
    ReservedSlot(f64),
    OutOfRange { index: usize, value: f64 },
    BitCount { expected: usize, actual: usize },
    CyclicPrefix { prefix: usize, symbol: usize },
    InvalidPermutation,
    InvalidConstellation(usize),
    NonPositive(&'static str),
    ZeroSignal,
    /// Requested average optical power cannot be produced by the scheme.
    PowerUnreachable { target: f64, limit: f64 },
    MissingInterleaver,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidOrder(n) => write!(f, "order {n} is not a power of two >= 2"),
            Error::InvalidLength { expected, actual } => {
                write!(f, "expected length {expected}, got {actual}")
            }
            Error::ReservedSlot(v) => write!(f, "component 0 is reserved but holds {v}"),
            Error::OutOfRange { index, value } => {
                write!(f, "component {index} = {value} is outside [0, 1]")
            }
            Error::BitCount { expected, actual } => {
                write!(f, "expected {expected} bits, got {actual}")
            }
            Error::CyclicPrefix { prefix, symbol } => {
                write!(f, "cyclic prefix {prefix} must be shorter than symbol length {symbol}")
            }
            Error::InvalidPermutation => f.write_str("not a permutation"),
            Error::InvalidConstellation(m) => write!(f, "unsupported constellation order {m}"),
            Error::NonPositive(name) => write!(f, "{name} must be positive"),
            Error::ZeroSignal => f.write_str("signal has zero mean power"),
            Error::PowerUnreachable { target, limit } => write!(
                f,
                "average power {target} W is not reachable (limit {limit} W)"
            ),
            Error::MissingInterleaver => f.write_str("interleaved scheme needs a permutation"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
