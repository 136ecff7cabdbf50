use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two vectors (or a vector and a layer) disagree in length.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A configuration value is out of its admissible range.
    InvalidConfig(&'static str),
    /// `update_bounds` was handed an empty batch.
    DegenerateBatch,
    /// The requested transform has no weight/error factorisation.
    NoCanonicalDecomposition,
    /// The raw-sigmoid reference evaluation would lose all precision here.
    OracleDomain,
    /// Not enough distinct values to normalise scores.
    DegenerateNormalization,
    /// Sampling from an empty replay buffer, or a batch larger than its size.
    InsufficientData { requested: usize, available: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DegenerateBatch => f.write_str("degenerate batch: no values to update bounds from"),
            Error::NoCanonicalDecomposition => {
                f.write_str("no canonical decomposition for this transform kind")
            }
            Error::OracleDomain => f.write_str("input outside the oracle domain (|lambda_o (x - mu)| > 30)"),
            Error::DegenerateNormalization => {
                f.write_str("degenerate normalization: fewer than two distinct scores")
            }
            Error::InsufficientData {
                requested,
                available,
            } => write!(f, "requested {requested} samples but only {available} are stored"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
