use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on a plain argument failed (counts, ranges, signs).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A real evaluation was requested strictly inside a map's cut.
    #[error("x = {x} lies inside the cut ({lo}, {hi})")]
    InsideCut { x: f64, lo: f64, hi: f64 },
    /// A truncated series evaluated to zero or a non-finite value.
    #[error("degenerate series evaluation at z = {z}")]
    DegenerateEval { z: Complex64 },
    /// The radius search could not bracket a sign change.
    #[error("radius bracketing failed after {0} doublings")]
    RadiusBracket(usize),
    /// Two traces cover different index sets and cannot be compared.
    #[error("trace index sets differ")]
    IndexMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidArgument(msg.into())
    }
}
