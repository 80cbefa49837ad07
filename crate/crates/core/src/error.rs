use thiserror::Error;

/// Errors raised by the scattering routines.
///
/// Variant names are part of the CLI contract: numerical failures are
/// surfaced to the user under these names.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },

    #[error("radii must satisfy 0 < a < b (got a = {a}, b = {b})")]
    OrderedRadii { a: f64, b: f64 },

    #[error("unit scale 2m/hbar^2 must be positive (got {0})")]
    NonPositiveScale(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matching is degenerate: both |q| and |Q| vanish at q = {q}")]
    DegenerateMatch { q: num_complex::Complex64 },

    #[error("evaluation point q = {q} sits on a zero of the Jost function")]
    PoleAtInput { q: num_complex::Complex64 },

    #[error("argument-principle count did not stabilize on the boundary of {region}")]
    BoundaryZero { region: String },

    #[error("Newton iteration failed in cell {cell} after {iterations} iterations")]
    NonConvergence { cell: String, iterations: usize },

    #[error("q = {q} is not a pole of S (|J+| = {jplus_abs:e})")]
    NotAPole { q: num_complex::Complex64, jplus_abs: f64 },

    #[error("resonance/anti-resonance pairing violated at k = {k}: {reason}")]
    PairingViolation { k: num_complex::Complex64, reason: String },

    #[error("J3 vanishes at k = {k}; the Gamow formula is singular")]
    J3Vanishes { k: num_complex::Complex64 },

    #[error("contour passes within {distance:e} of a pole at {pole}")]
    ContourTooClose { pole: num_complex::Complex64, distance: f64 },

    #[error("contour does not enclose exactly the listed poles: {0}")]
    PoleSetMismatch(String),

    #[error("regulator alpha must be non-negative (got {0})")]
    AlphaNegative(f64),

    #[error("error does not decrease with alpha: {0}")]
    NonMonotone(String),

    #[error("extrapolation needs at least {needed} reports (got {got})")]
    ArityTooSmall { needed: usize, got: usize },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
}

impl Error {
    /// Short variant name, as printed by the command-line driver.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::OrderedRadii { .. } => "OrderedRadii",
            Error::NonPositiveScale(_) => "NonPositiveScale",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DegenerateMatch { .. } => "DegenerateMatch",
            Error::PoleAtInput { .. } => "PoleAtInput",
            Error::BoundaryZero { .. } => "BoundaryZero",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NotAPole { .. } => "NotAPole",
            Error::PairingViolation { .. } => "PairingViolation",
            Error::J3Vanishes { .. } => "J3Vanishes",
            Error::ContourTooClose { .. } => "ContourTooClose",
            Error::PoleSetMismatch(_) => "PoleSetMismatch",
            Error::AlphaNegative(_) => "AlphaNegative",
            Error::NonMonotone(_) => "NonMonotone",
            Error::ArityTooSmall { .. } => "ArityTooSmall",
            Error::InvalidTestFunction(_) => "InvalidTestFunction",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
