use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An ad-series argument lies on or outside the disc of radius `2π`.
    #[error("norm {norm} is not below the series radius {limit}")]
    NormTooLarge { norm: f64, limit: f64 },

    /// A scalar argument lies outside `(-2π, 2π)`.
    #[error("argument {value} is outside the open interval (-2π, 2π)")]
    OutOfRange { value: f64 },

    /// `‖b‖ = 0`: the scalar lifetime is infinite.
    #[error("norm_b is zero; the scalar lifetime is infinite")]
    DegenerateB,

    /// Initial datum outside the strip.
    #[error("initial norm {norm} is not inside the domain bound {bound}")]
    BadInitial { norm: f64, bound: f64 },

    /// A sampled point violates `‖f(t,y)‖ ≤ g(|t|,‖y‖)` or the monotonicity of `g`.
    #[error("majorant violated at t = {t}, ‖y‖ = {norm_y}: ‖f‖ = {norm_f} > g = {g}")]
    MajorantViolation {
        t: f64,
        norm_y: f64,
        norm_f: f64,
        g: f64,
    },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    /// The autonomous field is not strictly positive on the sampled interval.
    #[error("field is not positive at z = {at} (value {value})")]
    NonPositiveField { at: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// The variant name, for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NormTooLarge { .. } => "NormTooLarge",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DegenerateB => "DegenerateB",
            Error::BadInitial { .. } => "BadInitial",
            Error::MajorantViolation { .. } => "MajorantViolation",
            Error::IntegrationFailure(_) => "IntegrationFailure",
            Error::NonPositiveField { .. } => "NonPositiveField",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
