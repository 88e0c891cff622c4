use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the computational ball: |x| = {0} > 3")]
    OutsideDomain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular radial map at s = {0}")]
    SingularMap(f64),

    #[error("laminate infeasible at s = {s}: discriminant = {discriminant}")]
    InfeasibleLaminate { s: f64, discriminant: f64 },

    #[error("window [{0}, {1}] spans a region boundary")]
    WindowSpansBoundary(f64, f64),

    #[error("special function argument out of range: {0}")]
    RangeError(String),

    #[error("singular medium eigenvalue at r = {0}")]
    SingularMedium(f64),

    #[error("step size underflow at r = {0}; system too stiff")]
    Stiffness(f64),

    #[error("near electromagnetic resonance: {0}")]
    NearResonance(String),

    #[error("spectra incompatible: {0}")]
    SpectrumMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 3 for solver failures, 1 otherwise.
    /// Trend violations use exit code 2 and are not errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stiffness(_)
            | Error::NearResonance(_)
            | Error::SingularMedium(_)
            | Error::RangeError(_) => 3,
            _ => 1,
        }
    }
}
