use thiserror::Error;

/// Errors raised by state construction, the eigensolvers, the propagators
/// and the closed-form measure shortcuts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitudes contain a non-finite value")]
    NonFinite,

    #[error("all amplitudes are zero")]
    ZeroNorm,

    #[error("state is not normalized: sum |a_i|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("spectrum has imaginary part {imag:e} above the clamp threshold")]
    ComplexSpectrum { imag: f64 },

    #[error("eigensolver residual {residual:e} exceeds tolerance {tolerance:e}")]
    NoConvergence { residual: f64, tolerance: f64 },

    #[error("invalid reservoir parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("step too large: h * eta = {h_eta} exceeds {limit}")]
    StepTooLarge { h_eta: f64, limit: f64 },

    #[error("trace drifted by {drift:e} during integration")]
    TraceDrift { drift: f64 },

    #[error("matrix is not an X-state (forbidden entry modulus {modulus:e})")]
    NotXState { modulus: f64 },

    #[error("both the rho14 and rho23 coherences are nonzero")]
    AmbiguousFamily,

    #[error("state is not in either two-amplitude EPR family")]
    NotEprFamily,

    #[error("matrix does not match the required pattern: {0}")]
    PatternMismatch(String),

    #[error("analytic propagator does not reproduce the initial state at t = 0 (deviation {deviation:e})")]
    TranscriptionSelfTest { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
