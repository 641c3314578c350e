use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds {limit:e})")]
    NonHermitianInput { asymmetry: f64, limit: f64 },

    #[error("matrix is not anti-Hermitian (deviation {deviation:e} exceeds {limit:e})")]
    NonAntiHermitianInput { deviation: f64, limit: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("matrix has eigenvalue {eigenvalue:e} below the PSD clamp threshold")]
    IndefiniteInput { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point lies on manifold {actual} but the model lives on {expected}")]
    ManifoldMismatch { expected: String, actual: String },

    #[error("direction {mu} is not available on a {dim}-dimensional manifold")]
    UnsupportedDirection { mu: usize, dim: usize },

    #[error("Fock truncation {fock_dim} is too small for |z|^2 = {z_norm_sqr}")]
    TruncationTooSmall { fock_dim: usize, z_norm_sqr: f64 },

    #[error("band {band} is degenerate (gap {gap:e}); use the Wilczek-Zee curvature")]
    DegenerateBand { band: usize, gap: f64 },

    #[error("index set {indices:?} is not a maximal degenerate cluster")]
    NotMaximalCluster { indices: Vec<usize> },

    #[error("finite-difference step {step:e} outside (0, {limit:e})")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("gap to the selected cluster closed ({gap:e})")]
    GapClosed { gap: f64 },

    #[error("plaquette sum {value} is not within {threshold} of an integer")]
    NonIntegerPlaquetteSum { value: f64, threshold: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid temperature: {0}")]
    InvalidTemperature(String),
}
