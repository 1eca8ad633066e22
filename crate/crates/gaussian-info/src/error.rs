//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("phase-space dimension must be even, got {dim}")]
    OddDimension { dim: usize },

    #[error("matrix is not symmetric: max |M - M^T| = {asymmetry:.3e} exceeds tolerance {tol:.1e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },

    #[error("uncertainty violation: min eigenvalue of M + iJ is {min_eigenvalue:.6e} (tolerance {tol:.1e})")]
    UncertaintyViolation { min_eigenvalue: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("{context}: expected dimension {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symplectic: ||S J S^T - J|| = {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("spectra have different lengths: {left} vs {right}")]
    SpectrumLengthMismatch { left: usize, right: usize },

    #[error("{name} must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },

    #[error("symplectic eigenvalue {value} is below 1; quantum spectra require every value >= 1")]
    SubQuantumEigenvalue { value: f64 },

    #[error("pure eigenmode: symplectic eigenvalue {lambda} is within {tol:.1e} of 1, inverse temperature diverges")]
    PureMode { lambda: f64, tol: f64 },

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("duplicate subsystem name `{0}`")]
    DuplicateSubsystem(String),

    #[error("subsystem `{0}` appears in both the target and the conditioning set")]
    OverlappingSelection(String),

    #[error("partition covers {covered} modes but the state has {total}")]
    PartitionMismatch { covered: usize, total: usize },

    #[error("transmissivity must lie in [0, 1], got {0}")]
    InvalidTransmissivity(f64),

    #[error("beam-splitter arms must have equal mode counts: {left} vs {right}")]
    ArmMismatch { left: usize, right: usize },

    #[error("perturbation {eps:.3e} is too large for spectral gap {gap:.3e}; require eps < gap / 10")]
    EpsilonTooLarge { eps: f64, gap: f64 },

    #[error("cluster mismatch: expected {expected} perturbed eigenvalues near {lambda}, found {found}")]
    ClusterMismatch {
        lambda: f64,
        expected: usize,
        found: usize,
    },

    #[error("environment is not thermal: entropy {s_env} differs from the thermal value {thermal}")]
    NonThermalEnvironment { s_env: f64, thermal: f64 },

    #[error("entropy argument {0} is negative beyond tolerance")]
    NegativeGArgument(f64),

    #[error("Fock cutoff {cutoff} is too small: this displacement needs at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("failed to parse state JSON: {0}")]
    StateFormat(String),
}
