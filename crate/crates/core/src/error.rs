use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation needed: lattice support of {required} sites exceeds the cap of {cap}")]
    TruncationNeeded { required: usize, cap: usize },

    #[error("incompatible realizations: {0}")]
    Incompatible(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operator is not unitary: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("operator is not Hermitian: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("norm estimation did not converge after {iterations} iterations (last Rayleigh quotient {last_rayleigh:.12e})")]
    NormNotConverged { iterations: usize, last_rayleigh: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("linear solve failed: condition estimate {condition:.3e}")]
    IllConditioned { condition: f64 },

    #[error("invalid spectral window: {0}")]
    InvalidWindow(String),

    #[error("spectral map sends the base point to infinity")]
    MapsToInfinity,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense Cayley operator unavailable: base point within {distance:.3e} of the spectrum (guard {guard:.3e})")]
    BasePointInSpectrum { distance: f64, guard: f64 },

    #[error("series did not decay: term norm {term_norm:.3e} after {terms} terms")]
    SeriesDivergence { terms: usize, term_norm: f64 },

    #[error("section too small: need half-width K >= {required_k}")]
    SectionTooSmall { required_k: usize },

    #[error("serialization: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
