use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {left} vs {right} nodes")]
    GridMismatch { left: usize, right: usize },
    #[error("non-finite sample in field")]
    NonFinite,
    #[error("complex output: spectrum is not Hermitian (defect {0:.3e})")]
    ComplexOutput(f64),
    #[error("zero mode not invertible (mean {0:.3e})")]
    ZeroModeNotInvertible(f64),
    #[error("symbol vanishes on populated mode {0}")]
    SingularSymbol(i64),
    #[error("indefinite inertia operator: a({0}) < 0 on a populated mode")]
    IndefiniteInertia(i64),
    #[error("symbol is not symmetric (complex-valued a(k))")]
    NonSymmetricSymbol,
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("invalid Sobolev exponent {0}")]
    InvalidExponent(f64),
    #[error("kernel unresolved: epsilon * n = {0:.3} < 16")]
    KernelUnresolved(f64),
    #[error("invalid mollifier width {0}")]
    InvalidEpsilon(f64),
    #[error("not a diffeomorphism: min jacobian {0:.3e}")]
    NotDiffeomorphism(f64),
    #[error("inversion failed at node {0}")]
    InversionFailed(usize),
    #[error("numerical overflow")]
    NumericalOverflow,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data not band-limited: mode {0} exceeds the dealias band")]
    NotBandLimited(i64),
    #[error("rows are not adjacent: {0}")]
    NonAdjacentRows(String),
}
