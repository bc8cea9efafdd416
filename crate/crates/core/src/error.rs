use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cycle length m = {0} is not supported (need m >= 3)")]
    InvalidM(usize),
    #[error("dimension d = {0} is not supported (need d >= 1)")]
    InvalidDimension(usize),
    #[error("instance too large: {what} = {size} exceeds the cap {cap}")]
    TooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("vertex has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {coord} is out of range for m = {m}")]
    CoordinateOutOfRange { coord: usize, m: usize },
    #[error("vertex index {index} is out of range for a set over {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("({u}, {v}) is not an edge of the graph")]
    NotAnEdge { u: usize, v: usize },
    #[error("operation requires power {expected}, got {got}")]
    WrongPower {
        expected: &'static str,
        got: &'static str,
    },
    #[error("test vector vanishes everywhere")]
    ZeroVector,
    #[error("body W is empty")]
    EmptyBody,
    #[error("no vertices outside the Dirichlet set")]
    EmptyInterior,
    #[error("expansion parameter must be a non-negative rational")]
    NegativeExpansion,
    #[error(
        "max flow {value} is below the saturating value {required}; expansion fails for this c"
    )]
    NotSaturated { value: String, required: String },
    #[error("test vector is nonzero at Dirichlet vertex {0}")]
    DirichletViolation(usize),
    #[error("shift budget of {cap} exhausted before the shifted bodies covered the space")]
    CoverageFailed { cap: usize },
    #[error("spine from seed {seed} failed verification")]
    VerificationFailed { seed: u64 },
    #[error("strip [t, t + eps) = [{t}, {upper}) leaves the range of phi")]
    DegenerateStrip { t: f64, upper: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
