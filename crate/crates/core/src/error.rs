use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("modulus must be a positive integer")]
    ZeroModulus,
    #[error("invalid ring (q={q}, p={p}): q and p must be co-prime positive integers")]
    InvalidRing { q: u32, p: u32 },
    #[error("point ({x1}, {x2}) is not canonical for M^{{{q}/{p}}}")]
    NotCanonical { x1: f64, x2: f64, q: u32, p: u32 },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: crate::RingSpec, right: crate::RingSpec },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("geometry mismatch: expected {expected}, found {found}")]
    GeometryMismatch { expected: crate::Geometry, found: crate::Geometry },
    #[error("empty embedding vector")]
    EmptyVector,
    #[error("invalid surface parameters R={big_r}, r={small_r}: need 0 < r < R")]
    InvalidSurface { big_r: f64, small_r: f64 },
    #[error("id {id} out of range for vocabulary of size {size}")]
    OutOfVocabulary { id: u32, size: usize },
    #[error("negative sampling needs at least two entities, found {0}")]
    TooFewEntities(usize),
    #[error("negative sampling exhausted its rejection budget for ({h}, {r}, {t})")]
    SamplingExhausted { h: u32, r: u32, t: u32 },
    #[error("non-finite update in {table} row {row}")]
    NonFiniteUpdate { table: &'static str, row: usize },
    #[error("no triples to evaluate")]
    EmptySplit,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
