use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("incomparable sizes: {0} vs {1}")]
    IncomparableSizes(u64, u64),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("d_r undefined for S-covers")]
    DrUndefinedForSavin,

    #[error("requires a Kazhdan-Patterson cover: {0}")]
    RequiresKazhdanPatterson(&'static str),

    #[error("theorem hypotheses not met: cover is not flagged tame")]
    NotTame,

    #[error("invalid cuspidal datum {id}: {reason}")]
    InvalidCuspidal { id: String, reason: String },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("homogeneity hypothesis not satisfied under any tested arrangement")]
    HomogeneityFailed,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A division the theory guarantees to be exact left a remainder.
    #[error("integrity error: {what}: {numerator} is not divisible by {denominator}")]
    Integrity {
        what: &'static str,
        numerator: u64,
        denominator: u64,
    },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}
