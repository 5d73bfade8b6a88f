use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("instance too large: {0}")]
    Overflow(&'static str),

    #[error("malformed query: {0}")]
    MalformedQuery(String),

    #[error("database {database}: {reason}")]
    Retrieval { database: usize, reason: String },

    #[error("plan invariant violated: {0}")]
    PlanInvariant(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// `atoms` saturates at `u128::MAX`.
    #[error("enumeration infeasible: {atoms} atoms exceeds the limit of {limit}")]
    Infeasible { atoms: u128, limit: u128 },

    #[error("out of range: {0}")]
    OutOfRange(String),
}
