use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid tree parameters k={k}, r={r} (need k >= 2 and r >= 1)")]
    InvalidParams { k: u64, r: u32 },

    #[error("vertex count of the complete {k}-tree of height {r} does not fit in 64 bits")]
    Overflow { k: u64, r: u32 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("the root has no parent")]
    RootHasNoParent,

    #[error("vertex {0} is a leaf and has no children")]
    LeafHasNoChildren(u64),

    #[error("path endpoints coincide (vertex {0})")]
    SameVertex(u64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("tree has {n} vertices, above the search cap of {cap}")]
    TooLarge { n: u64, cap: u64 },

    #[error("malformed schedule: {0}")]
    Malformed(String),
}
