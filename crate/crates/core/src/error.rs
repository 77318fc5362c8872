use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix rows have unequal lengths")]
    RaggedMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("linear part not unimodular: |det| = {0}")]
    NotUnimodular(String),
    #[error("matrix has no finite order within bound {0}")]
    InfiniteOrder(usize),
    #[error("prime {q} is not coprime to the group order {order}")]
    NotCoprime { q: u64, order: usize },
    #[error("group order {0} is not prime")]
    OrderNotPrime(usize),
    #[error("auxiliary prime must differ from the group order {0}")]
    SamePrime(u64),
    #[error("group closure exceeds bound {0}")]
    ClosureTooLarge(usize),
    #[error("unknown catalog group '{0}'")]
    UnknownGroup(String),
    #[error("holonomy group is not cyclic (order {0})")]
    NotCyclic(usize),
    #[error("invalid line representation: {0}")]
    InvalidLineRep(String),
    #[error("unsupported base '{0}' for this operation")]
    UnsupportedBase(String),
    #[error("bundles live over different bases ('{0}' vs '{1}')")]
    DifferentBases(String, String),
    #[error("total dimension {total} must exceed base dimension {base}")]
    TotalDimTooSmall { total: usize, base: usize },
    #[error("denominator {0} exceeds the decidable bound {1}")]
    DenominatorTooLarge(String, u64),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Internal failures signal a broken invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
