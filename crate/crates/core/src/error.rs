use thiserror::Error;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input spans an affine subspace of dimension `rank` < `dim`.
    #[error("degenerate input: affine rank {rank} in dimension {dim}")]
    Degenerate { rank: usize, dim: usize },

    /// Two facet hyperplanes are parallel within the angular tolerance.
    #[error("near-parallel facets: angle {angle:e} below tolerance")]
    NearParallel { angle: f64 },

    /// A hypothesis of a geometric lemma does not hold for the given instance.
    #[error("hypothesis `{hypothesis}` not satisfied: {detail}")]
    Hypothesis { hypothesis: &'static str, detail: String },

    /// An existence guarantee failed to materialize; points at numerical degeneracy.
    #[error("lemma violation: {0}")]
    LemmaViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
