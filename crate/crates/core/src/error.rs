use thiserror::Error;

/// Everything that can go wrong when building states or hunting for models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `pdc_term` was asked for an expansion order past its configured cap.
    #[error("pair-term order {order} exceeds the maximum {max}")]
    PairOrderTooLarge { order: u32, max: u32 },

    /// The polynomial already contains primed output modes, so it has been
    /// through the splitters once.
    #[error("polynomial already contains primed modes; beams are already split")]
    AlreadySplit,

    /// A monomial does not place exactly one photon in each beam.
    #[error("monomial {0} is not a fourfold coincidence")]
    NotCoincidence(String),

    /// The polynomial or amplitude set has zero norm, so no state exists.
    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,

    /// A polarization pattern string was not four H/V characters.
    #[error("{0:?} is not a four-character H/V pattern")]
    BadPattern(String),

    /// Visibility must lie in [0, 1].
    #[error("visibility {0} is outside [0, 1]")]
    VisibilityRange(f64),

    /// Strategy vector indices run from 1 to 4.
    #[error("strategy vector index {0} is outside 1..=4")]
    BadStrategyIndex(u8),

    /// Model weights must form a probability distribution.
    #[error("invalid model weights: {0}")]
    BadModelWeights(String),

    /// The coefficient l1 norm exceeds 1, so no local model reproduces the
    /// tensor.
    #[error("no local model: coefficient l1 norm {l1} exceeds 1")]
    NoLhvModel { l1: f64 },

    /// An optimizer setting is unusable.
    #[error("bad optimizer configuration: {0}")]
    BadConfig(String),

    /// The optimizer objective produced a non-finite value.
    #[error("objective is not finite at the supplied settings")]
    NonFiniteObjective,
}
