//! Four-photon polarization entanglement from double-pair emission.
//!
//! The library builds the post-selected four-photon state symbolically
//! (creation-operator polynomials through beam splitters and coincidence
//! filtering), evaluates analyzer statistics and the four-party
//! correlation function, and analyzes locality: correlations over two
//! settings per beam form a 2×2×2×2 tensor whose basis-expansion l1 norm
//! decides whether a local hidden-variable model exists. The crate can
//! reconstruct such a model explicitly when one exists, certify the
//! violation through an independently enumerated Bell expression when one
//! does not, and search the eight analyzer phases for the strongest
//! violation.

pub mod bell;
pub mod error;
pub mod fock;
pub mod lhv;
pub mod measurement;
pub mod optimize;
pub mod state;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

pub use bell::{
    lhv_bound, quantum_value, saturating_expression, BellExpression, DeterministicStrategy,
};
pub use fock::{
    beam_split, pdc_term, pdc_term_bounded, postselect_coincidence, rotate_polarization, Beam,
    CreationPolynomial, Mode, Monomial, Polarization, PumpAmplitude, DEFAULT_MAX_PAIR_ORDER,
    PRUNE_TOLERANCE,
};
pub use lhv::{
    critical_visibility, expand_in_basis, lhv_l1, quantum_tensor, reconstruct_lhv,
    reconstruct_tensor, BasisCoefficients, CorrelationTensor, LhvModel, SettingChoices,
    StrategyVector, TensorReport, LHV_BOUNDARY_TOLERANCE,
};
pub use measurement::{
    amplitude, analyzer_ket, closed_form, CorrelationSource, NoiseMixture, Outcome, PhaseSettings,
    Sign,
};
pub use optimize::{optimize_settings, CorrelationKernel, OptimizeConfig, OptimizeOutcome};
pub use state::{
    double_pair_pipeline, to_state, PipelineStages, PolarizationPattern, PostselectedState,
};
