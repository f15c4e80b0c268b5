//! Testing whether two tumors are clonally related from their somatic mutation profiles.
//!
//! The test conditions on the markers mutated in at least one tumor, fits the
//! clonality signal `xi` by constrained maximum likelihood, and refers the
//! likelihood-ratio statistic to an exact or Monte Carlo null in which matches
//! occur independently with probability `p / (2 - p)`.
//!
//! Model and likelihood code is generic over [`Scalar`] (`f32` or `f64`); the
//! null-reference, simulation and I/O layers work in `f64`. The aliases below
//! name the `f64` instantiations.

pub mod error;
pub mod inference;
pub mod model;
pub mod null;
pub mod optimize;
pub mod priors;
pub mod rng;
pub mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use inference::{
    conditional_log_likelihood, conditional_statistic, conditional_statistic_weight_form, match_weight,
    mle_xi_conditional, unconditional_log_likelihood, unconditional_statistic, unconditional_statistic_weight_form,
    ConditionalData, FitResult, MatchGroup, UnconditionalGroup, UnconditionalSummary,
};
pub use model::{
    derive_pair_observation, match_probability, pair_outcome_probabilities, ClonalitySignal, MarkerCatalog, MarkerId,
    MutationProfile, PairObservation, PairOutcomeDistribution,
};
pub use null::{
    calibrated_rejection, conditional_test, critical_value, exact_conditional_null, p_value, sample_conditional_null,
    sample_unconditional_null, test_conditional_data, CalibratedRejection, Method, NullDistribution, TestOptions,
    TestResult, UnconditionalNullCache,
};
pub use priors::{build_catalog, estimate_marginal_probability, DefaultAssignment, FrequencyRecord};
pub use rng::RngStream;
pub use scalar::Scalar;

pub type Catalog = MarkerCatalog<f64>;
pub type Observation = PairObservation<f64>;
pub type Signal = ClonalitySignal<f64>;
pub type Outcomes = PairOutcomeDistribution<f64>;
pub type Conditional = ConditionalData<f64>;
pub type Unconditional = UnconditionalSummary<f64>;
pub type Fit = FitResult<f64>;

pub type Catalog32 = MarkerCatalog<f32>;
pub type Signal32 = ClonalitySignal<f32>;
pub type Conditional32 = ConditionalData<f32>;
pub type Fit32 = FitResult<f32>;
