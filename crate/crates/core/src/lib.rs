//! Numerical information geometry on finite measures.
//!
//! Finite measures live on discrete spaces or on quadrature grids of an
//! interval. On top of them the crate provides statistics with their
//! pushforwards and conditional expectations, finitely checkable probes of
//! the mixed topology on `[f₁, …, f_n, μ]`, parametrized measure models with
//! scores and integrability norms, covariant tensor fields including the
//! Fisher metric and the Amari–Chentsov tensor, and checks of monotonicity,
//! sufficiency and invariance under congruent embeddings.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, with `…F32` variants for single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measure;
pub mod model;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod statistic;
pub mod tensor;
pub mod topology;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
pub use measure::{
    dirac_approximate, integrate, integrate_map, lp_distance, lp_norm, rescale_reference, weak_contains, BaseMeasure,
    CellPartition, DiracCombination, FiniteMeasure, Location, SampleSpace, SpaceKind, StepFunction,
};
pub use model::{integrability_scan, regularity_probe, IntegrabilityScan, ParamBox, TangentDirection};
pub use scalar::Scalar;
pub use statistic::{
    compose, contraction_report, pushforward_function, pushforward_measure, ConditionalExpectation, ContractionReport,
    StatisticRule,
};
pub use tensor::{
    amari_chentsov, evaluate_tensor, fisher, pullback, strong_continuity_probe, Phi, StrongContinuityReport,
    TensorKind, WeakFunctional, Weight,
};
pub use topology::{
    converges_mixed, holder_bound_check, mixed_contains, push_mixed_point, pushforward_map_continuity_probe,
    ConvergenceReport, HolderReport, MixedNeighborhood, ProbeBanks, ProbeSettings, WeakNeighborhood,
};
pub use verify::{
    ac_monotonicity_probe, chentsov_invariance_residual, monotonicity_check, reference_independence_check,
    sufficiency_check, uniqueness_limit_probe, AcChainReport, LossReport, ReferenceIndependenceReport,
    SufficiencyReport, UniquenessReport,
};

pub type Measure = measure::Measure<f64>;
pub type MeasureF32 = measure::Measure<f32>;
pub type TestFunction = measure::TestFunction<f64>;
pub type TestFunctionF32 = measure::TestFunction<f32>;
pub type Statistic = statistic::Statistic<f64>;
pub type StatisticF32 = statistic::Statistic<f32>;
pub type MixedPoint = topology::MixedPoint<f64>;
pub type MixedPointF32 = topology::MixedPoint<f32>;
pub type ParametrizedModel = model::ParametrizedModel<f64>;
pub type ParametrizedModelF32 = model::ParametrizedModel<f32>;
pub type CovariantTensorField = tensor::CovariantTensorField<f64>;
pub type CovariantTensorFieldF32 = tensor::CovariantTensorField<f32>;
pub type CongruentEmbedding = verify::CongruentEmbedding<f64>;
pub type CongruentEmbeddingF32 = verify::CongruentEmbedding<f32>;
