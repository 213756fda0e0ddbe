//! Cutoff analysis for families of product chains.
//!
//! The pieces are the Laplace-transform criterion for exponential sums
//! ([`laplace`]), the explicit cutoff-time formulas ([`formulas`]), the
//! finite-n trend test that stands in for limits ([`trend`]), family
//! construction ([`family`]) and the experiment drivers ([`experiment`]).

pub mod experiment;
pub mod family;
pub mod formulas;
pub mod laplace;
pub mod trend;

pub use experiment::{
    cutoff_report, experiment_heisenberg, experiment_randomized, CutoffReport, CutoffRow,
    HeisenbergExperiment, HeisenbergMode, RandomMode, RandomizedExperiment,
};
pub use family::{
    build_family, FactorRecipe, Family, FamilyKind, FamilyRow, FamilySpec, Sampler, WeightRule,
};
pub use formulas::{
    lemma_unln_probe, theorem_tn, theorem_tn_ln, theorem_un, theorem_un_ln, Direction, RateRule,
};
pub use laplace::{
    cutoff_criterion_scan, exp_sum_eval, exp_sum_mixing, lambda_tau, ExponentialSum, LambdaTau,
};
pub use trend::{trend_verdict, Trend, TrendConfig};
