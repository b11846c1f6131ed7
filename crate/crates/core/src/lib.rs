//! Parameter estimation from truncated, grouped or censored frequency data.
//!
//! The central quantity is the distance of proportional variations
//! ([`dv`]), which compares how two distributions vary across a set of support
//! points through ratios only. It underlies a minimum-distance estimator
//! ([`mindist`]), model selection ([`selection`]) and a Monte-Carlo
//! goodness-of-fit test ([`gof`]). The auxiliary conditional distribution on a
//! truncation ([`auxiliary`]) gives a second estimator by moments or likelihood,
//! and both are combined for mixture initialization ([`mixture`]).

pub mod auxiliary;
pub mod dist;
pub mod dv;
pub mod error;
pub mod freq;
pub mod gof;
pub mod mindist;
pub mod mixture;
mod optim;
pub mod report;
pub mod reproduce;
pub mod selection;
mod serde_float;

pub use auxiliary::{
    allocate_missing, auxiliary, classical_estimate, estimate_aux_ml, estimate_aux_moment,
    estimate_aux_moment_with_mean, AuxiliaryDistribution,
};
pub use dist::{Density, DistributionModel, ExpFamilyForm, Family, FinitePmf, ModelTemplate};
pub use dv::{dv_decompose, dv_model, dv_tables, Decomposition, DvObjective, DvValue};
pub use error::{Error, Result};
pub use freq::{
    bin_sample, drop_zero, empirical_truncated, truncate, Binning, EmpiricalTruncated,
    FrequencyTable, Truncation,
};
pub use gof::{gof_test, GofResult, ReplicateScheme};
pub use mindist::{estimate_min_dv, EstimationReport, Method, OptimizerConfig};
pub use mixture::{
    estimate_mixture_init, estimate_tail_mean, split_merged, MixtureInit, MixtureSplit,
};
pub use selection::{
    aux_likelihood_decide, run_selection_experiment, select_model, Candidate, Decision,
    SelectionExperiment, SelectionResult, TruncationRule,
};
