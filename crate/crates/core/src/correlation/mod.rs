//! Estimators for acceptance probabilities, correlation functions,
//! clustering and the covariance constant.

mod cluster;
mod estimate;
mod pair;

pub use cluster::{clustering_gap, ClusteringReport, GapRow, CLUSTER_BOUND_CONSTANT};
pub use estimate::{
    estimate_rbar, fit_decay, integrate_profile, lattice_r1_decay, lattice_r1_profile, r1_profile, DecayFit, ProbabilityEstimate,
    ProfileWindow,
};
pub use pair::{
    estimate_c_corr, estimate_c_var, moments_from_correlations, spatial_pair_correlation, BinnedCorrelation, CEstimate, PredictedMoments,
};
