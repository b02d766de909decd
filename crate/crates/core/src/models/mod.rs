//! Downstream models: spherical mixtures for team identification and
//! logistic regression for possession prediction.

pub mod features;
pub mod gmm;
pub mod identity;
pub mod logistic;
pub mod possession;

pub use features::{build_features, FeatureKind, FeatureVector};
pub use gmm::{fit_spherical_gmm, gmm_log_likelihood, gmm_mean_gradient, SphericalGmm};
pub use identity::{
    accuracy_vs_sample_size, classify_team, kfold_team_identity, IdentityReport, IdentityTable,
    SampleSizePoint,
};
pub use logistic::{fit_logistic, LogisticModel, LogisticOptions};
pub use possession::{possession_benchmark, BenchmarkRow};
