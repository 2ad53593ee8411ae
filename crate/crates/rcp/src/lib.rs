//! Retrospective counterfactual prediction.
//!
//! Given covariates `x`, a binary treatment `t` and the observed (factual)
//! outcome `y`, this crate predicts the *unobserved* potential outcome — the
//! value the unit would have seen under the opposite treatment — as a point
//! estimate together with a calibrated prediction interval. The key modeling
//! input is the cross-world correlation `rho = cor(Y(1), Y(0) | X)`, which is
//! not identifiable from data and is supplied by the user as a constant, a
//! covariate-indexed table, or a sensitivity grid.
//!
//! The pieces, bottom-up:
//!
//! * [`data`] — datasets, CSV ingestion, stratified train/calibration splits.
//! * [`forest`] — regression forests for conditional means and quantiles.
//! * [`conformal`] — per-arm conformalized quantile regression (CQR).
//! * [`estimator`] — the cross-world point estimator `mu_rho`, the `C_rho`
//!   interval, the bias-corrected `C_rho^{+CI}` interval, and the Gaussian
//!   conditional-mean oracle used to validate them.
//! * [`bootstrap`] — pairs bootstrap over the fitted pipeline.
//! * [`baselines`] — direct-outcome, CATE-adjusted and matching imputers.
//! * [`dgp`] — synthetic generators with known cross-world dependence and
//!   closed-form / numeric oracles.
//! * [`metrics`] — MSE, interval score, coverage, oracle gap.
//! * [`harness`] — seeded experiment grids and the CSV-facing CLI layer.
//!
//! Every fit, sample and experiment is a pure function of its seeds; parallel
//! and serial execution produce identical results. See the `examples/`
//! directory for one runnable walkthrough per capability.

// pub mod baselines;
pub mod bootstrap;
pub mod conformal;
pub mod data;
// pub mod dgp;
pub mod error;
pub mod estimator;
pub mod forest;
// pub mod harness;
// pub mod metrics;
pub mod seeding;
pub mod special;

pub use data::{ColumnSchema, Dataset, SplitPlan, Unit};
pub use error::RcpError;
pub use estimator::{CounterfactualPrediction, GaussianOracle, RcpPipeline, RhoSpec};
pub use forest::{ForestParams, MeanForest, QuantileForest};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, RcpError>;
