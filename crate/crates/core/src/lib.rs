//! Split conformal prediction and its multi split aggregation.
//!
//! A split conformal set trains a model on one part of the data and
//! calibrates a score threshold on the other. Because the result depends on
//! the random split, [`aggregate`] repeats this over `B` splits at a deflated
//! level and keeps the points covered by more than a `τ` fraction of the
//! single split sets. The level is calibrated with a Markov-type bound on the
//! number of excluding splits, optionally sharpened by a smoothing parameter
//! `λ`. [`crossconf`] provides cross-conformal, leave-one-out and jackknife+
//! sets; [`bench`] reproduces coverage/width comparisons.
//!
//! ```
//! use msconformal::aggregate::{multi_split_set, MultiSplitConfig};
//! use msconformal::dataset::Dataset;
//! use msconformal::scores::ScoreSpec;
//!
//! let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 10.0]).collect();
//! let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + (r[0] * 7.0).sin()).collect();
//! let data = Dataset::from_rows(&rows, y).unwrap();
//!
//! let config = MultiSplitConfig::leftskewed(11, 29, ScoreSpec::residual(0.01), 0.1, 42);
//! let set = multi_split_set(&data, &config, &[3.0]).unwrap();
//! // every split runs at the full level 0.1 with m = 29, so the set is bounded
//! assert!(set.is_bounded());
//! assert!(set.width() > 0.0);
//! ```
//!
//! Parallel loops use rayon when the `parallel` feature is enabled (the
//! default); see [`par::Execution`].

pub mod aggregate;
pub mod bench;
pub mod conformal;
pub mod crossconf;
pub mod dataset;
pub mod error;
pub mod interval;
pub mod learners;
pub mod par;
pub mod scores;
pub mod split;

pub use aggregate::{
    aggregate_intervals, check_lambda_condition, markov_bound, multi_split_set, per_split_level, MultiSplitConfig,
    MultiSplitPredictor,
};
pub use conformal::{conformal_quantile, split_conformal_set, CalibratedSplit, ConformalQuantile, SplitPrediction};
pub use crossconf::{cross_conformal_set, jackknife_plus_interval, loo_conformal_set, FoldPlan, LeaveOneOut};
pub use dataset::{Dataset, ResponseColumn};
pub use error::{Error, Result};
pub use interval::{Interval, PredictionSet};
pub use par::Execution;
pub use scores::{calibration_scores, fit_score, score_one, FittedScore, ScoreSpec, ScoreVector};
pub use split::{make_split_plans, SplitPlan};
