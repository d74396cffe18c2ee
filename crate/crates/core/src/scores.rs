//! Conformity scores and calibration score vectors.
//!
//! Two scores are supported:
//!
//! * absolute residual, `R = |y − μ̂(x)|`, with a ridge point model;
//! * conformalized quantile regression (CQR),
//!   `R = max{q̂_γ(x) − y, y − q̂_{1−γ}(x)}`, with k-NN quantile models.
//!
//! Models are always fitted on the training rows `L` of a [`SplitPlan`]
//! only; calibration rows never influence the fit.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::PredictionSet;
use crate::learners::{default_k, fit_ridge_rows, KnnQuantileModel, RidgeModel};
use crate::split::SplitPlan;

/// Which conformity score to use, with its learner settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreSpec {
    /// `|y − μ̂(x)|` with ridge regression at a fixed penalty.
    AbsoluteResidual { penalty: f64 },
    /// CQR band from k-NN quantiles at levels `gamma` and `1 − gamma`.
    /// `k = None` uses `⌈√w⌉`.
    Cqr { gamma: f64, k: Option<usize> },
}

impl ScoreSpec {
    pub fn residual(penalty: f64) -> Self {
        ScoreSpec::AbsoluteResidual { penalty }
    }

    pub fn cqr(gamma: f64) -> Self {
        ScoreSpec::Cqr { gamma, k: None }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScoreSpec::AbsoluteResidual { penalty } => {
                if penalty.is_finite() && penalty >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::parameter(
                        "penalty",
                        format!("must be finite and non-negative, got {penalty}"),
                    ))
                }
            }
            ScoreSpec::Cqr { gamma, k } => {
                if !(gamma > 0.0 && gamma <= 0.5) {
                    return Err(Error::parameter("gamma", format!("must lie in (0, 0.5], got {gamma}")));
                }
                if k == Some(0) {
                    return Err(Error::parameter("k", "must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

/// Calibration scores `R_1, …, R_m` in calibration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
}

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("conformity score is NaN".into()));
        }
        Ok(ScoreVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Learner output at a query point: a point prediction or a quantile band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    Center(f64),
    Quantiles { lower: f64, upper: f64 },
}

impl Band {
    pub fn score(&self, y: f64) -> f64 {
        match *self {
            Band::Center(mu) => (y - mu).abs(),
            Band::Quantiles { lower, upper } => (lower - y).max(y - upper),
        }
    }

    /// `{y : score(y) ≤ radius}` in closed form.
    pub fn invert(&self, radius: f64) -> Result<PredictionSet> {
        if radius == f64::INFINITY {
            return Ok(PredictionSet::real_line());
        }
        match *self {
            Band::Center(mu) => PredictionSet::from_bounds(mu - radius, mu + radius),
            Band::Quantiles { lower, upper } => PredictionSet::from_bounds(lower - radius, upper + radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Point(RidgeModel),
    Quantiles {
        lower: KnnQuantileModel,
        upper: KnnQuantileModel,
    },
}

/// A score whose learner(s) have been fitted on a training part `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedScore {
    spec: ScoreSpec,
    model: Model,
    train_rows: Vec<usize>,
    dim: usize,
}

impl FittedScore {
    pub fn spec(&self) -> &ScoreSpec {
        &self.spec
    }

    pub fn train_rows(&self) -> &[usize] {
        &self.train_rows
    }

    pub fn point_model(&self) -> Option<&RidgeModel> {
        match &self.model {
            Model::Point(m) => Some(m),
            Model::Quantiles { .. } => None,
        }
    }

    pub(crate) fn from_ridge(model: RidgeModel, train_rows: Vec<usize>) -> Self {
        FittedScore {
            spec: ScoreSpec::residual(model.penalty),
            dim: model.dim(),
            model: Model::Point(model),
            train_rows,
        }
    }

    /// Learner output at `x`.
    pub fn band(&self, x: &[f64]) -> Result<Band> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let band = match &self.model {
            Model::Point(m) => Band::Center(m.predict_unchecked(x)),
            Model::Quantiles { lower, upper } => Band::Quantiles {
                lower: lower.predict_unchecked(x),
                upper: upper.predict_unchecked(x),
            },
        };
        match band {
            Band::Center(mu) if mu.is_finite() => Ok(band),
            Band::Quantiles { lower, upper } if lower.is_finite() && upper.is_finite() => Ok(band),
            _ => Err(Error::Numerical("learner returned a non-finite prediction".into())),
        }
    }
}

/// Fits the learner(s) of `spec` on the training rows of `plan`.
pub fn fit_score(data: &Dataset, plan: &SplitPlan, spec: &ScoreSpec) -> Result<FittedScore> {
    spec.validate()?;
    if plan.n() != data.len() {
        return Err(Error::Size(format!(
            "split plan covers {} rows but the dataset has {}",
            plan.n(),
            data.len()
        )));
    }
    fit_score_rows(data, plan.train(), spec)
}

/// Fits the learner(s) of `spec` on an arbitrary set of rows.
pub fn fit_score_rows(data: &Dataset, rows: &[usize], spec: &ScoreSpec) -> Result<FittedScore> {
    spec.validate()?;
    let model = match *spec {
        ScoreSpec::AbsoluteResidual { penalty } => Model::Point(fit_ridge_rows(data, rows, penalty)?),
        ScoreSpec::Cqr { gamma, k } => {
            let k = k.unwrap_or_else(|| default_k(rows.len()));
            Model::Quantiles {
                lower: KnnQuantileModel::fit_rows(data, rows, k, gamma)?,
                upper: KnnQuantileModel::fit_rows(data, rows, k, 1.0 - gamma)?,
            }
        }
    };
    Ok(FittedScore {
        spec: *spec,
        model,
        train_rows: rows.to_vec(),
        dim: data.dim(),
    })
}

/// Conformity score of the pair `(x, y)`.
pub fn score_one(fs: &FittedScore, x: &[f64], y: f64) -> Result<f64> {
    Ok(fs.band(x)?.score(y))
}

/// Scores of the calibration rows of `plan`, in calibration order.
pub fn calibration_scores(data: &Dataset, plan: &SplitPlan, fs: &FittedScore) -> Result<ScoreVector> {
    if fs.train_rows != plan.train() {
        return Err(Error::Format(
            "fitted score was not trained on this split plan's training rows".into(),
        ));
    }
    let values = plan
        .calib()
        .iter()
        .map(|&j| score_one(fs, data.row(j), data.response()[j]))
        .collect::<Result<Vec<f64>>>()?;
    ScoreVector::new(values)
}
