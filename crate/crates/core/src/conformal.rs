//! Split conformal prediction.
//!
//! With calibration scores `R_1, …, R_m` sorted non-decreasingly, the
//! threshold at level `α` is the `⌈(1−α)(m+1)⌉`-th order statistic, or `+∞`
//! when that index exceeds `m`. The prediction set is `{y : R(x, y) ≤ R_α}`,
//! computed by inverting the score in closed form.

use crate::dataset::Dataset;
use crate::error::{check_level, Error, Result};
use crate::interval::PredictionSet;
use crate::scores::{calibration_scores, fit_score, Band, FittedScore, ScoreSpec, ScoreVector};
use crate::split::SplitPlan;

/// Slack used when rounding `(1−α)(m+1)` up, so that exact multiples of
/// `1/(m+1)` are not pushed to the next index by floating-point error.
const INDEX_SLACK: f64 = 1e-9;

/// `R_α` together with the order-statistic index that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalQuantile {
    /// `R_α`, or `+∞` when `index > m`.
    pub value: f64,
    /// `⌈(1−α)(m+1)⌉`, 1-based.
    pub index: usize,
    pub m: usize,
    pub alpha: f64,
}

impl ConformalQuantile {
    pub fn is_degenerate(&self) -> bool {
        self.index > self.m
    }
}

/// `⌈(1−α)(m+1)⌉`.
pub fn quantile_index(alpha: f64, m: usize) -> usize {
    (((1.0 - alpha) * (m + 1) as f64 - INDEX_SLACK).ceil() as usize).max(1)
}

fn quantile_from_sorted(sorted: &[f64], alpha: f64) -> Result<ConformalQuantile> {
    check_level("alpha", alpha)?;
    let m = sorted.len();
    if m == 0 {
        return Err(Error::Size("conformal quantile needs at least one score".into()));
    }
    let index = quantile_index(alpha, m);
    let value = if index > m { f64::INFINITY } else { sorted[index - 1] };
    Ok(ConformalQuantile { value, index, m, alpha })
}

fn sorted_scores(scores: &ScoreVector) -> Vec<f64> {
    let mut sorted = scores.values().to_vec();
    // stable: tied scores keep calibration order
    sorted.sort_by(f64::total_cmp);
    sorted
}

/// The conformal quantile `R_α` of a calibration score vector.
pub fn conformal_quantile(scores: &ScoreVector, alpha: f64) -> Result<ConformalQuantile> {
    quantile_from_sorted(&sorted_scores(scores), alpha)
}

/// A single split prediction set with the quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPrediction {
    pub set: PredictionSet,
    pub quantile: ConformalQuantile,
    /// `μ̂(x)` or the quantile pair at the query point.
    pub band: Band,
}

/// A fitted and calibrated split, reusable across query points and levels.
#[derive(Debug, Clone)]
pub struct CalibratedSplit {
    fitted: FittedScore,
    sorted: Vec<f64>,
}

impl CalibratedSplit {
    /// Fits on `L` and scores `I` for one split plan.
    pub fn calibrate(data: &Dataset, plan: &SplitPlan, spec: &ScoreSpec) -> Result<Self> {
        let fitted = fit_score(data, plan, spec)?;
        let scores = calibration_scores(data, plan, &fitted)?;
        Ok(CalibratedSplit::from_parts(fitted, &scores))
    }

    pub fn from_parts(fitted: FittedScore, scores: &ScoreVector) -> Self {
        CalibratedSplit {
            fitted,
            sorted: sorted_scores(scores),
        }
    }

    pub fn fitted(&self) -> &FittedScore {
        &self.fitted
    }

    /// Calibration scores in non-decreasing order.
    pub fn sorted_scores(&self) -> &[f64] {
        &self.sorted
    }

    pub fn quantile(&self, alpha: f64) -> Result<ConformalQuantile> {
        quantile_from_sorted(&self.sorted, alpha)
    }

    pub fn predict(&self, x: &[f64], alpha: f64) -> Result<SplitPrediction> {
        let quantile = self.quantile(alpha)?;
        let band = self.fitted.band(x)?;
        Ok(SplitPrediction {
            set: band.invert(quantile.value)?,
            quantile,
            band,
        })
    }
}

/// Split conformal prediction set `C_α(x_new)` for one split plan.
pub fn split_conformal_set(
    data: &Dataset,
    plan: &SplitPlan,
    spec: &ScoreSpec,
    alpha: f64,
    x_new: &[f64],
) -> Result<SplitPrediction> {
    check_level("alpha", alpha)?;
    CalibratedSplit::calibrate(data, plan, spec)?.predict(x_new, alpha)
}
