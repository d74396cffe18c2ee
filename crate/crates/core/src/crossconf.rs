//! Cross-conformal prediction, leave-one-out conformal sets and jackknife+.
//!
//! Cross-conformal prediction is multi split prediction where the `B`
//! calibration sets are the folds of one random partition and each training
//! set is the complement of its fold.
//!
//! The leave-one-out set keeps `y` when strictly more than a fraction
//! `(α(n+1) − 1)/n` of the leave-one-out intervals `μ̂_{−i}(x) ± R_i`
//! contain it, `R_i` being the score of point `i` under the model fitted
//! without it. When `α(n+1) < 1` that threshold is negative and the set is
//! the whole real line. Its coverage guarantee is `1 − 2α`.

use crate::aggregate::{aggregate_intervals, MultiSplitPredictor};
use crate::dataset::Dataset;
use crate::error::{check_level, Error, Result};
use crate::interval::PredictionSet;
use crate::learners::RidgeSums;
use crate::par::{try_map_indexed, Execution};
use crate::scores::{fit_score_rows, score_one, Band, FittedScore, ScoreSpec};
use crate::split::{permutation, stream_rng, SplitPlan};

const COUNT_SLACK: f64 = 1e-9;

/// Disjoint folds covering `0..n`; sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    folds: Vec<Vec<usize>>,
    n: usize,
}

impl FoldPlan {
    /// Splits a random permutation of `0..n` into `folds` consecutive
    /// blocks; the first `n mod folds` blocks get one extra index.
    pub fn random(n: usize, folds: usize, seed: u64) -> Result<Self> {
        if folds < 2 || folds > n {
            return Err(Error::Size(format!(
                "number of folds B must satisfy 2 <= B <= n, got B={folds} with n={n}"
            )));
        }
        let perm = permutation(n, &mut stream_rng(seed, 0));
        let (base, extra) = (n / folds, n % folds);
        let mut out = Vec::with_capacity(folds);
        let mut start = 0;
        for f in 0..folds {
            let len = base + usize::from(f < extra);
            let mut fold = perm[start..start + len].to_vec();
            fold.sort_unstable();
            out.push(fold);
            start += len;
        }
        Ok(FoldPlan { folds: out, n })
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// One split per fold: calibrate on the fold, train on its complement.
    pub fn split_plans(&self) -> Result<Vec<SplitPlan>> {
        self.folds
            .iter()
            .map(|fold| {
                let mut in_fold = vec![false; self.n];
                fold.iter().for_each(|&i| in_fold[i] = true);
                let train = (0..self.n).filter(|&i| !in_fold[i]).collect();
                SplitPlan::new(train, fold.clone(), self.n)
            })
            .collect()
    }
}

/// `B`-fold cross-conformal prediction set.
#[allow(clippy::too_many_arguments)]
pub fn cross_conformal_set(
    data: &Dataset,
    folds: usize,
    spec: &ScoreSpec,
    alpha: f64,
    tau: f64,
    lambda: usize,
    seed: u64,
    x_new: &[f64],
) -> Result<PredictionSet> {
    cross_conformal_predictor(data, folds, spec, alpha, tau, lambda, seed, Execution::default())?.predict(x_new)
}

/// Calibrated cross-conformal predictor, reusable across query points.
#[allow(clippy::too_many_arguments)]
pub fn cross_conformal_predictor(
    data: &Dataset,
    folds: usize,
    spec: &ScoreSpec,
    alpha: f64,
    tau: f64,
    lambda: usize,
    seed: u64,
    exec: Execution,
) -> Result<MultiSplitPredictor> {
    let plans = FoldPlan::random(data.len(), folds, seed)?.split_plans()?;
    MultiSplitPredictor::with_plans(data, &plans, &vec![*spec; folds], alpha, tau, lambda, exec)
}

/// The `n` leave-one-out models and their held-out scores.
#[derive(Debug, Clone)]
pub struct LeaveOneOut {
    models: Vec<FittedScore>,
    residuals: Vec<f64>,
}

impl LeaveOneOut {
    /// Fits one model per left-out point. Ridge residual scores reuse the
    /// full-data sufficient statistics with a rank-one downdate when `d < n`.
    pub fn fit(data: &Dataset, spec: &ScoreSpec, exec: Execution) -> Result<Self> {
        spec.validate()?;
        let n = data.len();
        if n < 2 {
            return Err(Error::Size(format!("leave-one-out needs n >= 2, got {n}")));
        }
        let all: Vec<usize> = (0..n).collect();
        let sums = match spec {
            ScoreSpec::AbsoluteResidual { .. } if data.dim() < n => Some(RidgeSums::from_rows(data, &all)),
            _ => None,
        };
        let fitted = try_map_indexed(exec, n, |i| {
            let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
            let model = match (&sums, spec) {
                (Some(s), ScoreSpec::AbsoluteResidual { penalty }) => {
                    let ridge = s.without(data.row(i), data.response()[i]).fit(*penalty)?;
                    FittedScore::from_ridge(ridge, rest)
                }
                _ => fit_score_rows(data, &rest, spec)?,
            };
            let r = score_one(&model, data.row(i), data.response()[i])?;
            Ok::<_, Error>((model, r))
        })?;
        let (models, residuals) = fitted.into_iter().unzip();
        Ok(LeaveOneOut { models, residuals })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Held-out scores `R_i`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// The `n` single-point sets `{y : R_{−i}(x, y) ≤ R_i}`.
    pub fn vote_sets(&self, x: &[f64]) -> Result<Vec<PredictionSet>> {
        self.models
            .iter()
            .zip(&self.residuals)
            .map(|(m, &r)| m.band(x)?.invert(r))
            .collect()
    }

    /// The leave-one-out conformal set at nominal level `α` (coverage
    /// guarantee `1 − 2α`).
    pub fn loo_set(&self, x: &[f64], alpha: f64) -> Result<PredictionSet> {
        check_level("alpha", alpha)?;
        let n = self.len();
        let needed = loo_min_count(alpha, n);
        if needed == 0 {
            return Ok(PredictionSet::real_line());
        }
        if needed > n {
            return Ok(PredictionSet::empty());
        }
        aggregate_intervals(&self.vote_sets(x)?, needed)
    }

    /// Jackknife+ interval at nominal level `α`: lower end is the
    /// `⌊α(n+1)⌋`-th smallest `μ̂_{−i}(x) − R_i`, upper end the
    /// `⌈(1−α)(n+1)⌉`-th smallest `μ̂_{−i}(x) + R_i`; out-of-range ranks give
    /// infinite endpoints.
    pub fn jackknife_plus(&self, x: &[f64], alpha: f64) -> Result<PredictionSet> {
        check_level("alpha", alpha)?;
        let n = self.len();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for (m, &r) in self.models.iter().zip(&self.residuals) {
            match m.band(x)? {
                Band::Center(mu) => {
                    lower.push(mu - r);
                    upper.push(mu + r);
                }
                Band::Quantiles { .. } => {
                    return Err(Error::parameter(
                        "score",
                        "jackknife+ requires the absolute residual score",
                    ))
                }
            }
        }
        lower.sort_by(f64::total_cmp);
        upper.sort_by(f64::total_cmp);
        let (lo_rank, hi_rank) = jackknife_ranks(alpha, n);
        let lo = if lo_rank == 0 {
            f64::NEG_INFINITY
        } else {
            lower[lo_rank - 1]
        };
        let hi = if hi_rank > n { f64::INFINITY } else { upper[hi_rank - 1] };
        PredictionSet::from_bounds(lo, hi)
    }
}

/// Votes needed for membership in the leave-one-out set: the smallest count
/// strictly above `α(n+1) − 1`, or 0 when that is negative.
pub fn loo_min_count(alpha: f64, n: usize) -> usize {
    let t = alpha * (n + 1) as f64 - 1.0;
    if t < -COUNT_SLACK {
        0
    } else {
        (t + COUNT_SLACK).floor() as usize + 1
    }
}

/// `(⌊α(n+1)⌋, ⌈(1−α)(n+1)⌉)`, 1-based ranks for jackknife+.
pub fn jackknife_ranks(alpha: f64, n: usize) -> (usize, usize) {
    let lo = (alpha * (n + 1) as f64 + COUNT_SLACK).floor().max(0.0) as usize;
    let hi = ((1.0 - alpha) * (n + 1) as f64 - COUNT_SLACK).ceil().max(1.0) as usize;
    (lo, hi)
}

/// Leave-one-out conformal set `C^LOO` at nominal level `α`.
pub fn loo_conformal_set(data: &Dataset, spec: &ScoreSpec, alpha: f64, x_new: &[f64]) -> Result<PredictionSet> {
    check_level("alpha", alpha)?;
    LeaveOneOut::fit(data, spec, Execution::default())?.loo_set(x_new, alpha)
}

/// Jackknife+ prediction interval at nominal level `α` with ridge at `penalty`.
pub fn jackknife_plus_interval(data: &Dataset, penalty: f64, alpha: f64, x_new: &[f64]) -> Result<PredictionSet> {
    check_level("alpha", alpha)?;
    LeaveOneOut::fit(data, &ScoreSpec::residual(penalty), Execution::default())?.jackknife_plus(x_new, alpha)
}
