//! Multi split conformal prediction.
//!
//! `B` split conformal sets are built at a deflated level `β` and a point `y`
//! is kept when strictly more than `τ·B` of them contain it. With
//! `k = B − ⌊τB⌋` and smoothing parameter `λ`, the per-split level is
//! `β = α(k + λ)/B`, which makes the Markov-type bound
//! `P(V_β ≥ k) ≤ Bβ/(k + λ)` equal to `α`.
//!
//! `λ = 0` needs no assumption. `λ > 0` is a user assertion about the
//! distribution of the vote count `V_β` (see [`check_lambda_condition`]); it
//! cannot be verified from data at prediction time, and sets built with
//! `λ > 0` carry the coverage guarantee only under that assertion.

use std::cmp::Ordering;

use crate::conformal::{CalibratedSplit, SplitPrediction};
use crate::dataset::Dataset;
use crate::error::{check_level, Error, Result};
use crate::interval::{Interval, PredictionSet};
use crate::par::{try_map_indexed, Execution};
use crate::scores::ScoreSpec;
use crate::split::{make_split_plans_with_sizes, SplitPlan};

/// Slack for `⌊τB⌋` so that `τ = j/B` typed as a decimal maps to `j`.
const THRESHOLD_SLACK: f64 = 1e-9;

/// `⌊τB⌋`, the largest vote count that does not exceed the threshold.
fn votes_at_threshold(tau: f64, splits: usize) -> usize {
    (tau * splits as f64 + THRESHOLD_SLACK).floor().max(0.0) as usize
}

fn check_threshold(tau: f64, splits: usize) -> Result<()> {
    if splits == 0 {
        return Err(Error::parameter("B", "number of splits must be at least 1"));
    }
    let top = (splits - 1) as f64 / splits as f64;
    if !(tau >= 0.0 && tau <= top + THRESHOLD_SLACK) {
        return Err(Error::parameter(
            "tau",
            format!("must lie in [0, (B-1)/B] = [0, {top}], got {tau}"),
        ));
    }
    Ok(())
}

/// `k = B − ⌊τB⌋`: a point is excluded once `k` splits exclude it.
pub fn exclusion_count(tau: f64, splits: usize) -> Result<usize> {
    check_threshold(tau, splits)?;
    Ok(splits - votes_at_threshold(tau, splits))
}

/// `⌊τB⌋ + 1`: votes needed for membership (`Π > τ`).
pub fn min_count(tau: f64, splits: usize) -> Result<usize> {
    check_threshold(tau, splits)?;
    Ok(votes_at_threshold(tau, splits) + 1)
}

/// The exact ratio `(k + λ)/B` in lowest terms, so `β = α·num/den`.
pub fn level_factor(tau: f64, lambda: usize, splits: usize) -> Result<(usize, usize)> {
    let k = exclusion_count(tau, splits)?;
    let num = k + lambda;
    let g = gcd(num, splits);
    Ok((num / g, splits / g))
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Per-split level `β = α(k + λ)/B`.
pub fn per_split_level(alpha: f64, tau: f64, lambda: usize, splits: usize) -> Result<f64> {
    check_level("alpha", alpha)?;
    let (num, den) = level_factor(tau, lambda, splits)?;
    let beta = alpha * (num as f64 / den as f64);
    if beta >= 1.0 {
        return Err(Error::parameter(
            "lambda",
            format!("per-split level α(k+λ)/B = {beta} must stay below 1"),
        ));
    }
    Ok(beta)
}

/// `min(1, Bβ/(k + λ))`, the bound on `P(V_β ≥ k)`.
pub fn markov_bound(splits: usize, beta: f64, k: usize, lambda: usize) -> f64 {
    (splits as f64 * beta / (k + lambda) as f64).min(1.0)
}

/// Points contained in at least `min_count` of `sets`.
///
/// Every finite endpoint becomes an event (+1 at a lower endpoint, −1 just
/// past an upper endpoint). Events are sorted by coordinate with +1 events
/// first at equal coordinates, so intervals sharing an endpoint both count
/// there. The running count starts at the number of sets unbounded below.
pub fn aggregate_intervals(sets: &[PredictionSet], min_count: usize) -> Result<PredictionSet> {
    if min_count == 0 || min_count > sets.len() {
        return Err(Error::parameter(
            "min_count",
            format!("must lie in 1..={}, got {min_count}", sets.len()),
        ));
    }
    let mut count = 0usize;
    let mut events: Vec<(f64, i32)> = Vec::new();
    for iv in sets.iter().flat_map(|s| s.intervals()) {
        if iv.lo() == f64::NEG_INFINITY {
            count += 1;
        } else {
            events.push((iv.lo(), 1));
        }
        if iv.hi() != f64::INFINITY {
            events.push((iv.hi(), -1));
        }
    }
    events.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => b.1.cmp(&a.1),
        o => o,
    });

    let mut out = Vec::new();
    let mut start = (count >= min_count).then_some(f64::NEG_INFINITY);
    for (x, delta) in events {
        if delta > 0 {
            count += 1;
            if count == min_count {
                start = Some(x);
            }
        } else {
            if count == min_count {
                if let Some(lo) = start.take() {
                    out.push(Interval::new(lo, x)?);
                }
            }
            count -= 1;
        }
    }
    if let Some(lo) = start {
        out.push(Interval::new(lo, f64::INFINITY)?);
    }
    Ok(PredictionSet::from_intervals(out))
}

/// Parameters of a multi split run.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSplitConfig {
    /// Number of splits `B`.
    pub splits: usize,
    pub tau: f64,
    pub lambda: usize,
    pub alpha: f64,
    /// Calibration size `m` of each split.
    pub per_split_m: Vec<usize>,
    /// Conformity score of each split.
    pub per_split_score: Vec<ScoreSpec>,
    pub seed: u64,
}

impl MultiSplitConfig {
    /// Same `m` and score for every split.
    pub fn homogeneous(
        splits: usize,
        m: usize,
        score: ScoreSpec,
        tau: f64,
        lambda: usize,
        alpha: f64,
        seed: u64,
    ) -> Self {
        MultiSplitConfig {
            splits,
            tau,
            lambda,
            alpha,
            per_split_m: vec![m; splits],
            per_split_score: vec![score; splits],
            seed,
        }
    }

    /// `τ = (B−1)/(2B)`, `λ = (B−1)/2` (integer division for even `B`);
    /// each split then runs at the full level `α` when `B` is odd.
    pub fn leftskewed(splits: usize, m: usize, score: ScoreSpec, alpha: f64, seed: u64) -> Self {
        let (tau, lambda) = leftskewed_params(splits);
        MultiSplitConfig::homogeneous(splits, m, score, tau, lambda, alpha, seed)
    }

    pub fn k(&self) -> Result<usize> {
        exclusion_count(self.tau, self.splits)
    }

    pub fn min_count(&self) -> Result<usize> {
        min_count(self.tau, self.splits)
    }

    pub fn beta(&self) -> Result<f64> {
        per_split_level(self.alpha, self.tau, self.lambda, self.splits)
    }

    pub fn validate(&self) -> Result<()> {
        self.beta()?;
        if self.per_split_m.len() != self.splits || self.per_split_score.len() != self.splits {
            return Err(Error::Size(format!(
                "expected {} per-split sizes and scores, got {} and {}",
                self.splits,
                self.per_split_m.len(),
                self.per_split_score.len()
            )));
        }
        self.per_split_score.iter().try_for_each(ScoreSpec::validate)
    }

    pub fn plans(&self, n: usize) -> Result<Vec<SplitPlan>> {
        make_split_plans_with_sizes(n, &self.per_split_m, self.seed)
    }
}

/// `((B−1)/(2B), ⌊(B−1)/2⌋)`.
pub fn leftskewed_params(splits: usize) -> (f64, usize) {
    let b = splits.max(1);
    ((b - 1) as f64 / (2 * b) as f64, (b - 1) / 2)
}

/// `B` calibrated splits plus the aggregation rule; predicts many points.
#[derive(Debug, Clone)]
pub struct MultiSplitPredictor {
    splits: Vec<CalibratedSplit>,
    beta: f64,
    min_count: usize,
}

impl MultiSplitPredictor {
    /// Draws the configured split plans and calibrates each split.
    pub fn calibrate(data: &Dataset, config: &MultiSplitConfig, exec: Execution) -> Result<Self> {
        config.validate()?;
        let plans = config.plans(data.len())?;
        Self::with_plans(
            data,
            &plans,
            &config.per_split_score,
            config.alpha,
            config.tau,
            config.lambda,
            exec,
        )
    }

    /// Calibrates on caller-supplied split plans.
    pub fn with_plans(
        data: &Dataset,
        plans: &[SplitPlan],
        scores: &[ScoreSpec],
        alpha: f64,
        tau: f64,
        lambda: usize,
        exec: Execution,
    ) -> Result<Self> {
        if plans.len() != scores.len() {
            return Err(Error::Size(format!(
                "{} split plans but {} score specs",
                plans.len(),
                scores.len()
            )));
        }
        let splits = plans.len();
        let beta = per_split_level(alpha, tau, lambda, splits)?;
        let min_count = min_count(tau, splits)?;
        let splits = try_map_indexed(exec, splits, |b| {
            CalibratedSplit::calibrate(data, &plans[b], &scores[b]).map_err(|e| Error::Split {
                index: b,
                source: Box::new(e),
            })
        })?;
        Ok(MultiSplitPredictor {
            splits,
            beta,
            min_count,
        })
    }

    pub fn from_calibrated(splits: Vec<CalibratedSplit>, alpha: f64, tau: f64, lambda: usize) -> Result<Self> {
        let beta = per_split_level(alpha, tau, lambda, splits.len())?;
        let min_count = min_count(tau, splits.len())?;
        Ok(MultiSplitPredictor {
            splits,
            beta,
            min_count,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn splits(&self) -> &[CalibratedSplit] {
        &self.splits
    }

    /// The `B` single split sets `C^[b]_β(x)`.
    pub fn split_sets(&self, x: &[f64]) -> Result<Vec<SplitPrediction>> {
        self.splits
            .iter()
            .enumerate()
            .map(|(b, s)| {
                s.predict(x, self.beta).map_err(|e| Error::Split {
                    index: b,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// `{y : Π_β(y) > τ}`.
    pub fn predict(&self, x: &[f64]) -> Result<PredictionSet> {
        let sets: Vec<PredictionSet> = self.split_sets(x)?.into_iter().map(|p| p.set).collect();
        aggregate_intervals(&sets, self.min_count)
    }
}

/// Multi split conformal prediction set `C^τ_α(x_new)`.
pub fn multi_split_set(data: &Dataset, config: &MultiSplitConfig, x_new: &[f64]) -> Result<PredictionSet> {
    MultiSplitPredictor::calibrate(data, config, Execution::default())?.predict(x_new)
}

/// Evaluates the smoothing condition on a vote-count pmf
/// `pmf[v] = P(V_β = v)`, `v = 0..=B`:
///
/// `Σ_{u=0}^{k−1} P(V ∈ [k−u, k)) ≥ Σ_{u=0}^{λ} P(V ∈ [k, k+u))`.
pub fn check_lambda_condition(pmf: &[f64], k: usize, lambda: usize) -> Result<bool> {
    if pmf.len() < 2 {
        return Err(Error::Size("pmf must cover V = 0..=B with B >= 1".into()));
    }
    let splits = pmf.len() - 1;
    if pmf.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Err(Error::Format("pmf entries must be non-negative".into()));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Format(format!("pmf sums to {total}, not 1")));
    }
    if k == 0 || k > splits {
        return Err(Error::parameter("k", format!("must lie in 1..={splits}, got {k}")));
    }
    let mass = |lo: usize, hi: usize| -> f64 {
        // P(V ∈ [lo, hi)) with hi clipped to B+1
        pmf[lo.min(pmf.len())..hi.min(pmf.len())].iter().sum()
    };
    let lhs: f64 = (0..k).map(|u| mass(k - u, k)).sum();
    let rhs: f64 = (0..=lambda).map(|u| mass(k, k + u)).sum();
    Ok(lhs + 1e-12 >= rhs)
}

/// `P(V ≥ k)` under a vote-count pmf.
pub fn vote_tail(pmf: &[f64], k: usize) -> f64 {
    pmf.iter().skip(k).sum()
}
