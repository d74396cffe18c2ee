//! Monte Carlo marginal-coverage estimates on a linear-Gaussian model.
//!
//! Each repetition draws `n` fresh training pairs and one test pair from
//! `y = xᵀθ + σε` with `x ~ N(0, I_d)`, `ε ~ N(0, 1)`, builds the method's
//! prediction set for the test point and records whether it covers the test
//! response. Repetition `r` uses stream `r` of the seed.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::aggregate::MultiSplitConfig;
use crate::aggregate::MultiSplitPredictor;
use crate::conformal::CalibratedSplit;
use crate::crossconf::{cross_conformal_predictor, LeaveOneOut};
use crate::dataset::Dataset;
use crate::error::{check_level, Error, Result};
use crate::interval::PredictionSet;
use crate::learners::singular_value_penalty;
use crate::par::{try_map_indexed, Execution};
use crate::scores::ScoreSpec;
use crate::split::{make_split_plans, stream_rng};

/// Ridge penalty factor used by the simulator (`factor · c²`).
pub const SIM_RIDGE_FACTOR: f64 = 1e-3;

/// Linear model with standard Gaussian features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGaussianDgp {
    pub d: usize,
    /// Training sample size per repetition.
    pub n: usize,
    pub noise_sd: f64,
    pub coef_seed: u64,
    /// Multiplies the standard normal coefficient draws; 0 gives `y ≡ σε`.
    pub coef_scale: f64,
}

impl LinearGaussianDgp {
    pub fn new(d: usize, n: usize, noise_sd: f64, coef_seed: u64) -> Self {
        LinearGaussianDgp {
            d,
            n,
            noise_sd,
            coef_seed,
            coef_scale: 1.0,
        }
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut rng = stream_rng(self.coef_seed, u64::MAX);
        (0..self.d)
            .map(|_| self.coef_scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Draws `count` rows.
    pub fn sample<R: Rng>(&self, coef: &[f64], count: usize, rng: &mut R) -> Dataset {
        let mut features = Vec::with_capacity(count * self.d);
        let mut y = Vec::with_capacity(count);
        for _ in 0..count {
            let mut mean = 0.0;
            for c in coef {
                let x: f64 = rng.sample(StandardNormal);
                features.push(x);
                mean += c * x;
            }
            let eps: f64 = rng.sample(StandardNormal);
            y.push(mean + self.noise_sd * eps);
        }
        Dataset::new(features, y, self.d).expect("finite Gaussian draws")
    }
}

/// A prediction method evaluated by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMethod {
    Single {
        m: usize,
    },
    MultiSplit {
        splits: usize,
        m: usize,
        tau: f64,
        lambda: usize,
    },
    CrossConformal {
        folds: usize,
        tau: f64,
        lambda: usize,
    },
    /// Leave-one-out set at nominal `α` (guarantee `1 − 2α`).
    LeaveOneOut,
    /// Jackknife+ at nominal `α` (guarantee `1 − 2α`).
    JackknifePlus,
}

/// Empirical coverage with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    pub coverage: f64,
    pub std_error: f64,
    pub reps: usize,
    /// Mean set width over repetitions.
    pub mean_width: f64,
}

impl CoverageEstimate {
    /// True when `coverage ≥ target − z·SE`.
    pub fn at_least(&self, target: f64, z: f64) -> bool {
        self.coverage >= target - z * self.std_error
    }

    /// True when `|coverage − target| ≤ z·SE`.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.coverage - target).abs() <= z * self.std_error
    }
}

/// Standard error `√(p(1−p)/reps)` evaluated at the nominal `p`.
pub fn nominal_std_error(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

pub fn simulate_coverage(
    dgp: &LinearGaussianDgp,
    method: &SimMethod,
    alpha: f64,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<CoverageEstimate> {
    check_level("alpha", alpha)?;
    if reps < 100 {
        return Err(Error::Size(format!(
            "simulation needs at least 100 repetitions, got {reps}"
        )));
    }
    if dgp.n < 2 || dgp.noise_sd.is_nan() || dgp.noise_sd < 0.0 {
        return Err(Error::parameter("dgp", "need n >= 2 and a non-negative noise sd"));
    }
    let coef = dgp.coefficients();
    let outcomes = try_map_indexed(exec, reps, |r| {
        let mut rng = stream_rng(seed, r as u64);
        let train = dgp.sample(&coef, dgp.n, &mut rng);
        let test = dgp.sample(&coef, 1, &mut rng);
        let method_seed = rng.next_u64();
        let set = predict_one(&train, test.row(0), method, alpha, method_seed)?;
        Ok::<_, Error>((set.contains(test.response()[0]), set.width()))
    })?;
    let hits = outcomes.iter().filter(|o| o.0).count();
    let coverage = hits as f64 / reps as f64;
    Ok(CoverageEstimate {
        coverage,
        std_error: (coverage * (1.0 - coverage) / reps as f64).sqrt(),
        reps,
        mean_width: outcomes.iter().map(|o| o.1).sum::<f64>() / reps as f64,
    })
}

fn predict_one(train: &Dataset, x: &[f64], method: &SimMethod, alpha: f64, seed: u64) -> Result<PredictionSet> {
    let all: Vec<usize> = (0..train.len()).collect();
    let spec = ScoreSpec::residual(singular_value_penalty(train, &all, SIM_RIDGE_FACTOR));
    let seq = Execution::Sequential;
    match *method {
        SimMethod::Single { m } => {
            let plan = &make_split_plans(train.len(), m, 1, seed)?[0];
            Ok(CalibratedSplit::calibrate(train, plan, &spec)?.predict(x, alpha)?.set)
        }
        SimMethod::MultiSplit { splits, m, tau, lambda } => {
            let config = MultiSplitConfig::homogeneous(splits, m, spec, tau, lambda, alpha, seed);
            MultiSplitPredictor::calibrate(train, &config, seq)?.predict(x)
        }
        SimMethod::CrossConformal { folds, tau, lambda } => {
            cross_conformal_predictor(train, folds, &spec, alpha, tau, lambda, seed, seq)?.predict(x)
        }
        SimMethod::LeaveOneOut => LeaveOneOut::fit(train, &spec, seq)?.loo_set(x, alpha),
        SimMethod::JackknifePlus => LeaveOneOut::fit(train, &spec, seq)?.jackknife_plus(x, alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_zero_noise_covers_exactly() {
        let mut dgp = LinearGaussianDgp::new(3, 30, 0.0, 1);
        dgp.coef_scale = 0.0;
        let est = simulate_coverage(&dgp, &SimMethod::Single { m: 10 }, 0.2, 200, 5, Execution::Parallel).unwrap();
        assert_eq!(est.coverage, 1.0);
        assert_eq!(est.mean_width, 0.0);
    }

    #[test]
    fn needs_enough_reps() {
        let dgp = LinearGaussianDgp::new(2, 20, 1.0, 1);
        assert!(simulate_coverage(&dgp, &SimMethod::Single { m: 5 }, 0.1, 50, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let dgp = LinearGaussianDgp::new(2, 25, 1.0, 4);
        let method = SimMethod::MultiSplit {
            splits: 5,
            m: 10,
            tau: 0.5,
            lambda: 0,
        };
        let a = simulate_coverage(&dgp, &method, 0.2, 150, 9, Execution::Sequential).unwrap();
        let b = simulate_coverage(&dgp, &method, 0.2, 150, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_split_near_nominal() {
        // α = 2/(m+1) with continuous noise: exact coverage 0.9
        let dgp = LinearGaussianDgp::new(3, 40, 1.0, 2);
        let est = simulate_coverage(&dgp, &SimMethod::Single { m: 19 }, 0.1, 3000, 1, Execution::Parallel).unwrap();
        assert!(
            (est.coverage - 0.9).abs() <= 3.0 * nominal_std_error(0.9, 3000),
            "{est:?}"
        );
    }
}
