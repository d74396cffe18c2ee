//! Train/test replication harness for real data.
//!
//! Each replication draws a random training sample of `n_train` rows (the
//! rest is the test set), standardizes features with training statistics,
//! sets the ridge penalty to `ridge_factor · c²` (`c` = largest singular
//! value of the centered training matrix), draws `B` split plans and
//! evaluates every configured method on the whole test set. All methods of
//! a replication share its train/test split and split plans.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::RngCore;

use super::crime::{load_crime_dataset, CrimeOptions};
use super::summary::format_stat;
use crate::aggregate::{leftskewed_params, min_count, per_split_level};
use crate::conformal::CalibratedSplit;
use crate::crossconf::LeaveOneOut;
use crate::dataset::Dataset;
use crate::error::{check_level, Error, Result};
use crate::interval::PredictionSet;
use crate::learners::singular_value_penalty;
use crate::par::{map_indexed, try_map_indexed, Execution};
use crate::scores::{Band, ScoreSpec};
use crate::split::{make_split_plans, permutation, stream_rng};

/// A prediction method compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// The first split alone at level `α`.
    Single,
    /// `τ = (B−1)/(2B)`, `λ = (B−1)/2`.
    Leftskewed,
    /// Jackknife+ at level `α/2`, so its guarantee `1 − 2·(α/2)` matches.
    JackknifePlus,
    /// `τ = α`, `λ = 0`.
    TauAlpha,
    /// `τ = 1/2`, `λ = 0`.
    TauHalf,
    /// `τ = 1 − α`, `λ = 0`.
    TauOneMinusAlpha,
    Custom {
        tau: f64,
        lambda: usize,
    },
}

impl Method {
    /// The six methods of the reference comparison table.
    pub fn reference_set() -> Vec<Method> {
        vec![
            Method::Single,
            Method::Leftskewed,
            Method::JackknifePlus,
            Method::TauAlpha,
            Method::TauHalf,
            Method::TauOneMinusAlpha,
        ]
    }

    /// `(τ, λ)` for multi split methods.
    pub fn threshold(&self, alpha: f64, splits: usize) -> Option<(f64, usize)> {
        match *self {
            Method::Leftskewed => Some(leftskewed_params(splits)),
            Method::TauAlpha => Some((alpha, 0)),
            Method::TauHalf => Some((0.5, 0)),
            Method::TauOneMinusAlpha => Some((1.0 - alpha, 0)),
            Method::Custom { tau, lambda } => Some((tau, lambda)),
            Method::Single | Method::JackknifePlus => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Single => write!(f, "single"),
            Method::Leftskewed => write!(f, "leftskewed"),
            Method::JackknifePlus => write!(f, "jackknife_plus"),
            Method::TauAlpha => write!(f, "tau_alpha"),
            Method::TauHalf => write!(f, "tau_half"),
            Method::TauOneMinusAlpha => write!(f, "tau_one_minus_alpha"),
            Method::Custom { tau, lambda } => write!(f, "custom:{tau}:{lambda}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts the display names; custom methods are `custom:<tau>:<lambda>`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single" => Method::Single,
            "leftskewed" => Method::Leftskewed,
            "jackknife_plus" | "jackknife" => Method::JackknifePlus,
            "tau_alpha" => Method::TauAlpha,
            "tau_half" => Method::TauHalf,
            "tau_one_minus_alpha" => Method::TauOneMinusAlpha,
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                match parts.as_slice() {
                    ["custom", tau, lambda] => Method::Custom {
                        tau: tau
                            .parse()
                            .map_err(|_| Error::parameter("method", format!("bad tau in {other}")))?,
                        lambda: lambda
                            .parse()
                            .map_err(|_| Error::parameter("method", format!("bad lambda in {other}")))?,
                    },
                    _ => return Err(Error::parameter("method", format!("unknown method `{other}`"))),
                }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub crime: CrimeOptions,
    pub n_train: usize,
    pub alpha: f64,
    /// Number of splits `B`.
    pub splits: usize,
    pub m: usize,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub standardize: bool,
    pub ridge_factor: f64,
}

impl ExperimentConfig {
    /// `n = 200`, `α = 0.1`, `B = 51`, `m = 99`, ridge factor `0.001`, all six
    /// comparison methods.
    pub fn reference(dataset_path: impl Into<PathBuf>, replications: usize, seed: u64) -> Self {
        ExperimentConfig {
            dataset_path: dataset_path.into(),
            crime: CrimeOptions::default(),
            n_train: 200,
            alpha: 0.1,
            splits: 51,
            m: 99,
            replications,
            methods: Method::reference_set(),
            seed,
            standardize: true,
            ridge_factor: 1e-3,
        }
    }

    pub fn validate(&self, rows: usize) -> Result<()> {
        check_level("alpha", self.alpha)?;
        if self.n_train >= rows || self.n_train < 2 {
            return Err(Error::Size(format!(
                "n_train must satisfy 2 <= n_train < {rows} (dataset rows), got {}",
                self.n_train
            )));
        }
        if self.replications == 0 {
            return Err(Error::Size("replications must be at least 1".into()));
        }
        if self.splits == 0 {
            return Err(Error::parameter("B", "must be at least 1"));
        }
        if self.m == 0 || self.m >= self.n_train {
            return Err(Error::Size(format!(
                "m must satisfy 1 <= m <= n_train-1, got m={} with n_train={}",
                self.m, self.n_train
            )));
        }
        if !(self.ridge_factor >= 0.0 && self.ridge_factor.is_finite()) {
            return Err(Error::parameter("ridge_factor", "must be finite and non-negative"));
        }
        for method in &self.methods {
            if let Some((tau, lambda)) = method.threshold(self.alpha, self.splits) {
                per_split_level(self.alpha, tau, lambda, self.splits)?;
            }
        }
        Ok(())
    }
}

/// Result of one method in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepRecord {
    pub replication: usize,
    pub method: String,
    /// Fraction of test points whose response lies in the set.
    pub coverage: f64,
    /// Mean over test points of the set's total length (`+inf` if any set is
    /// unbounded, 0 for empty sets).
    pub width: f64,
    pub failure: Option<String>,
}

/// Loads the configured dataset and runs every replication.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<Vec<RepRecord>> {
    let data = load_crime_dataset(&config.dataset_path, &config.crime)?;
    run_experiment_on(config, &data, exec)
}

/// Runs every replication on an in-memory dataset. Replication `r` draws all
/// of its randomness from stream `r` of `config.seed`, so the output does not
/// depend on scheduling.
pub fn run_experiment_on(config: &ExperimentConfig, data: &Dataset, exec: Execution) -> Result<Vec<RepRecord>> {
    config.validate(data.len())?;
    let per_rep = map_indexed(exec, config.replications, |r| run_replication(config, data, r));
    Ok(per_rep.into_iter().flatten().collect())
}

struct Replication {
    train: Dataset,
    test: Dataset,
    penalty: f64,
    split_seed: u64,
}

fn prepare(config: &ExperimentConfig, data: &Dataset, rep: usize) -> Replication {
    let mut rng = stream_rng(config.seed, rep as u64);
    let perm = permutation(data.len(), &mut rng);
    let mut train_rows = perm[..config.n_train].to_vec();
    train_rows.sort_unstable();
    let mut test_rows = perm[config.n_train..].to_vec();
    test_rows.sort_unstable();
    let (train, test) = if config.standardize {
        let (mean, sd) = data.column_moments(&train_rows);
        (
            data.subset(&train_rows).standardized(&mean, &sd),
            data.subset(&test_rows).standardized(&mean, &sd),
        )
    } else {
        (data.subset(&train_rows), data.subset(&test_rows))
    };
    let all: Vec<usize> = (0..train.len()).collect();
    let penalty = singular_value_penalty(&train, &all, config.ridge_factor);
    Replication {
        train,
        test,
        penalty,
        split_seed: rng.next_u64(),
    }
}

fn run_replication(config: &ExperimentConfig, data: &Dataset, rep: usize) -> Vec<RepRecord> {
    let prepared = prepare(config, data, rep);
    let spec = ScoreSpec::residual(prepared.penalty);
    let splits = make_split_plans(config.n_train, config.m, config.splits, prepared.split_seed).and_then(|plans| {
        try_map_indexed(Execution::Sequential, plans.len(), |b| {
            CalibratedSplit::calibrate(&prepared.train, &plans[b], &spec)
        })
    });
    let needs_loo = config.methods.contains(&Method::JackknifePlus);
    let loo = needs_loo.then(|| LeaveOneOut::fit(&prepared.train, &spec, Execution::Sequential));

    config
        .methods
        .iter()
        .map(|method| {
            let outcome = match method {
                Method::JackknifePlus => match loo.as_ref().expect("fitted when requested") {
                    Ok(loo) => evaluate(&prepared.test, |x| loo.jackknife_plus(x, config.alpha / 2.0)),
                    Err(e) => Err(reported(e)),
                },
                _ => match &splits {
                    Ok(splits) => evaluate_split_method(config, *method, splits, &prepared.test),
                    Err(e) => Err(reported(e)),
                },
            };
            match outcome {
                Ok((coverage, width)) => RepRecord {
                    replication: rep,
                    method: method.to_string(),
                    coverage,
                    width,
                    failure: None,
                },
                Err(e) => RepRecord {
                    replication: rep,
                    method: method.to_string(),
                    coverage: f64::NAN,
                    width: f64::NAN,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Owned copy of a shared error, for reporting it once per method.
fn reported(e: &Error) -> Error {
    Error::Numerical(e.to_string())
}

fn evaluate_split_method(
    config: &ExperimentConfig,
    method: Method,
    splits: &[CalibratedSplit],
    test: &Dataset,
) -> Result<(f64, f64)> {
    let (level, needed, used) = match method.threshold(config.alpha, splits.len()) {
        Some((tau, lambda)) => (
            per_split_level(config.alpha, tau, lambda, splits.len())?,
            min_count(tau, splits.len())?,
            splits.len(),
        ),
        None => (config.alpha, 1, 1),
    };
    let radii: Vec<f64> = splits[..used]
        .iter()
        .map(|s| s.quantile(level).map(|q| q.value))
        .collect::<Result<_>>()?;
    evaluate(test, |x| {
        let sets = splits[..used]
            .iter()
            .zip(&radii)
            .map(|(s, &r)| s.fitted().band(x).and_then(|b: Band| b.invert(r)))
            .collect::<Result<Vec<PredictionSet>>>()?;
        crate::aggregate::aggregate_intervals(&sets, needed)
    })
}

/// Coverage and mean width of `predict` over the test set.
fn evaluate<F>(test: &Dataset, predict: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<PredictionSet>,
{
    let mut hits = 0usize;
    let mut width = 0.0;
    for i in 0..test.len() {
        let set = predict(test.row(i))?;
        hits += usize::from(set.contains(test.response()[i]));
        width += set.width();
    }
    let n = test.len() as f64;
    Ok((hits as f64 / n, width / n))
}

/// Writes `replication,method,coverage,width` rows.
pub fn write_records_csv<W: Write>(records: &[RepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replication", "method", "coverage", "width"])?;
    for r in records {
        w.write_record([
            r.replication.to_string(),
            r.method.clone(),
            format_stat(r.coverage),
            format_stat(r.width),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
