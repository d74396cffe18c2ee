use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Empirical conditional quantile from the `k` nearest training points.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnQuantileModel {
    train_features: Vec<f64>,
    train_response: Vec<f64>,
    dim: usize,
    k: usize,
    level: f64,
}

/// Default neighbourhood size `⌈√w⌉` for `w` training points.
pub fn default_k(train_size: usize) -> usize {
    ((train_size as f64).sqrt().ceil() as usize).clamp(1, train_size.max(1))
}

impl KnnQuantileModel {
    /// Stores the listed rows of `data` as the reference set.
    pub fn fit_rows(data: &Dataset, rows: &[usize], k: usize, level: f64) -> Result<Self> {
        if k == 0 || k > rows.len() {
            return Err(Error::parameter(
                "k",
                format!("must satisfy 1 <= k <= {} (training size), got {k}", rows.len()),
            ));
        }
        crate::error::check_level("gamma", level)?;
        let sub = data.subset(rows);
        Ok(KnnQuantileModel {
            train_features: sub.features().to_vec(),
            train_response: sub.response().to_vec(),
            dim: data.dim(),
            k,
            level,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `⌈level·k⌉`-th smallest response (1-based) among the `k` nearest
    /// training points in Euclidean distance; distance ties go to the lower
    /// training index.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train_response
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let row = &self.train_features[i * self.dim..(i + 1) * self.dim];
                let d2: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        let mut ys: Vec<f64> = dist.iter().map(|&(_, i)| self.train_response[i]).collect();
        ys.sort_by(f64::total_cmp);
        let idx = quantile_rank(self.level, self.k);
        ys[idx - 1]
    }
}

/// 1-based rank `⌈level·k⌉`, clamped to `1..=k`.
fn quantile_rank(level: f64, k: usize) -> usize {
    ((level * k as f64 - 1e-9).ceil() as usize).clamp(1, k)
}
