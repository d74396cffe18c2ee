//! Ridge regression with an unpenalized intercept.
//!
//! Features and response are centered on the training rows; the slopes solve
//! `(XcᵀXc + penalty·I) coef = Xcᵀyc` by Cholesky factorization and the
//! intercept is the training response mean.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Pivot ratio below which a factorization is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub feature_means: Vec<f64>,
    pub response_mean: f64,
    pub penalty: f64,
}

impl RidgeModel {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `intercept + (x − feature_means)ᵀ coefficients`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.intercept
            + x.iter()
                .zip(&self.feature_means)
                .zip(&self.coefficients)
                .map(|((xi, mi), ci)| (xi - mi) * ci)
                .sum::<f64>()
    }
}

/// Fits ridge on every row of `train`.
pub fn fit_ridge(train: &Dataset, penalty: f64) -> Result<RidgeModel> {
    let rows: Vec<usize> = (0..train.len()).collect();
    fit_ridge_rows(train, &rows, penalty)
}

/// Fits ridge on the listed rows of `data` only.
pub fn fit_ridge_rows(data: &Dataset, rows: &[usize], penalty: f64) -> Result<RidgeModel> {
    check_penalty(penalty)?;
    if rows.is_empty() {
        return Err(Error::Size("ridge needs at least one training row".into()));
    }
    let d = data.dim();
    let w = rows.len() as f64;
    let mut feature_means = vec![0.0; d];
    let mut response_mean = 0.0;
    for &i in rows {
        for (m, v) in feature_means.iter_mut().zip(data.row(i)) {
            *m += v;
        }
        response_mean += data.response()[i];
    }
    feature_means.iter_mut().for_each(|m| *m /= w);
    response_mean /= w;

    let xc = DMatrix::from_fn(rows.len(), d, |r, c| data.row(rows[r])[c] - feature_means[c]);
    let yc = DVector::from_fn(rows.len(), |r, _| data.response()[rows[r]] - response_mean);
    let gram = xc.tr_mul(&xc);
    let rhs = xc.tr_mul(&yc);
    let coefficients = solve_regularized(gram, rhs, penalty)?;
    Ok(RidgeModel {
        coefficients,
        intercept: response_mean,
        feature_means,
        response_mean,
        penalty,
    })
}

fn check_penalty(penalty: f64) -> Result<()> {
    if penalty.is_finite() && penalty >= 0.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "penalty",
            format!("must be a finite non-negative number, got {penalty}"),
        ))
    }
}

/// Solves `(gram + penalty·I) x = rhs` by Cholesky.
fn solve_regularized(mut gram: DMatrix<f64>, rhs: DVector<f64>, penalty: f64) -> Result<Vec<f64>> {
    let d = gram.nrows();
    if d == 0 {
        return Ok(Vec::new());
    }
    for i in 0..d {
        gram[(i, i)] += penalty;
    }
    let max_diag = (0..d).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    if max_diag == 0.0 {
        // all-constant features: nothing to fit unless regularized away
        return if penalty > 0.0 || rhs.amax() == 0.0 {
            Ok(vec![0.0; d])
        } else {
            Err(Error::Numerical("ridge Gram matrix is zero".into()))
        };
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("ridge system with penalty {penalty} is not positive definite")))?;
    let l = chol.l_dirty();
    let min_pivot = (0..d).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_PIVOT_RATIO * max_diag {
        return Err(Error::Numerical(format!(
            "ridge system with penalty {penalty} is numerically singular"
        )));
    }
    let coef = chol.solve(&rhs);
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("ridge solve produced non-finite coefficients".into()));
    }
    Ok(coef.iter().copied().collect())
}

/// Raw sufficient statistics of a ridge fit, supporting cheap removal of a
/// single row. Used for leave-one-out refits.
#[derive(Debug, Clone)]
pub struct RidgeSums {
    count: usize,
    sum_x: DVector<f64>,
    sum_y: f64,
    sum_xx: DMatrix<f64>,
    sum_xy: DVector<f64>,
}

impl RidgeSums {
    pub fn from_rows(data: &Dataset, rows: &[usize]) -> Self {
        let d = data.dim();
        let x = DMatrix::from_fn(rows.len(), d, |r, c| data.row(rows[r])[c]);
        let y = DVector::from_fn(rows.len(), |r, _| data.response()[rows[r]]);
        RidgeSums {
            count: rows.len(),
            sum_x: DVector::from_fn(d, |c, _| x.column(c).sum()),
            sum_y: y.sum(),
            sum_xx: x.tr_mul(&x),
            sum_xy: x.tr_mul(&y),
        }
    }

    /// Statistics with one row removed (a rank-one downdate).
    pub fn without(&self, x: &[f64], y: f64) -> Self {
        let xv = DVector::from_column_slice(x);
        let mut out = self.clone();
        out.count -= 1;
        out.sum_x -= &xv;
        out.sum_y -= y;
        out.sum_xx.ger(-1.0, &xv, &xv, 1.0);
        out.sum_xy.axpy(-y, &xv, 1.0);
        out
    }

    pub fn fit(&self, penalty: f64) -> Result<RidgeModel> {
        check_penalty(penalty)?;
        if self.count == 0 {
            return Err(Error::Size("ridge needs at least one training row".into()));
        }
        let n = self.count as f64;
        let mean_x = &self.sum_x / n;
        let mean_y = self.sum_y / n;
        let mut gram = self.sum_xx.clone();
        gram.ger(-n, &mean_x, &mean_x, 1.0);
        let mut rhs = self.sum_xy.clone();
        rhs.axpy(-n * mean_y, &mean_x, 1.0);
        let coefficients = solve_regularized(gram, rhs, penalty)?;
        Ok(RidgeModel {
            coefficients,
            intercept: mean_y,
            feature_means: mean_x.iter().copied().collect(),
            response_mean: mean_y,
            penalty,
        })
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::split::stream_rng;
    use rand::Rng;

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = stream_rng(seed, 0);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        Dataset::from_rows(&rows, y).unwrap()
    }

    /// Dense Gaussian elimination with partial pivoting.
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn zero_response_gives_zero_model() {
        let mut ds = random_dataset(8, 3, 1);
        ds = Dataset::new(ds.features().to_vec(), vec![0.0; 8], 3).unwrap();
        let m = fit_ridge(&ds, 0.1).unwrap();
        assert!(m.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(m.intercept, 0.0);
        assert_eq!(m.predict(&[5.0, -3.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn orthonormal_design_is_ols() {
        // centered columns with unit norm and zero inner product
        let h = 0.5;
        let rows = vec![vec![h, h], vec![h, -h], vec![-h, h], vec![-h, -h]];
        let y = vec![1.0, 2.0, 4.0, 9.0];
        let ds = Dataset::from_rows(&rows, y.clone()).unwrap();
        let m = fit_ridge(&ds, 0.0).unwrap();
        let ybar = y.iter().sum::<f64>() / 4.0;
        for c in 0..2 {
            let xty: f64 = rows.iter().zip(&y).map(|(r, yi)| r[c] * (yi - ybar)).sum();
            assert!((m.coefficients[c] - xty).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_gaussian_elimination() {
        let ds = random_dataset(10, 3, 42);
        let penalty = 0.5;
        let m = fit_ridge(&ds, penalty).unwrap();
        let n = ds.len();
        let mean: Vec<f64> = (0..3)
            .map(|c| (0..n).map(|i| ds.row(i)[c]).sum::<f64>() / n as f64)
            .collect();
        let ybar = ds.response().iter().sum::<f64>() / n as f64;
        let mut a = vec![vec![0.0; 3]; 3];
        let mut b = vec![0.0; 3];
        for i in 0..n {
            let xc: Vec<f64> = (0..3).map(|c| ds.row(i)[c] - mean[c]).collect();
            for r in 0..3 {
                for c in 0..3 {
                    a[r][c] += xc[r] * xc[c];
                }
                b[r] += xc[r] * (ds.response()[i] - ybar);
            }
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[r] += penalty;
        }
        let oracle = gauss_solve(a, b);
        for (c, o) in m.coefficients.iter().zip(&oracle) {
            assert!((c - o).abs() < 1e-8, "{c} vs {o}");
        }
        assert!((m.intercept - ybar).abs() < 1e-15);
    }

    #[test]
    fn normal_equation_residual_is_small() {
        let ds = random_dataset(40, 6, 9);
        let m = fit_ridge(&ds, 0.3).unwrap();
        let xc = DMatrix::from_fn(40, 6, |r, c| ds.row(r)[c] - m.feature_means[c]);
        let yc = DVector::from_fn(40, |r, _| ds.response()[r] - m.response_mean);
        let coef = DVector::from_column_slice(&m.coefficients);
        let lhs = xc.tr_mul(&xc) * &coef + &coef * 0.3;
        let rhs = xc.tr_mul(&yc);
        assert!((lhs - &rhs).norm() <= 1e-8 * rhs.norm().max(1.0));
    }

    #[test]
    fn singular_without_penalty_is_an_error() {
        // duplicated column
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let ds = Dataset::from_rows(&rows, (0..6).map(|i| i as f64).collect()).unwrap();
        assert!(matches!(fit_ridge(&ds, 0.0), Err(Error::Numerical(_))));
        assert!(fit_ridge(&ds, 1e-3).is_ok());
        // fewer rows than features
        let ds = random_dataset(3, 5, 2);
        assert!(matches!(fit_ridge(&ds, 0.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn rejects_negative_penalty() {
        let ds = random_dataset(5, 2, 3);
        assert!(fit_ridge(&ds, -1.0).unwrap_err().is_validation());
    }

    #[test]
    fn predict_checks_dimension() {
        let m = RidgeModel {
            coefficients: vec![1.0, 0.0],
            intercept: 0.0,
            feature_means: vec![0.0, 0.0],
            response_mean: 0.0,
            penalty: 0.0,
        };
        assert_eq!(m.predict(&[2.0, 5.0]).unwrap(), 2.0);
        assert!(m.predict(&[1.0]).is_err());
    }

    #[test]
    fn predict_matches_dot_product() {
        let mut rng = stream_rng(5, 1);
        let d = 7;
        let m = RidgeModel {
            coefficients: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            intercept: rng.gen_range(-1.0..1.0),
            feature_means: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            response_mean: 0.0,
            penalty: 0.0,
        };
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut oracle = m.intercept;
        for i in 0..d {
            oracle += x[i] * m.coefficients[i] - m.feature_means[i] * m.coefficients[i];
        }
        assert!((m.predict(&x).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn downdated_sums_match_direct_refit() {
        let ds = random_dataset(25, 4, 17);
        let all: Vec<usize> = (0..25).collect();
        let sums = RidgeSums::from_rows(&ds, &all);
        for leave in [0, 11, 24] {
            let rest: Vec<usize> = all.iter().copied().filter(|&i| i != leave).collect();
            let direct = fit_ridge_rows(&ds, &rest, 0.2).unwrap();
            let down = sums.without(ds.row(leave), ds.response()[leave]).fit(0.2).unwrap();
            for (a, b) in direct.coefficients.iter().zip(&down.coefficients) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!((direct.intercept - down.intercept).abs() < 1e-12);
        }
    }

    #[test]
    fn shrinkage_with_larger_penalty() {
        let ds = random_dataset(30, 5, 23);
        let mut last = f64::INFINITY;
        for p in [0.0, 0.01, 0.1, 1.0, 10.0, 100.0] {
            let norm = fit_ridge(&ds, p)
                .unwrap()
                .coefficients
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt();
            assert!(norm <= last + 1e-12);
            last = norm;
        }
    }

    #[test]
    fn response_shift_moves_only_intercept() {
        let ds = random_dataset(20, 3, 31);
        let shifted = Dataset::new(
            ds.features().to_vec(),
            ds.response().iter().map(|y| y + 7.5).collect(),
            3,
        )
        .unwrap();
        let a = fit_ridge(&ds, 0.4).unwrap();
        let b = fit_ridge(&shifted, 0.4).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((x - y).abs() < 1e-12);
        }
        let x = [0.3, -0.2, 0.9];
        assert!((b.predict(&x).unwrap() - a.predict(&x).unwrap() - 7.5).abs() < 1e-12);
    }
}
