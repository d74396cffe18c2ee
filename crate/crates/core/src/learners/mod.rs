//! Point and quantile regressors used inside conformity scores.

mod knn;
mod ridge;
mod spectral;

use nalgebra::DMatrix;

pub use knn::{default_k, KnnQuantileModel};
pub use ridge::{fit_ridge, fit_ridge_rows, RidgeModel, RidgeSums};
pub use spectral::largest_singular_value;

use crate::dataset::Dataset;

/// Point prediction `μ̂(x)` of a ridge model.
pub fn predict_point(model: &RidgeModel, x: &[f64]) -> crate::Result<f64> {
    model.predict(x)
}

/// Conditional quantile prediction of a k-NN model.
pub fn predict_quantile(model: &KnnQuantileModel, x: &[f64]) -> crate::Result<f64> {
    model.predict(x)
}

/// Copies the listed rows of `data` into a dense `rows × d` matrix, with
/// each column centered on its mean over those rows.
pub fn centered_matrix(data: &Dataset, rows: &[usize]) -> DMatrix<f64> {
    let mut x = DMatrix::from_fn(rows.len(), data.dim(), |r, c| data.row(rows[r])[c]);
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    x
}

/// Ridge penalty `factor · c²`, where `c` is the largest singular value of
/// the column-centered training matrix.
pub fn singular_value_penalty(data: &Dataset, rows: &[usize], factor: f64) -> f64 {
    let c = largest_singular_value(&centered_matrix(data, rows));
    factor * c * c
}
