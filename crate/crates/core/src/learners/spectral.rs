use nalgebra::{DMatrix, DVector};

/// Largest singular value of `x`, by power iteration on the smaller of the
/// two Gram matrices `XᵀX` and `XXᵀ`. Returns 0 for an all-zero (or empty)
/// matrix.
pub fn largest_singular_value(x: &DMatrix<f64>) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let gram = if x.ncols() <= x.nrows() {
        x.transpose() * x
    } else {
        x * x.transpose()
    };
    largest_eigenvalue_psd(&gram).max(0.0).sqrt()
}

/// Dominant eigenvalue of a symmetric positive semi-definite matrix.
pub(crate) fn largest_eigenvalue_psd(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let scale = gram.amax();
    if scale == 0.0 {
        return 0.0;
    }
    // fixed, non-symmetric start so runs are reproducible and the start is
    // not orthogonal to structured eigenvectors
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract());
    v.normalize_mut();
    let mut rayleigh = 0.0;
    for _ in 0..100_000 {
        let w = gram * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - rayleigh).abs() <= 1e-15 * next.abs() {
            return next;
        }
        rayleigh = next;
    }
    rayleigh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_norm() {
        assert!((largest_singular_value(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal() {
        let x = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]);
        assert!((largest_singular_value(&x) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(largest_singular_value(&DMatrix::zeros(4, 2)), 0.0);
    }

    #[test]
    fn transpose_invariant() {
        let x = DMatrix::from_fn(7, 4, |i, j| ((i * 5 + j * 3) % 7) as f64 - 2.5);
        let a = largest_singular_value(&x);
        let b = largest_singular_value(&x.transpose());
        assert!((a - b).abs() <= 1e-10 * a);
    }
}
