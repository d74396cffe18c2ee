#![allow(clippy::needless_range_loop)]

use msconformal::learners::largest_singular_value;
use msconformal::split::stream_rng;
use nalgebra::DMatrix;
use rand::Rng;

/// Cyclic Jacobi eigenvalue iteration for a small symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[test]
fn spectral_norm_matches_jacobi_on_gram() {
    let mut rng = stream_rng(2024, 0);
    for _ in 0..20 {
        let x = DMatrix::from_fn(5, 3, |_, _| rng.gen_range(-2.0..2.0));
        let gram = x.transpose() * &x;
        let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| gram[(i, j)]).collect()).collect();
        let top = jacobi_eigenvalues(rows).into_iter().fold(f64::MIN, f64::max);
        let oracle = top.sqrt();
        let got = largest_singular_value(&x);
        assert!((got - oracle).abs() <= 1e-6 * oracle, "{got} vs {oracle}");
    }
}

#[test]
fn spectral_norm_is_transpose_invariant() {
    let mut rng = stream_rng(7, 1);
    for _ in 0..10 {
        let r = rng.gen_range(1..12);
        let c = rng.gen_range(1..12);
        let x = DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
        let a = largest_singular_value(&x);
        let b = largest_singular_value(&x.transpose());
        assert!((a - b).abs() <= 1e-6 * a.max(1e-12));
    }
}
