#![allow(dead_code)]

use msconformal::dataset::Dataset;
use msconformal::interval::PredictionSet;
use msconformal::split::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Every finite endpoint of `sets`, the midpoints between consecutive
/// endpoints, and one point beyond each extreme.
pub fn probe_points(sets: &[PredictionSet]) -> Vec<f64> {
    let mut ends: Vec<f64> = sets
        .iter()
        .flat_map(|s| s.intervals().iter().flat_map(|iv| [iv.lo(), iv.hi()]))
        .filter(|x| x.is_finite())
        .collect();
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ends.dedup();
    let mut probes = ends.clone();
    for w in ends.windows(2) {
        probes.push(0.5 * (w[0] + w[1]));
    }
    match (ends.first(), ends.last()) {
        (Some(&lo), Some(&hi)) => {
            probes.push(lo - 1.0);
            probes.push(hi + 1.0);
        }
        _ => probes.push(0.0),
    }
    probes
}

/// Number of `sets` containing `y`, by direct membership.
pub fn count_at(sets: &[PredictionSet], y: f64) -> usize {
    sets.iter().filter(|s| s.contains(y)).count()
}

/// Checks `result` against pointwise counting at all probe points.
pub fn matches_count_oracle(sets: &[PredictionSet], min_count: usize, result: &PredictionSet) -> bool {
    probe_points(sets)
        .into_iter()
        .all(|y| result.contains(y) == (count_at(sets, y) >= min_count))
}

/// A random set: empty, the whole line, a half-line, or 1..3 intervals.
pub fn random_set<R: Rng>(rng: &mut R) -> PredictionSet {
    // endpoints on a coarse grid so shared endpoints are common
    let grid = |rng: &mut R| (rng.gen_range(-20..=20) as f64) * 0.5;
    match rng.gen_range(0..10) {
        0 => PredictionSet::empty(),
        1 => PredictionSet::real_line(),
        2 => PredictionSet::from_bounds(f64::NEG_INFINITY, grid(rng)).unwrap(),
        3 => PredictionSet::from_bounds(grid(rng), f64::INFINITY).unwrap(),
        _ => {
            let pieces = rng.gen_range(1..=3);
            let mut out = PredictionSet::empty();
            for _ in 0..pieces {
                let a = grid(rng);
                let b = a + (rng.gen_range(0..=8) as f64) * 0.5;
                out = out.union(&PredictionSet::from_bounds(a, b).unwrap());
            }
            out
        }
    }
}

/// `y = xᵀθ + noise` with Gaussian features.
pub fn gaussian_linear(n: usize, d: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = stream_rng(seed, 7);
    let coef: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() + noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::from_rows(&rows, y).unwrap()
}
