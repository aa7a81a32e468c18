//! Seeded synthetic datasets.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;
use crate::types::PointSet;

/// Half-width of the box the mixture means are drawn from.
pub const MEAN_BOX: f64 = 10.0;

/// `n` points from `k_true` isotropic Gaussians with standard deviation
/// `spread`, means uniform in `[-10, 10]^d`, components chosen uniformly.
pub fn gaussian_mixture(n: usize, d: usize, k_true: usize, spread: f64, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 || k_true == 0 {
        return Err(Error::InvalidConfig("n, d and k_true must be at least 1".into()));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(Error::InvalidConfig(format!("spread must be finite and ≥ 0, got {spread}")));
    }
    let mut mean_rng = rng::stream(seed, "mixture-means");
    let means: Vec<f64> = (0..k_true * d)
        .map(|_| mean_rng.random_range(-MEAN_BOX..=MEAN_BOX))
        .collect();
    let noise = Normal::new(0.0, spread).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = rng::stream(seed, "mixture-points");
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let c = rng.random_range(0..k_true);
        for j in 0..d {
            coords.push(means[c * d + j] + noise.sample(&mut rng));
        }
    }
    PointSet::new(d, coords)
}

/// `n` points uniform in `[lo, hi]^d`.
pub fn uniform_box(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidConfig("n and d must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidConfig(format!("invalid box [{lo}, {hi}]")));
    }
    let mut rng = rng::stream(seed, "uniform-box");
    let coords = (0..n * d).map(|_| rng.random_range(lo..=hi)).collect();
    PointSet::new(d, coords)
}
