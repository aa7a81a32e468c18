//! Shared fixtures for the benchmarks.

use coreset_core::harness::{gen_ensemble, Ensemble, EnsembleSpec};
use coreset_core::{synthetic, CenterSet, Metric, PointSet};

/// Seeded Gaussian mixture with `k` components.
pub fn mixture(n: usize, d: usize, k: usize) -> PointSet {
    synthetic::gaussian_mixture(n, d, k, 1.0, 42).expect("valid mixture parameters")
}

/// `k` centers drawn uniformly from the bounding box of `x`.
pub fn box_centers(x: &PointSet, k: usize) -> CenterSet {
    random_box(x, k, 1).centers.remove(0)
}

/// `trials` random-box center sets.
pub fn random_box(x: &PointSet, k: usize, trials: usize) -> Ensemble {
    let mut spec: EnsembleSpec = format!("random_box:{trials}").parse().expect("valid spec");
    spec.seed = 7;
    gen_ensemble(x, None, k, &spec, &Metric::kmeans()).expect("ensemble generation")
}
