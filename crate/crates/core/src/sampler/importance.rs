use rand::Rng;

use crate::categorical::Categorical;
use crate::coreset::{CoresetMeta, WeightedCoreset};
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::sampler::sensitivity::{ClusterShares, SensitivityProfile};
use crate::solver::ApproxSolution;

/// Draws `count` rows i.i.d. with probability `σ(x)/𝒢` and gives each draw
/// weight `u(x)·𝒢 / (count·σ(x))`, where `u` is the input weight. Repeated
/// draws of a row are merged into one row (weights summed); output rows keep
/// input order.
///
/// The estimate `Σ w(x)·d^z(x, C)` is unbiased for `Σ u(x)·d^z(x, C)` over
/// the rows with `σ(x) > 0`.
pub fn importance_sample<R: Rng + ?Sized>(
    input: &WeightedCoreset,
    prof: &SensitivityProfile,
    count: usize,
    rng: &mut R,
) -> Result<WeightedCoreset> {
    if count == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    check_dim(input.len(), prof.sigma.len())?;
    if input.weights().iter().any(|&u| u < 0.0) {
        return Err(Error::InvalidInput(
            "importance sampling needs nonnegative input weights".into(),
        ));
    }
    let cat = Categorical::new(&prof.sigma)?;
    let mut hits = vec![0u32; input.len()];
    for _ in 0..count {
        hits[cat.sample(rng)] += 1;
    }
    let per_draw = prof.total / count as f64;
    let dim = input.dim();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (i, &h) in hits.iter().enumerate() {
        if h == 0 {
            continue;
        }
        coords.extend_from_slice(input.point(i));
        weights.push(f64::from(h) * input.weight(i) * per_draw / prof.sigma[i]);
    }
    let mut meta = input.meta().clone();
    meta.builder = "importance_sample".into();
    let n = weights.len();
    WeightedCoreset::new(dim, coords, weights, vec![false; n], meta)
}

/// Offset correction: `S = D₂ ∪ C*` where each center gets
/// `w(c) = (1 + 10ε)·Σ_{x∈D_c} u(x) − Σ_{x∈D₂∩D_c} w(x)`,
/// with `D_c` the rows of `D₁` whose nearest center in `C*` is `c`.
///
/// Center rows are appended after the `D₂` rows, flagged as offset-corrected,
/// and may carry negative weights.
pub fn offset_center_weights(
    d2: Option<&WeightedCoreset>,
    d1: &WeightedCoreset,
    sol: &ApproxSolution,
    eps: f64,
    m: &Metric,
) -> Result<WeightedCoreset> {
    let centers = &sol.centers;
    let dim = centers.dim();
    check_dim(dim, d1.dim())?;
    let d1_shares = ClusterShares::compute(d1.coords(), dim, d1.weights(), centers, m)?;
    let mut center_weight: Vec<f64> = d1_shares.mass.iter().map(|&u| (1.0 + 10.0 * eps) * u).collect();

    let (mut coords, mut weights) = (Vec::new(), Vec::new());
    if let Some(d2) = d2 {
        check_dim(dim, d2.dim())?;
        let d2_shares = ClusterShares::compute(d2.coords(), dim, d2.weights(), centers, m)?;
        for (c, sampled) in center_weight.iter_mut().zip(&d2_shares.mass) {
            *c -= sampled;
        }
        coords.extend_from_slice(d2.coords());
        weights.extend_from_slice(d2.weights());
    }
    let sampled_rows = weights.len();
    coords.extend_from_slice(centers.coords());
    weights.extend_from_slice(&center_weight);
    let mut offset = vec![false; sampled_rows];
    offset.resize(weights.len(), true);
    let meta: CoresetMeta = d2.unwrap_or(d1).meta().clone();
    WeightedCoreset::new(dim, coords, weights, offset, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost;
    use crate::rng;
    use crate::sampler::sensitivity::{sigma1, uniform_sensitivity, SensitivityKind};
    use crate::types::{CenterSet, PointSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point_gets_full_mass() {
        let x = PointSet::with_multiplicity(2, vec![1.0, 1.0], vec![3.5]).unwrap();
        let s = WeightedCoreset::identity(&x);
        let prof = uniform_sensitivity(&x);
        let out = importance_sample(&s, &prof, 17, &mut rng::stream(1, "t")).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.weight(0) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_converge_to_multiplicity() {
        let mult: Vec<f64> = (1..=10).map(f64::from).collect();
        let x = PointSet::with_multiplicity(1, (0..10).map(f64::from).collect(), mult.clone()).unwrap();
        let s = WeightedCoreset::identity(&x);
        let prof = SensitivityProfile::new(vec![1.0; 10], SensitivityKind::Uniform).unwrap();
        let out = importance_sample(&s, &prof, 100_000, &mut rng::stream(2, "t")).unwrap();
        assert_eq!(out.len(), 10);
        for (w, u) in out.weights().iter().zip(&mult) {
            assert!((w / u - 1.0).abs() < 0.05, "{w} vs {u}");
        }
    }

    #[test]
    fn zero_count_rejected() {
        let x = PointSet::from_rows(&[[0.0]]).unwrap();
        let s = WeightedCoreset::identity(&x);
        assert!(importance_sample(&s, &uniform_sensitivity(&x), 0, &mut rng::stream(0, "t")).is_err());
    }

    #[test]
    fn unbiased_for_a_fixed_center_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = PointSet::new(2, (0..400).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let m = Metric::kmeans();
        let sol = ApproxSolution::new(&x, CenterSet::from_rows(&[[0.0, 0.0], [3.0, 3.0]]).unwrap(), &m, 2.0).unwrap();
        let prof = sigma1(&x, &sol, &m).unwrap();
        let c = CenterSet::from_rows(&[[-2.0, 1.0], [4.0, -4.0]]).unwrap();
        let truth = cost(&x, &c, &m).unwrap();
        let s = WeightedCoreset::identity(&x);
        let reps = 2000;
        let vals: Vec<f64> = (0..reps)
            .map(|r| {
                let out = importance_sample(&s, &prof, 30, &mut rng::indexed_stream(5, "rep", r)).unwrap();
                out.cost(&c, &m).unwrap()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        assert!((mean - truth).abs() <= 3.0 * se, "mean {mean} truth {truth} se {se}");
    }

    fn d1_fixture() -> (PointSet, WeightedCoreset, ApproxSolution, Metric) {
        let x = PointSet::from_rows(&[[0.0], [1.0], [2.0], [10.0], [11.0]]).unwrap();
        let m = Metric::kmeans();
        let sol = ApproxSolution::new(&x, CenterSet::from_rows(&[[1.0], [10.5]]).unwrap(), &m, 2.0).unwrap();
        let meta = CoresetMeta::new("d1", &x, m);
        let d1 = WeightedCoreset::new(1, vec![0.0, 2.0, 11.0], vec![1.5, 2.0, 2.5], vec![false; 3], meta).unwrap();
        (x, d1, sol, m)
    }

    #[test]
    fn empty_second_stage() {
        let (_, d1, sol, m) = d1_fixture();
        let eps = 0.1;
        let s = offset_center_weights(None, &d1, &sol, eps, &m).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.weight(0) - 2.0 * 3.5).abs() < 1e-12);
        assert!((s.weight(1) - 2.0 * 2.5).abs() < 1e-12);
        assert!(s.is_offset(0) && s.is_offset(1));
    }

    #[test]
    fn full_second_stage_cancels() {
        let (_, d1, sol, m) = d1_fixture();
        let eps = 0.05;
        let s = offset_center_weights(Some(&d1), &d1, &sol, eps, &m).unwrap();
        assert_eq!(s.len(), 5);
        assert!((s.weight(3) - 0.5 * 3.5).abs() < 1e-12);
        assert!((s.weight(4) - 0.5 * 2.5).abs() < 1e-12);
        assert!(!s.is_offset(0) && s.is_offset(3));
    }

    #[test]
    fn oversampled_cluster_goes_negative() {
        let (x, d1, sol, m) = d1_fixture();
        let meta = CoresetMeta::new("d2", &x, m);
        let d2 = WeightedCoreset::new(1, vec![0.0], vec![9.0], vec![false], meta).unwrap();
        let s = offset_center_weights(Some(&d2), &d1, &sol, 0.1, &m).unwrap();
        assert!(s.weight(1) < 0.0);
        assert!(s.meta().has_negative_weights);
        let total: f64 = s.weights().iter().sum();
        assert!((total - 2.0 * 6.0).abs() < 1e-12);
    }
}
