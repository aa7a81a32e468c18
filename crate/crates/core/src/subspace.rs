//! Weak coresets for (k,z)-subspace approximation: find a linear subspace of
//! dimension at most k minimizing `Σ w(x)·d^z(x, P)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::coreset::WeightedCoreset;
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::rng;
use crate::sampler::{importance_sample, sigma1, SensitivityKind, SensitivityProfile, SizeBound};
use crate::solver::{self, SolverConfig};
use crate::types::PointSet;

const ORTHO_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

pub const BRUTE_MAX_POINTS: usize = 16;
pub const BRUTE_MAX_K: usize = 2;

/// A linear subspace through the origin with an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flat {
    dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Flat {
    /// Wraps an already orthonormal basis (checked to within 1e-9).
    pub fn new(dim: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("flat dimension must be at least 1".into()));
        }
        for b in &basis {
            check_dim(dim, b.len())?;
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - target).abs() > ORTHO_TOL {
                    return Err(Error::InvalidInput(format!(
                        "basis vectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { dim, basis })
    }

    /// The span of `vectors`, orthonormalized by modified Gram–Schmidt.
    /// Vectors already (numerically) in the span of earlier ones are dropped.
    pub fn span(dim: usize, vectors: &[&[f64]]) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            check_dim(dim, v.len())?;
            let scale = norm(v);
            if scale == 0.0 {
                continue;
            }
            let mut r = v.to_vec();
            // two passes keep the result orthogonal to ~1e-15
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&r, b);
                    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
                }
            }
            let len = norm(&r);
            if len > RANK_TOL * scale {
                r.iter_mut().for_each(|ri| *ri /= len);
                basis.push(r);
            }
        }
        Self::new(dim, basis)
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension `j` of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    fn residual_norm(&self, x: &[f64]) -> f64 {
        let mut r = x.to_vec();
        for b in &self.basis {
            let c = dot(x, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        norm(&r)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance from `x` to its projection onto `P`, raised to `z`.
pub fn dist_to_flat(x: &[f64], p: &Flat, z: f64) -> Result<f64> {
    check_dim(p.dim, x.len())?;
    let r = p.residual_norm(x);
    Ok(if z == 1.0 { r } else { r.powf(z) })
}

/// `Σ w(x)·d^z(x, P)` over a weighted set (signed weights allowed).
pub fn flat_cost(s: &WeightedCoreset, p: &Flat, z: f64) -> Result<f64> {
    check_dim(p.dim, s.dim())?;
    let mut total = 0.0;
    for (x, w) in s.points().zip(s.weights()) {
        total += w * dist_to_flat(x, p, z)?;
    }
    Ok(total)
}

/// A flat together with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSolution {
    pub flat: Flat,
    pub value: f64,
}

/// Worst-case count `𝒢²/ε²·(ε⁻¹k³·max(1, ln(k/ε)) + ln(1/δ))` with unit constants.
pub fn weak_coreset_theory_count(total_sensitivity: f64, eps: f64, delta: f64, k: usize) -> SizeBound {
    let kf = k as f64;
    let inner = kf.powi(3) / eps * (kf / eps).ln().max(1.0) + (1.0 / delta).ln();
    SizeBound::from_ln(2.0 * total_sensitivity.ln() - 2.0 * eps.ln() + inner.ln())
}

/// Samples a weak coreset for (k,z)-subspace approximation.
///
/// Scores have the stage-1 shape `d^z(x, c*(x))/cost_z(X, C*) + 1/|X_{c*(x)}|`
/// for a k-clustering solution `C*` computed from `seed`; `count` draws are
/// taken on the `subspace` stream.
pub fn weak_coreset_sample(
    x: &PointSet,
    k: usize,
    z: f64,
    eps: f64,
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<WeightedCoreset> {
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    for (name, v) in [("epsilon", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Error::InvalidConfig(format!("{name} must lie in (0, 0.5), got {v}")));
        }
    }
    let m = Metric::euclidean(z)?;
    let cfg = SolverConfig::default();
    let sol = solver::solve(x, k, &m, seed, &cfg)?;
    let prof = sigma1(x, &sol, &m)?;
    let prof = SensitivityProfile::new(prof.sigma, SensitivityKind::Subspace)?;

    let mut source = WeightedCoreset::identity(x);
    {
        let meta = source.meta_mut();
        meta.builder = "weak_subspace".into();
        meta.metric = m;
        meta.seed = seed;
        meta.k = k;
        meta.epsilon = eps;
        meta.delta = delta;
        meta.alpha_bound = cfg.alpha_bound;
        meta.n2 = count;
        meta.theory_count = Some(weak_coreset_theory_count(prof.total, eps, delta, k));
    }
    let mut s = importance_sample(&source, &prof, count, &mut rng::stream(seed, "subspace"))?;
    s.meta_mut().builder = "weak_subspace".into();
    s.meta_mut().stage_sizes = vec![s.len()];
    Ok(s)
}

/// Exact z = 2 optimum: the top-k eigenvectors of `Σ w(x)·x·xᵀ`, with the
/// value recomputed as the weighted sum of squared residuals.
pub fn svd_flat_opt(s: &WeightedCoreset, k: usize) -> Result<FlatSolution> {
    if s.weights().iter().any(|&w| w < 0.0) {
        return Err(Error::UnsupportedOracle(
            "the SVD oracle needs nonnegative weights".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let d = s.dim();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    for (x, &w) in s.points().zip(s.weights()) {
        for i in 0..d {
            let wx = w * x[i];
            for j in i..d {
                gram[(i, j)] += wx * x[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<Vec<f64>> = order
        .iter()
        .take(k.min(d))
        .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
        .collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let flat = Flat::span(d, &refs)?;
    let value = flat_cost(s, &flat, 2.0)?.max(0.0);
    Ok(FlatSolution { flat, value })
}

/// Exhaustive search over flats spanned by subsets of at most
/// `min(k, span_budget)` input points. Any larger subset spanning at most k
/// dimensions has the same span as one of its k-subsets, so this covers every
/// point-spanned candidate.
///
/// Refuses instances with more than 16 points or k > 2.
pub fn brute_flat_opt(s: &WeightedCoreset, k: usize, z: f64, span_budget: usize) -> Result<FlatSolution> {
    let n = s.len();
    if n > BRUTE_MAX_POINTS || k > BRUTE_MAX_K {
        return Err(Error::TooLarge(format!(
            "brute-force flat search is limited to n ≤ {BRUTE_MAX_POINTS} and k ≤ {BRUTE_MAX_K} (got n={n}, k={k})"
        )));
    }
    if !(z >= 1.0 && z.is_finite()) {
        return Err(Error::InvalidConfig(format!("z must be finite and ≥ 1, got {z}")));
    }
    let d = s.dim();
    let size = k.min(span_budget);
    let mut best = FlatSolution {
        flat: Flat::origin(d)?,
        value: flat_cost(s, &Flat::origin(d)?, z)?,
    };
    let mut subset = Vec::with_capacity(size);
    search(s, z, size, 0, &mut subset, &mut best)?;
    Ok(best)
}

fn search(
    s: &WeightedCoreset,
    z: f64,
    size: usize,
    start: usize,
    subset: &mut Vec<usize>,
    best: &mut FlatSolution,
) -> Result<()> {
    if !subset.is_empty() {
        let vecs: Vec<&[f64]> = subset.iter().map(|&i| s.point(i)).collect();
        let flat = Flat::span(s.dim(), &vecs)?;
        let value = flat_cost(s, &flat, z)?;
        if value < best.value {
            *best = FlatSolution { flat, value };
        }
    }
    if subset.len() == size {
        return Ok(());
    }
    for i in start..s.len() {
        subset.push(i);
        search(s, z, size, i + 1, subset, best)?;
        subset.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::CoresetMeta;
    use crate::sampler::uniform_sensitivity;
    use crate::synthetic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(x: &PointSet) -> WeightedCoreset {
        WeightedCoreset::identity(x)
    }

    fn xy_plane() -> Flat {
        Flat::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = xy_plane();
        assert_eq!(dist_to_flat(&[3.0, -2.0, 0.0], &p, 2.0).unwrap(), 0.0);
        assert_eq!(dist_to_flat(&[0.0, 0.0, 5.0], &p, 2.0).unwrap(), 25.0);
        assert!(dist_to_flat(&[1.0, 2.0], &p, 1.0).is_err());
    }

    #[test]
    fn distance_matches_explicit_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let d = rng.random_range(2..7);
            let j = rng.random_range(1..d);
            let raw: Vec<Vec<f64>> = (0..j).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let refs: Vec<&[f64]> = raw.iter().map(Vec::as_slice).collect();
            let p = Flat::span(d, &refs).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();

            // classical Gram-Schmidt, then least squares residual through the normal equations
            let mut q: Vec<Vec<f64>> = Vec::new();
            for v in &raw {
                let mut u = v.clone();
                for e in &q {
                    let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                    u.iter_mut().zip(e).for_each(|(ui, ei)| *ui -= c * ei);
                }
                let l = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                q.push(u.into_iter().map(|a| a / l).collect());
            }
            let mut proj = vec![0.0; d];
            for e in &q {
                let c: f64 = x.iter().zip(e).map(|(a, b)| a * b).sum();
                proj.iter_mut().zip(e).for_each(|(pi, ei)| *pi += c * ei);
            }
            let expected = x.iter().zip(&proj).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let got = dist_to_flat(&x, &p, 2.0).unwrap();
            assert!((got - expected).abs() <= 1e-9 * (1.0 + expected));
        }
    }

    #[test]
    fn power_consistency() {
        let p = Flat::span(3, &[&[1.0, 1.0, 0.0]]).unwrap();
        for z in [1.0, 1.5, 2.0, 3.7] {
            let x = [0.3, -2.0, 4.0];
            let d1 = dist_to_flat(&x, &p, 1.0).unwrap();
            assert_eq!(dist_to_flat(&x, &p, z).unwrap(), d1.powf(z));
        }
    }

    #[test]
    fn span_orthonormalizes_and_drops_dependent_vectors() {
        let f = Flat::span(3, &[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0], &[0.0, 1.0, 1.0], &[0.0; 3]]).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(Flat::new(3, f.basis().to_vec()).is_ok());
        assert!(Flat::new(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn svd_line_through_origin() {
        let x = PointSet::from_rows(&[[1.0, 2.0], [-2.0, -4.0], [0.5, 1.0]]).unwrap();
        let sol = svd_flat_opt(&unit(&x), 1).unwrap();
        assert!(sol.value < 1e-12);
    }

    #[test]
    fn svd_two_axes() {
        // Gram = I, either axis (or any rotation) leaves residual 1
        let x = PointSet::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let sol = svd_flat_opt(&unit(&x), 1).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert_eq!(sol.flat.rank(), 1);
    }

    #[test]
    fn svd_value_matches_projection_and_is_monotone() {
        let x = synthetic::gaussian_mixture(300, 6, 3, 2.0, 4).unwrap();
        let s = unit(&x);
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let sol = svd_flat_opt(&s, k).unwrap();
            let independent: f64 = x.points().map(|p| dist_to_flat(p, &sol.flat, 2.0).unwrap()).sum();
            assert!((sol.value - independent).abs() <= 1e-9 * independent.max(1.0));
            assert!(sol.value <= prev * (1.0 + 1e-12));
            prev = sol.value;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn svd_rejects_signed_weights() {
        let x = PointSet::from_rows(&[[1.0], [2.0]]).unwrap();
        let meta = CoresetMeta::new("t", &x, Metric::kmeans());
        let s = WeightedCoreset::new(1, vec![1.0, 2.0], vec![3.0, -1.0], vec![false, true], meta).unwrap();
        assert!(matches!(svd_flat_opt(&s, 1), Err(Error::UnsupportedOracle(_))));
    }

    #[test]
    fn brute_axes_beat_diagonals() {
        let x = PointSet::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        let sol = brute_flat_opt(&unit(&x), 1, 1.0, 4).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn brute_in_flat_and_guards() {
        let x = PointSet::from_rows(&[[1.0, 1.0, 0.0], [2.0, -1.0, 0.0], [-3.0, 0.5, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        assert!(brute_flat_opt(&unit(&x), 2, 1.5, 4).unwrap().value < 1e-12);
        let big = synthetic::uniform_box(17, 2, 0.0, 1.0, 0).unwrap();
        assert!(matches!(brute_flat_opt(&unit(&big), 1, 2.0, 2), Err(Error::TooLarge(_))));
        assert!(matches!(brute_flat_opt(&unit(&x), 3, 2.0, 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn brute_versus_svd_at_z_two() {
        // when the optimal line passes through a data point the oracles agree
        let x = PointSet::from_rows(&[[2.0, 0.0], [-1.0, 0.0], [0.0, 0.5]]).unwrap();
        let svd = svd_flat_opt(&unit(&x), 1).unwrap();
        let brute = brute_flat_opt(&unit(&x), 1, 2.0, 3).unwrap();
        assert!((brute.value - svd.value).abs() <= 1e-6 * svd.value);

        // in general point-spanned flats can only be worse; the gap is measured
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.random_range(3..10);
            let y = PointSet::new(3, (0..3 * n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
            for k in 1..=2 {
                let svd = svd_flat_opt(&unit(&y), k).unwrap().value;
                let brute = brute_flat_opt(&unit(&y), k, 2.0, n).unwrap().value;
                assert!(brute >= svd * (1.0 - 1e-9) - 1e-12, "brute {brute} < svd {svd}");
            }
        }
    }

    #[test]
    fn weak_sample_on_flat_data_stays_on_the_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<[f64; 4]> = (0..200)
            .map(|_| {
                let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                [a, b, a - b, 0.0]
            })
            .collect();
        let x = PointSet::from_rows(&rows).unwrap();
        let s = weak_coreset_sample(&x, 2, 2.0, 0.1, 0.1, 50, 1).unwrap();
        assert!(svd_flat_opt(&s, 2).unwrap().value < 1e-9);
        assert_eq!(s.meta().builder, "weak_subspace");
        assert!(s.meta().theory_count.is_some());
    }

    #[test]
    fn weak_sample_rejects_zero_count() {
        let x = PointSet::from_rows(&[[1.0]]).unwrap();
        assert!(weak_coreset_sample(&x, 1, 2.0, 0.1, 0.1, 0, 0).is_err());
    }

    #[test]
    fn uniform_oversampling_recovers_the_optimum() {
        let x = synthetic::gaussian_mixture(400, 5, 3, 1.5, 8).unwrap();
        let s = unit(&x);
        let prof = uniform_sensitivity(&x);
        let sample = importance_sample(&s, &prof, 400 * 200, &mut rng::stream(2, "t")).unwrap();
        let ratio = svd_flat_opt(&sample, 2).unwrap().value / svd_flat_opt(&s, 2).unwrap().value;
        assert!((ratio - 1.0).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn weak_sample_ratio_on_mixture() {
        let x = synthetic::gaussian_mixture(2000, 30, 5, 1.0, 11).unwrap();
        let opt_x = svd_flat_opt(&unit(&x), 5).unwrap().value;
        let s = weak_coreset_sample(&x, 5, 2.0, 0.1, 0.1, 500, 4).unwrap();
        let ratio = svd_flat_opt(&s, 5).unwrap().value / opt_x;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }
}
