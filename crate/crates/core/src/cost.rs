//! Nearest-center assignment and clustering cost.
//!
//! Per-point work runs in parallel, but every reduction is a sequential sum in
//! point order, so results are bit-identical for any thread count.

use rayon::prelude::*;

use crate::error::{check_dim, Result};
use crate::metric::Metric;
use crate::types::{CenterSet, PointSet};

/// Below this many points the parallel split is not worth it.
const PAR_MIN_LEN: usize = 512;

/// Plain accumulation switches to the log domain once `z·log₂(max distance)`
/// exceeds this.
const LOG_DOMAIN_BITS: f64 = 900.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub owner: Vec<usize>,
    pub dist_z: Vec<f64>,
}

impl Assignment {
    /// Per-center sum of `weights` over the points each center owns.
    pub fn cluster_mass(&self, k: usize, weights: &[f64]) -> Vec<f64> {
        let mut mass = vec![0.0; k];
        for (&o, &w) in self.owner.iter().zip(weights) {
            mass[o] += w;
        }
        mass
    }
}

/// Index and base value of the nearest center; ties go to the lowest index.
#[inline]
pub(crate) fn nearest(x: &[f64], centers: &CenterSet, m: &Metric) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.centers().enumerate() {
        let b = m.base(x, c);
        if b < best.1 {
            best = (j, b);
        }
    }
    best
}

pub(crate) fn nearest_all(coords: &[f64], dim: usize, centers: &CenterSet, m: &Metric) -> Vec<(usize, f64)> {
    coords
        .par_chunks_exact(dim)
        .with_min_len(PAR_MIN_LEN)
        .map(|x| nearest(x, centers, m))
        .collect()
}

pub fn assign(x: &PointSet, c: &CenterSet, m: &Metric) -> Result<Assignment> {
    check_dim(x.dim(), c.dim())?;
    let near = nearest_all(x.coords(), x.dim(), c, m);
    let (owner, dist_z) = near.into_iter().map(|(o, b)| (o, m.from_base(b))).unzip();
    Ok(Assignment { owner, dist_z })
}

/// A real number stored as sign and log-magnitude, for sums whose terms
/// overflow `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    /// `self / other`, computed without leaving the log domain until the end.
    pub fn ratio(self, other: LogValue) -> f64 {
        f64::from(self.sign) * f64::from(other.sign) * (self.ln_abs - other.ln_abs).exp()
    }
}

/// Signed log-sum-exp of `Σ w_i · exp(t_i)`.
fn signed_log_sum(terms: impl Iterator<Item = (f64, f64)>) -> LogValue {
    let terms: Vec<(f64, f64)> = terms
        .filter(|&(w, t)| w != 0.0 && t != f64::NEG_INFINITY)
        .map(|(w, t)| (w, t + w.abs().ln()))
        .collect();
    let max = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for &(w, t) in &terms {
        let e = (t - max).exp();
        if w > 0.0 {
            pos += e;
        } else {
            neg += e;
        }
    }
    let net = pos - neg;
    if net == 0.0 {
        LogValue::ZERO
    } else {
        LogValue {
            sign: if net > 0.0 { 1 } else { -1 },
            ln_abs: max + net.abs().ln(),
        }
    }
}

/// `Σ w_i · d^z(x_i, C)` with the automatic log-domain fallback.
fn weighted_cost(
    coords: &[f64],
    dim: usize,
    weight: impl Fn(usize) -> f64,
    c: &CenterSet,
    m: &Metric,
) -> f64 {
    let near = nearest_all(coords, dim, c, m);
    let max_base = near.iter().map(|n| n.1).fold(0.0, f64::max);
    // log₂ d_p = log₂(base) / p
    if max_base > 0.0 && m.z() * max_base.log2() / m.p() > LOG_DOMAIN_BITS {
        let lv = signed_log_sum(
            near.iter()
                .enumerate()
                .map(|(i, &(_, b))| (weight(i), m.ln_from_base(b))),
        );
        return lv.to_f64();
    }
    near.iter()
        .enumerate()
        .map(|(i, &(_, b))| weight(i) * m.from_base(b))
        .sum()
}

fn weighted_ln_cost(
    coords: &[f64],
    dim: usize,
    weight: impl Fn(usize) -> f64,
    c: &CenterSet,
    m: &Metric,
) -> LogValue {
    let near = nearest_all(coords, dim, c, m);
    signed_log_sum(
        near.iter()
            .enumerate()
            .map(|(i, &(_, b))| (weight(i), m.ln_from_base(b))),
    )
}

/// `cost_z(X, C) = Σ_x u(x)·d_p^z(x, C)`.
pub fn cost(x: &PointSet, c: &CenterSet, m: &Metric) -> Result<f64> {
    check_dim(x.dim(), c.dim())?;
    Ok(weighted_cost(x.coords(), x.dim(), |i| x.multiplicity(i), c, m))
}

/// `cost_z(X, C)` kept in the log domain throughout.
pub fn ln_cost(x: &PointSet, c: &CenterSet, m: &Metric) -> Result<LogValue> {
    check_dim(x.dim(), c.dim())?;
    Ok(weighted_ln_cost(x.coords(), x.dim(), |i| x.multiplicity(i), c, m))
}

/// Signed weighted cost over raw rows; used by the coreset type.
pub(crate) fn cost_of_rows(
    coords: &[f64],
    dim: usize,
    weights: &[f64],
    c: &CenterSet,
    m: &Metric,
) -> Result<f64> {
    check_dim(dim, c.dim())?;
    Ok(weighted_cost(coords, dim, |i| weights[i], c, m))
}

pub(crate) fn ln_cost_of_rows(
    coords: &[f64],
    dim: usize,
    weights: &[f64],
    c: &CenterSet,
    m: &Metric,
) -> Result<LogValue> {
    check_dim(dim, c.dim())?;
    Ok(weighted_ln_cost(coords, dim, |i| weights[i], c, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut impl Rng, n: usize, d: usize) -> PointSet {
        PointSet::new(d, (0..n * d).map(|_| rng.random_range(-10.0..10.0)).collect()).unwrap()
    }

    fn random_centers(rng: &mut impl Rng, k: usize, d: usize) -> CenterSet {
        CenterSet::new(d, (0..k * d).map(|_| rng.random_range(-10.0..10.0)).collect()).unwrap()
    }

    #[test]
    fn assign_worked_examples() {
        let x = PointSet::from_rows(&[[0.0, 0.0], [10.0, 0.0]]).unwrap();
        let c = CenterSet::from_rows(&[[0.0, 0.0], [10.0, 0.0]]).unwrap();
        let a = assign(&x, &c, &Metric::kmeans()).unwrap();
        assert_eq!(a.owner, vec![0, 1]);
        assert_eq!(a.dist_z, vec![0.0, 0.0]);

        let x = PointSet::from_rows(&[[5.0, 0.0]]).unwrap();
        let a = assign(&x, &c, &Metric::kmedian()).unwrap();
        assert_eq!(a.owner, vec![0]);
        assert_eq!(a.dist_z, vec![5.0]);
    }

    #[test]
    fn assign_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_points(&mut rng, 50, 3);
        let c = random_centers(&mut rng, 4, 3);
        let m = Metric::new(1.5, 1.3).unwrap();
        let a = assign(&x, &c, &m).unwrap();
        for i in 0..x.len() {
            let p = x.point(i);
            let mut best = (usize::MAX, f64::INFINITY);
            for j in 0..c.k() {
                let dz = p
                    .iter()
                    .zip(c.center(j))
                    .map(|(a, b)| (a - b).abs().powf(1.5))
                    .sum::<f64>()
                    .powf(1.3 / 1.5);
                if dz < best.1 {
                    best = (j, dz);
                }
            }
            assert_eq!(a.owner[i], best.0);
            assert!((a.dist_z[i] - best.1).abs() <= 1e-9 * best.1.max(1.0));
        }
    }

    #[test]
    fn cost_worked_examples() {
        let x = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let c = CenterSet::from_rows(&[[0.0, 0.0]]).unwrap();
        assert_eq!(cost(&x, &c, &Metric::kmedian()).unwrap(), 5.0);
        assert_eq!(cost(&x, &c, &Metric::kmeans()).unwrap(), 25.0);
        let bad = CenterSet::from_rows(&[[0.0]]).unwrap();
        assert!(cost(&x, &bad, &Metric::kmeans()).is_err());
    }

    #[test]
    fn cost_equals_weighted_assignment_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let base = random_points(&mut rng, 100, 5);
        let mult: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..3.0)).collect();
        let x = PointSet::with_multiplicity(5, base.coords().to_vec(), mult.clone()).unwrap();
        let c = random_centers(&mut rng, 3, 5);
        let m = Metric::kmeans();
        let a = assign(&x, &c, &m).unwrap();
        let expected: f64 = a.dist_z.iter().zip(&mult).map(|(d, u)| d * u).sum();
        let got = cost(&x, &c, &m).unwrap();
        assert!((got - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn log_domain_matches_plain_when_both_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_points(&mut rng, 40, 2);
        let c = random_centers(&mut rng, 2, 2);
        for z in [1.0, 2.0, 7.0] {
            let m = Metric::euclidean(z).unwrap();
            let plain = cost(&x, &c, &m).unwrap();
            let lv = ln_cost(&x, &c, &m).unwrap();
            assert_eq!(lv.sign, 1);
            assert!((lv.ln_abs - plain.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn huge_power_stays_finite_in_log_domain() {
        let x = PointSet::from_rows(&[[1e6], [-1e6], [0.0]]).unwrap();
        let c = CenterSet::from_rows(&[[0.0]]).unwrap();
        let m = Metric::euclidean(100.0).unwrap();
        let lv = ln_cost(&x, &c, &m).unwrap();
        // 2 · (1e6)^100
        let expected = 2f64.ln() + 100.0 * 1e6f64.ln();
        assert!((lv.ln_abs - expected).abs() < 1e-9);
        assert!(cost(&x, &c, &m).unwrap().is_infinite());
    }

    #[test]
    fn signed_log_sum_cancels() {
        let lv = signed_log_sum([(3.0, 0.0), (-1.0, 0.0)].into_iter());
        assert!((lv.to_f64() - 2.0).abs() < 1e-12);
        let lv = signed_log_sum([(1.0, 0.0), (-3.0, 0.0)].into_iter());
        assert!((lv.to_f64() + 2.0).abs() < 1e-12);
        assert_eq!(signed_log_sum([(1.0, 1.0), (-1.0, 1.0)].into_iter()), LogValue::ZERO);
    }
}
