//! Constant-factor approximate solutions used to seed the samplers: D^z
//! seeding followed by Lloyd/medoid refinement.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::{normalized_from_ln, Categorical};
use crate::cost::{self, nearest};
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::rng;
use crate::types::{CenterSet, PointSet};

pub const DEFAULT_ALPHA: f64 = 16.0;
pub const DEFAULT_ROUNDS: usize = 5;
pub const DEFAULT_RESTARTS: usize = 8;

/// An approximate center set `C*` together with the approximation factor the
/// sensitivity formulas assume for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSolution {
    pub centers: CenterSet,
    pub alpha_bound: f64,
    pub cost_value: f64,
}

impl ApproxSolution {
    pub fn new(x: &PointSet, centers: CenterSet, m: &Metric, alpha_bound: f64) -> Result<Self> {
        if !alpha_bound.is_finite() || alpha_bound < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha_bound must be finite and ≥ 1, got {alpha_bound}"
            )));
        }
        let cost_value = cost::cost(x, &centers, m)?;
        Ok(Self {
            centers,
            alpha_bound,
            cost_value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rounds: usize,
    pub alpha_bound: f64,
    /// Independent seedings tried by [`solve`]; the cheapest one is refined.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rounds: DEFAULT_ROUNDS,
            alpha_bound: DEFAULT_ALPHA,
            restarts: DEFAULT_RESTARTS,
        }
    }
}

/// D^z seeding from the stream `dz-seed` of `seed`.
pub fn dz_seed(x: &PointSet, k: usize, m: &Metric, seed: u64) -> Result<CenterSet> {
    dz_seed_with(x, k, m, &mut rng::stream(seed, "dz-seed"))
}

/// D^z seeding: the first center is drawn proportionally to multiplicity,
/// each further one proportionally to `u(x)·d^z(x, chosen)`. Once every
/// positive-mass point is covered the remaining draws fall back to
/// multiplicity, so centers may repeat.
pub fn dz_seed_with<R: Rng + ?Sized>(
    x: &PointSet,
    k: usize,
    m: &Metric,
    rng: &mut R,
) -> Result<CenterSet> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let mass = x.weights();
    let by_mass = Categorical::new(&mass)?;
    let d = x.dim();
    let mut coords = Vec::with_capacity(k * d);
    let first = by_mass.sample(rng);
    coords.extend_from_slice(x.point(first));
    let mut near_base: Vec<f64> = x
        .coords()
        .par_chunks_exact(d)
        .with_min_len(512)
        .map(|p| m.base(p, x.point(first)))
        .collect();

    while coords.len() < k * d {
        let weights: Vec<f64> = near_base
            .iter()
            .zip(&mass)
            .map(|(&b, &u)| if u > 0.0 { u * m.from_base(b) } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total == 0.0 {
            by_mass.sample(rng)
        } else if total.is_finite() {
            Categorical::new(&weights)?.sample(rng)
        } else {
            let ln: Vec<f64> = near_base
                .iter()
                .zip(&mass)
                .map(|(&b, &u)| if u > 0.0 { u.ln() + m.ln_from_base(b) } else { f64::NEG_INFINITY })
                .collect();
            Categorical::new(&normalized_from_ln(&ln))?.sample(rng)
        };
        let chosen = x.point(pick).to_vec();
        near_base
            .par_iter_mut()
            .with_min_len(512)
            .zip(x.coords().par_chunks_exact(d))
            .for_each(|(nb, p)| *nb = nb.min(m.base(p, &chosen)));
        coords.extend_from_slice(&chosen);
    }
    CenterSet::new(d, coords)
}

/// Alternating refinement generalized to `(p, z)`.
///
/// Each round reassigns points, re-seeds centers that own no mass at the
/// point farthest from the current centers, then moves every center to the
/// weighted mean (`p = z = 2`) or to the best cluster member (otherwise). A
/// member only replaces a center when it is strictly cheaper, so the cost
/// never increases.
pub fn local_improve(
    x: &PointSet,
    c: &CenterSet,
    m: &Metric,
    rounds: usize,
) -> Result<ApproxSolution> {
    local_improve_with(x, c, m, &SolverConfig { rounds, ..SolverConfig::default() })
}

pub fn local_improve_with(
    x: &PointSet,
    c: &CenterSet,
    m: &Metric,
    cfg: &SolverConfig,
) -> Result<ApproxSolution> {
    check_dim(x.dim(), c.dim())?;
    let mut centers = c.clone();
    for _ in 0..cfg.rounds {
        let next = improve_round(x, &centers, m)?;
        if next == centers {
            break;
        }
        centers = next;
    }
    ApproxSolution::new(x, centers, m, cfg.alpha_bound)
}

/// Best of `cfg.restarts` D^z seedings, then refinement. Seeding 0 is
/// [`dz_seed`]; seeding `r > 0` draws from `indexed_stream(seed, "dz-seed", r)`.
pub fn solve(x: &PointSet, k: usize, m: &Metric, seed: u64, cfg: &SolverConfig) -> Result<ApproxSolution> {
    let mut best = dz_seed(x, k, m, seed)?;
    let mut best_cost = cost::cost(x, &best, m)?;
    for r in 1..cfg.restarts.max(1) {
        let c = dz_seed_with(x, k, m, &mut rng::indexed_stream(seed, "dz-seed", r as u64))?;
        let v = cost::cost(x, &c, m)?;
        if v < best_cost {
            (best, best_cost) = (c, v);
        }
    }
    local_improve_with(x, &best, m, cfg)
}

fn improve_round(x: &PointSet, centers: &CenterSet, m: &Metric) -> Result<CenterSet> {
    let d = x.dim();
    let k = centers.k();
    let mass = x.weights();
    let mut coords = centers.coords().to_vec();

    let near: Vec<(usize, f64)> = x
        .coords()
        .par_chunks_exact(d)
        .with_min_len(512)
        .map(|p| nearest(p, centers, m))
        .collect();
    let mut owner: Vec<usize> = near.iter().map(|n| n.0).collect();
    let mut base: Vec<f64> = near.iter().map(|n| n.1).collect();

    let mut cluster_mass = vec![0.0; k];
    for (&o, &u) in owner.iter().zip(&mass) {
        cluster_mass[o] += u;
    }
    for j in 0..k {
        if cluster_mass[j] > 0.0 {
            continue;
        }
        // farthest positive-mass point; lowest index on ties
        let far = (0..x.len())
            .filter(|&i| mass[i] > 0.0)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if base[b] >= base[i] => Some(b),
                _ => Some(i),
            });
        let Some(far) = far else { break };
        if base[far] == 0.0 {
            break;
        }
        let target = x.point(far).to_vec();
        coords[j * d..(j + 1) * d].copy_from_slice(&target);
        for i in 0..x.len() {
            let b = m.base(x.point(i), &target);
            if b < base[i] || (b == base[i] && j < owner[i]) {
                cluster_mass[owner[i]] -= mass[i];
                owner[i] = j;
                base[i] = b;
                cluster_mass[j] += mass[i];
            }
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &o) in owner.iter().enumerate() {
        if mass[i] > 0.0 {
            members[o].push(i);
        }
    }
    let is_kmeans = m.p() == 2.0 && m.z() == 2.0;
    for (j, cluster) in members.iter().enumerate() {
        if cluster.is_empty() {
            continue;
        }
        let replacement = if is_kmeans {
            weighted_mean(x, cluster, &mass)
        } else {
            let current = &coords[j * d..(j + 1) * d];
            best_member(x, cluster, &mass, m, current)
        };
        if let Some(r) = replacement {
            coords[j * d..(j + 1) * d].copy_from_slice(&r);
        }
    }
    CenterSet::new(d, coords)
}

fn weighted_mean(x: &PointSet, cluster: &[usize], mass: &[f64]) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; x.dim()];
    let mut total = 0.0;
    for &i in cluster {
        total += mass[i];
        for (a, v) in acc.iter_mut().zip(x.point(i)) {
            *a += mass[i] * v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= total);
    Some(acc)
}

/// The cluster member minimizing within-cluster cost, if it beats `current`.
fn best_member(
    x: &PointSet,
    cluster: &[usize],
    mass: &[f64],
    m: &Metric,
    current: &[f64],
) -> Option<Vec<f64>> {
    let within = |c: &[f64]| -> f64 {
        cluster
            .iter()
            .map(|&i| mass[i] * m.eval(x.point(i), c))
            .sum()
    };
    let scores: Vec<f64> = cluster
        .par_iter()
        .with_min_len(16)
        .map(|&cand| within(x.point(cand)))
        .collect();
    let (best, score) = scores
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    (score < within(current)).then(|| x.point(cluster[best]).to_vec())
}
