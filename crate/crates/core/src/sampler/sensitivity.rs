use serde::{Deserialize, Serialize};

use crate::coreset::WeightedCoreset;
use crate::cost::nearest_all;
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::solver::ApproxSolution;
use crate::types::{CenterSet, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityKind {
    Stage1,
    Stage2,
    Bfl16,
    /// `u(x)·d^z(x, C*) / cost_z(X, C*)`, the one-stage offset framework.
    CostShare,
    Uniform,
    /// Stage-1 shape normalized for subspace approximation.
    Subspace,
}

/// Per-point sampling scores `σ(x)` and their total `𝒢`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProfile {
    pub sigma: Vec<f64>,
    pub total: f64,
    pub kind: SensitivityKind,
}

impl SensitivityProfile {
    pub fn new(sigma: Vec<f64>, kind: SensitivityKind) -> Result<Self> {
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidInput("sensitivities must be finite and ≥ 0".into()));
        }
        let total = sigma.iter().sum();
        Ok(Self { sigma, total, kind })
    }

    /// True when no point can be drawn.
    pub fn is_degenerate(&self) -> bool {
        self.total == 0.0
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.sigma[i] / self.total
    }
}

/// Per-point view of a weighted set relative to `C*`.
pub(crate) struct ClusterShares {
    pub owner: Vec<usize>,
    /// `u(x)·d^z(x, C*) / Σ_y u(y)·d^z(y, C*)`; all zero when the total is 0.
    pub share: Vec<f64>,
    /// `|X_c|` as multiplicity mass.
    pub mass: Vec<f64>,
}

impl ClusterShares {
    pub fn compute(
        coords: &[f64],
        dim: usize,
        weights: &[f64],
        centers: &CenterSet,
        m: &Metric,
    ) -> Result<Self> {
        check_dim(dim, centers.dim())?;
        let near = nearest_all(coords, dim, centers, m);
        let owner: Vec<usize> = near.iter().map(|n| n.0).collect();
        let mut mass = vec![0.0; centers.k()];
        for (&o, &u) in owner.iter().zip(weights) {
            mass[o] += u;
        }
        let terms: Vec<f64> = near
            .iter()
            .zip(weights)
            .map(|(&(_, b), &u)| u * m.from_base(b))
            .collect();
        let total: f64 = terms.iter().sum();
        let share = if total == 0.0 {
            vec![0.0; terms.len()]
        } else if total.is_finite() {
            terms.iter().map(|t| t / total).collect()
        } else {
            // d^z overflowed; redo the ratio with logarithms
            let ln_terms: Vec<f64> = near
                .iter()
                .zip(weights)
                .map(|(&(_, b), &u)| if u > 0.0 { u.ln() + m.ln_from_base(b) } else { f64::NEG_INFINITY })
                .collect();
            let max = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ln_total = max + ln_terms.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            ln_terms.iter().map(|l| (l - ln_total).exp()).collect()
        };
        Ok(Self { owner, share, mass })
    }

    fn per_point_inverse_mass(&self, weights: &[f64]) -> Vec<f64> {
        self.owner
            .iter()
            .zip(weights)
            .map(|(&o, &u)| if u > 0.0 { u / self.mass[o] } else { 0.0 })
            .collect()
    }
}

fn sigma1_constant(z: f64, alpha: f64) -> Result<f64> {
    let c = 2f64.powf(2.0 * z + 2.0) * alpha * alpha;
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::InvalidConfig(format!("sensitivity constant overflows at z={z}")))
    }
}

/// Stage-1 sensitivities
/// `σ₁(x) = 2^{2z+2}·α²·u(x)·(d^z(x, c*(x)) / cost_z(X, C*) + 1/|X_{c*(x)}|)`.
///
/// With unit multiplicities this is the textbook formula; the `u(x)` factor
/// makes it a sensitivity for weighted input. When `cost_z(X, C*) = 0` the
/// first term is taken as 0.
pub fn sigma1(x: &PointSet, sol: &ApproxSolution, m: &Metric) -> Result<SensitivityProfile> {
    let weights = x.weights();
    let shares = ClusterShares::compute(x.coords(), x.dim(), &weights, &sol.centers, m)?;
    let scale = sigma1_constant(m.z(), sol.alpha_bound)?;
    let inv = shares.per_point_inverse_mass(&weights);
    let sigma = shares
        .share
        .iter()
        .zip(&inv)
        .map(|(s, i)| scale * (s + i))
        .collect();
    SensitivityProfile::new(sigma, SensitivityKind::Stage1)
}

/// Stage-2 sensitivities `σ₂(x) = u(x)·d^z(x, C*) / Σ_{y∈D₁} u(y)·d^z(y, C*)`.
/// All zero when `D₁` lies on `C*`.
pub fn sigma2(d1: &WeightedCoreset, sol: &ApproxSolution, m: &Metric) -> Result<SensitivityProfile> {
    if d1.weights().iter().any(|&u| u < 0.0) {
        return Err(Error::InvalidInput("stage-2 input must have nonnegative weights".into()));
    }
    let shares = ClusterShares::compute(d1.coords(), d1.dim(), d1.weights(), &sol.centers, m)?;
    SensitivityProfile::new(shares.share, SensitivityKind::Stage2)
}

/// Upper bound on the worst-case share of any center set:
/// `u(x)·(2^z·α·d^z(x, c*(x)) / cost_z(X, C*) + 2^{2z+1}·α / |X_{c*(x)}|)`,
/// using `cost_z(X, C*)/α` as the lower estimate of the optimum.
pub fn bfl16_sensitivity(x: &PointSet, sol: &ApproxSolution, m: &Metric) -> Result<SensitivityProfile> {
    let weights = x.weights();
    let shares = ClusterShares::compute(x.coords(), x.dim(), &weights, &sol.centers, m)?;
    let z = m.z();
    let alpha = sol.alpha_bound;
    let first = 2f64.powf(z) * alpha;
    let second = 2f64.powf(2.0 * z + 1.0) * alpha;
    let inv = shares.per_point_inverse_mass(&weights);
    let sigma = shares
        .share
        .iter()
        .zip(&inv)
        .map(|(s, i)| first * s + second * i)
        .collect();
    SensitivityProfile::new(sigma, SensitivityKind::Bfl16)
}

/// `σ(x) = u(x)·d^z(x, C*) / cost_z(X, C*)`, the smallest admissible choice
/// for the offset-weight framework.
pub fn cost_share_sensitivity(x: &PointSet, sol: &ApproxSolution, m: &Metric) -> Result<SensitivityProfile> {
    let weights = x.weights();
    let shares = ClusterShares::compute(x.coords(), x.dim(), &weights, &sol.centers, m)?;
    SensitivityProfile::new(shares.share, SensitivityKind::CostShare)
}

/// `σ(x) = u(x)`.
pub fn uniform_sensitivity(x: &PointSet) -> SensitivityProfile {
    SensitivityProfile::new(x.weights(), SensitivityKind::Uniform)
        .expect("multiplicities are valid sensitivities")
}
