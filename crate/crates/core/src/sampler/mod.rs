//! Coreset builders.
//!
//! * `two_stage`: solve for `C*`, sample `D₁` by stage-1 sensitivities, sample
//!   `D₂` from `D₁` by cost share, attach offset-corrected centers.
//! * `fl11`: one cost-share sampling pass over `X` plus offset-corrected centers.
//! * `bfl16`: one pass over `X` with worst-case sensitivity bounds, no centers.
//! * `uniform`: one pass proportional to multiplicity.
//!
//! Single-stage methods draw `n2` rows.

mod importance;
mod sensitivity;
mod theory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use importance::{importance_sample, offset_center_weights};
pub use sensitivity::{
    bfl16_sensitivity, cost_share_sensitivity, sigma1, sigma2, uniform_sensitivity,
    SensitivityKind, SensitivityProfile,
};
pub use theory::{log_k_floor, theory_sizes, SizeBound, TheorySizes};

use crate::coreset::{CoresetMeta, WeightedCoreset};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::rng;
use crate::solver::{self, ApproxSolution, SolverConfig};
use crate::types::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TwoStage,
    Fl11,
    Bfl16,
    Uniform,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::TwoStage, Method::Fl11, Method::Bfl16, Method::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Method::TwoStage => "two_stage",
            Method::Fl11 => "fl11",
            Method::Bfl16 => "bfl16",
            Method::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "two_stage" => Ok(Method::TwoStage),
            "fl11" => Ok(Method::Fl11),
            "bfl16" => Ok(Method::Bfl16),
            "uniform" => Ok(Method::Uniform),
            _ => Err(Error::InvalidConfig(format!(
                "unknown method `{s}` (expected two-stage, fl11, bfl16 or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub k: usize,
    pub metric: Metric,
    pub epsilon: f64,
    pub delta: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: Method,
    pub seed: u64,
    /// Use the worst-case sizes instead of `n1`/`n2`; refuses when they
    /// do not fit in an `i64`.
    pub theory_mode: bool,
    pub solver: SolverConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            k: 10,
            metric: Metric::kmeans(),
            epsilon: 0.01,
            delta: 0.1,
            n1: 4000,
            n2: 2000,
            method: Method::TwoStage,
            seed: 0,
            theory_mode: false,
            solver: SolverConfig::default(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::InvalidConfig("n1 and n2 must be at least 1".into()));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 0.5), got {v}")));
            }
        }
        if !(self.solver.alpha_bound >= 1.0 && self.solver.alpha_bound.is_finite()) {
            return Err(Error::InvalidConfig("alpha_bound must be finite and ≥ 1".into()));
        }
        Ok(())
    }

    pub fn theory(&self) -> TheorySizes {
        theory_sizes(self.epsilon, self.delta, self.k, self.metric.z())
    }

    /// The `(n1, n2)` a build will use.
    pub fn effective_sizes(&self) -> Result<(usize, usize)> {
        if !self.theory_mode {
            return Ok((self.n1, self.n2));
        }
        let t = self.theory();
        if t.saturated() {
            return Err(Error::Saturated(format!(
                "N1 = (168z)^(10z)·ε^(-5z-15)·k^5·ln(k/δ) ≈ 10^{:.1}, N2 ≈ 10^{:.1} at z={}, ε={}, δ={}, k={}; \
                 both must fit in 2^63-1",
                t.n1.log10,
                t.n2.log10,
                self.metric.z(),
                self.epsilon,
                self.delta,
                self.k
            )));
        }
        let fit = |b: SizeBound| usize::try_from(b.value).map_err(|_| Error::Saturated("size exceeds usize".into()));
        Ok((fit(t.n1)?, fit(t.n2)?))
    }
}

/// Builds a coreset of `x` with the configured method.
pub fn build(x: &PointSet, cfg: &BuildConfig) -> Result<WeightedCoreset> {
    cfg.validate()?;
    let (n1, n2) = cfg.effective_sizes()?;
    let m = &cfg.metric;

    let mut meta = CoresetMeta::new(cfg.method.name(), x, *m);
    meta.seed = cfg.seed;
    meta.k = cfg.k;
    meta.epsilon = cfg.epsilon;
    meta.delta = cfg.delta;
    meta.alpha_bound = cfg.solver.alpha_bound;
    meta.n1 = n1;
    meta.n2 = n2;
    meta.theory = Some(cfg.theory());

    let mut source = WeightedCoreset::identity(x);
    *source.meta_mut() = meta;

    let mut out = match cfg.method {
        Method::TwoStage => {
            let sol = solver::solve(x, cfg.k, m, cfg.seed, &cfg.solver)?;
            two_stage(x, &source, &sol, cfg, n1, n2)?
        }
        Method::Fl11 => {
            let sol = solver::solve(x, cfg.k, m, cfg.seed, &cfg.solver)?;
            let prof = cost_share_sensitivity(x, &sol, m)?;
            if prof.is_degenerate() {
                let mut s = offset_center_weights(None, &source, &sol, cfg.epsilon, m)?;
                s.meta_mut().degenerate = Some("input lies on C*; coreset is C* with cluster masses".into());
                s.meta_mut().stage_sizes = vec![0];
                s
            } else {
                let d = importance_sample(&source, &prof, n2, &mut rng::stream(cfg.seed, "fl11"))?;
                let sampled = d.len();
                let mut s = offset_center_weights(Some(&d), &source, &sol, cfg.epsilon, m)?;
                s.meta_mut().stage_sizes = vec![sampled];
                s
            }
        }
        Method::Bfl16 => {
            let sol = solver::solve(x, cfg.k, m, cfg.seed, &cfg.solver)?;
            let prof = bfl16_sensitivity(x, &sol, m)?;
            let mut s = importance_sample(&source, &prof, n2, &mut rng::stream(cfg.seed, "bfl16"))?;
            s.meta_mut().stage_sizes = vec![s.len()];
            s
        }
        Method::Uniform => {
            let prof = uniform_sensitivity(x);
            let mut s = importance_sample(&source, &prof, n2, &mut rng::stream(cfg.seed, "uniform"))?;
            s.meta_mut().stage_sizes = vec![s.len()];
            s
        }
    };
    out.meta_mut().builder = cfg.method.name().into();
    Ok(out)
}

fn two_stage(
    x: &PointSet,
    source: &WeightedCoreset,
    sol: &ApproxSolution,
    cfg: &BuildConfig,
    n1: usize,
    n2: usize,
) -> Result<WeightedCoreset> {
    let m = &cfg.metric;
    let prof1 = sigma1(x, sol, m)?;
    let d1 = importance_sample(source, &prof1, n1, &mut rng::stream(cfg.seed, "stage1"))?;
    let prof2 = sigma2(&d1, sol, m)?;
    let mut s = if prof2.is_degenerate() {
        let mut s = offset_center_weights(None, &d1, sol, cfg.epsilon, m)?;
        s.meta_mut().degenerate =
            Some("stage-1 sample lies on C*; stage 2 skipped, coreset is C* with cluster masses".into());
        s
    } else {
        let d2 = importance_sample(&d1, &prof2, n2, &mut rng::stream(cfg.seed, "stage2"))?;
        offset_center_weights(Some(&d2), &d1, sol, cfg.epsilon, m)?
    };
    let stage2_rows = s.len() - sol.centers.k();
    s.meta_mut().stage_sizes = vec![d1.len(), stage2_rows];
    Ok(s)
}
