//! Empirical distortion: evaluate a coreset against families of center sets
//! and report the worst relative cost error.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversarial::{adversarial_ensembles, gen_lower_bound, weight_probe_ensembles};
use crate::coreset::WeightedCoreset;
use crate::cost::{cost, ln_cost, LogValue};
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::rng;
use crate::solver::{self, SolverConfig};
use crate::types::{CenterSet, PointSet};

/// Parameters of the lower-bound instance an adversarial ensemble targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub k: usize,
    pub z: f64,
    pub d: usize,
    pub separation: f64,
    /// Also emit the far weight-probe sets.
    pub probes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// `k` i.i.d. uniform points in the bounding box of `X` scaled about its
    /// center by `inflation`.
    RandomBox { inflation: f64 },
    /// D^z seeding on `X`.
    Kmeanspp,
    /// D^z seeding plus refinement run on the coreset itself.
    LloydOnCoreset { rounds: usize },
    /// Gaussian jitter with standard deviation `radius` around `base`, or
    /// around a solution of `X` when no base is given.
    Perturbed { radius: f64, base: Option<CenterSet> },
    /// Every set of the lower-bound family; `trials` is ignored.
    Adversarial { instance: AdversarialParams },
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::RandomBox { .. } => "random_box",
            EnsembleKind::Kmeanspp => "kmeanspp",
            EnsembleKind::LloydOnCoreset { .. } => "lloyd_on_coreset",
            EnsembleKind::Perturbed { .. } => "perturbed",
            EnsembleKind::Adversarial { .. } => "adversarial",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, trials: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, trials, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("ensemble trials must be at least 1".into()));
        }
        match &self.kind {
            EnsembleKind::RandomBox { inflation } if !(*inflation > 0.0 && inflation.is_finite()) => {
                Err(Error::InvalidConfig(format!("inflation must be positive, got {inflation}")))
            }
            EnsembleKind::Perturbed { radius, .. } if !(*radius >= 0.0 && radius.is_finite()) => {
                Err(Error::InvalidConfig(format!("radius must be ≥ 0, got {radius}")))
            }
            _ => Ok(()),
        }
    }
}

/// Parses `name[:trials[:param]]`, for instance `random_box:500:1.5`,
/// `kmeanspp:200`, `lloyd_on_coreset:100:5` or `perturbed:50:0.1`.
/// Adversarial ensembles need instance parameters and are built directly.
impl FromStr for EnsembleSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = |what: &str| Error::InvalidConfig(format!("ensemble `{s}`: {what}"));
        let trials = match parts.get(1) {
            Some(t) => t.parse().map_err(|_| bad("trials must be an integer"))?,
            None => 100,
        };
        let param = |default: f64| -> Result<f64> {
            match parts.get(2) {
                Some(p) => p.parse().map_err(|_| bad("parameter must be a number")),
                None => Ok(default),
            }
        };
        if parts.len() > 3 {
            return Err(bad("expected name[:trials[:param]]"));
        }
        let kind = match parts[0].replace('-', "_").as_str() {
            "random_box" => EnsembleKind::RandomBox { inflation: param(1.0)? },
            "kmeanspp" => EnsembleKind::Kmeanspp,
            "lloyd_on_coreset" => EnsembleKind::LloydOnCoreset {
                rounds: param(solver::DEFAULT_ROUNDS as f64)? as usize,
            },
            "perturbed" => EnsembleKind::Perturbed {
                radius: param(0.1)?,
                base: None,
            },
            "adversarial" => return Err(bad("adversarial ensembles are built from instance parameters")),
            other => return Err(bad(&format!("unknown kind `{other}`"))),
        };
        EnsembleSpec::new(kind, trials, 0)
    }
}

/// A generated family of center sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    pub centers: Vec<CenterSet>,
}

fn trial_rng(spec: &EnsembleSpec, trial: usize) -> rng::StreamRng {
    rng::indexed_stream(spec.seed, &format!("ensemble/{}", spec.kind.name()), trial as u64)
}

/// Generates the center sets of one ensemble. Each trial draws from its own
/// stream, so trial `t` does not depend on how many trials are requested.
pub fn gen_ensemble(
    x: &PointSet,
    coreset: Option<&WeightedCoreset>,
    k: usize,
    spec: &EnsembleSpec,
    m: &Metric,
) -> Result<Ensemble> {
    spec.validate()?;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let d = x.dim();
    let trials = 0..spec.trials;
    let centers: Vec<CenterSet> = match &spec.kind {
        EnsembleKind::RandomBox { inflation } => {
            let (lo, hi) = x.bounding_box();
            let (lo, hi): (Vec<f64>, Vec<f64>) = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| {
                    let (mid, half) = ((l + h) / 2.0, (h - l) / 2.0 * inflation);
                    (mid - half, mid + half)
                })
                .unzip();
            trials
                .map(|t| {
                    let mut r = trial_rng(spec, t);
                    let coords = (0..k * d)
                        .map(|i| {
                            let j = i % d;
                            if lo[j] < hi[j] {
                                r.random_range(lo[j]..=hi[j])
                            } else {
                                lo[j]
                            }
                        })
                        .collect();
                    CenterSet::new(d, coords)
                })
                .collect::<Result<_>>()?
        }
        EnsembleKind::Kmeanspp => trials
            .map(|t| solver::dz_seed_with(x, k, m, &mut trial_rng(spec, t)))
            .collect::<Result<_>>()?,
        EnsembleKind::LloydOnCoreset { rounds } => {
            let s = coreset.ok_or_else(|| {
                Error::InvalidConfig("lloyd_on_coreset needs a coreset".into())
            })?;
            check_dim(d, s.dim())?;
            let clamped = s.to_point_set_clamped()?;
            trials
                .map(|t| {
                    let start = solver::dz_seed_with(&clamped, k, m, &mut trial_rng(spec, t))?;
                    Ok(solver::local_improve(&clamped, &start, m, *rounds)?.centers)
                })
                .collect::<Result<_>>()?
        }
        EnsembleKind::Perturbed { radius, base } => {
            let base = match base {
                Some(b) => {
                    check_dim(d, b.dim())?;
                    b.clone()
                }
                None => solver::solve(x, k, m, spec.seed, &SolverConfig::default())?.centers,
            };
            let noise = Normal::new(0.0, *radius)
                .map_err(|e| Error::InvalidConfig(format!("perturbation radius: {e}")))?;
            trials
                .map(|t| {
                    let mut r = trial_rng(spec, t);
                    let coords = base.coords().iter().map(|c| c + noise.sample(&mut r)).collect();
                    CenterSet::new(d, coords)
                })
                .collect::<Result<_>>()?
        }
        EnsembleKind::Adversarial { instance } => {
            let inst = gen_lower_bound(instance.k, instance.z, instance.d, instance.separation)?;
            check_dim(d, inst.ambient_dim())?;
            let mut sets = adversarial_ensembles(&inst);
            if instance.probes {
                sets.extend(weight_probe_ensembles(&inst));
            }
            sets
        }
    };
    Ok(Ensemble {
        spec: spec.clone(),
        centers,
    })
}

/// `cost(X, C)` for every set of every ensemble. The log form is only
/// consulted when the plain value overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueCosts(Vec<Vec<CostPair>>);

#[derive(Debug, Clone, Copy, PartialEq)]
struct CostPair {
    plain: f64,
    log: LogValue,
}

impl CostPair {
    fn eval(plain: f64, fallback: impl FnOnce() -> Result<LogValue>) -> Result<Self> {
        let log = if plain.is_finite() {
            LogValue::from_f64(plain)
        } else {
            fallback()?
        };
        Ok(Self { plain, log })
    }

    fn is_zero(&self) -> bool {
        self.log.sign == 0
    }
}

pub fn true_costs(x: &PointSet, ensembles: &[Ensemble], m: &Metric) -> Result<TrueCosts> {
    let rows = ensembles
        .iter()
        .map(|e| {
            e.centers
                .par_iter()
                .map(|c| CostPair::eval(cost(x, c, m)?, || ln_cost(x, c, m)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(TrueCosts(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub kind: String,
    pub trials: usize,
    pub seed: u64,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    /// FNV-1a digest (hex) of the center set attaining `max_rel_err`.
    pub worst_center_digest: Option<String>,
    /// Sets with `cost(X, C) = 0`; these enter `max_abs_err` instead.
    pub zero_cost_count: usize,
    pub max_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub ensembles: Vec<EnsembleReport>,
    pub eps_emp: f64,
    pub evaluated: usize,
}

enum Outcome {
    Relative(f64),
    Absolute(f64),
}

fn compare(truth: CostPair, s: &WeightedCoreset, c: &CenterSet, m: &Metric) -> Result<Outcome> {
    let approx = CostPair::eval(s.cost(c, m)?, || s.ln_cost(c, m))?;
    if truth.is_zero() {
        let abs = if approx.plain.is_finite() { approx.plain.abs() } else { f64::INFINITY };
        return Ok(Outcome::Absolute(abs));
    }
    if truth.plain.is_finite() && approx.plain.is_finite() {
        return Ok(Outcome::Relative((approx.plain - truth.plain).abs() / truth.plain));
    }
    Ok(Outcome::Relative((approx.log.ratio(truth.log) - 1.0).abs()))
}

/// Relative error `|cost_S(C) − cost_X(C)| / cost_X(C)` over every set.
pub fn measure(x: &PointSet, s: &WeightedCoreset, ensembles: &[Ensemble], m: &Metric) -> Result<DistortionReport> {
    check_dim(x.dim(), s.dim())?;
    let truth = true_costs(x, ensembles, m)?;
    measure_against(&truth, s, ensembles, m)
}

/// Like [`measure`] with the full-data costs computed once up front, so
/// several coresets can share them.
pub fn measure_against(
    truth: &TrueCosts,
    s: &WeightedCoreset,
    ensembles: &[Ensemble],
    m: &Metric,
) -> Result<DistortionReport> {
    if truth.0.len() != ensembles.len() {
        return Err(Error::InvalidInput("true costs do not match the ensembles".into()));
    }
    let mut reports = Vec::with_capacity(ensembles.len());
    for (e, row) in ensembles.iter().zip(&truth.0) {
        if row.len() != e.centers.len() {
            return Err(Error::InvalidInput("true costs do not match the ensembles".into()));
        }
        for c in &e.centers {
            check_dim(s.dim(), c.dim())?;
        }
        let outcomes = e
            .centers
            .par_iter()
            .zip(row.par_iter())
            .map(|(c, &t)| compare(t, s, c, m))
            .collect::<Result<Vec<_>>>()?;

        let mut rep = EnsembleReport {
            kind: e.spec.kind.name().to_string(),
            trials: e.centers.len(),
            seed: e.spec.seed,
            max_rel_err: 0.0,
            mean_rel_err: 0.0,
            worst_center_digest: None,
            zero_cost_count: 0,
            max_abs_err: 0.0,
        };
        let mut sum = 0.0;
        let mut rel_count = 0usize;
        for (c, o) in e.centers.iter().zip(&outcomes) {
            match *o {
                Outcome::Relative(r) => {
                    sum += r;
                    rel_count += 1;
                    if rep.worst_center_digest.is_none() || r > rep.max_rel_err {
                        rep.max_rel_err = r;
                        rep.worst_center_digest = Some(format!("{:016x}", c.digest()));
                    }
                }
                Outcome::Absolute(a) => {
                    rep.zero_cost_count += 1;
                    rep.max_abs_err = rep.max_abs_err.max(a);
                }
            }
        }
        if rel_count > 0 {
            rep.mean_rel_err = (sum / rel_count as f64).min(rep.max_rel_err);
        }
        reports.push(rep);
    }
    let eps_emp = reports.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
    let evaluated = reports.iter().map(|r| r.trials).sum();
    Ok(DistortionReport {
        ensembles: reports,
        eps_emp,
        evaluated,
    })
}
