use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use coreset_core::adversarial::{gen_lower_bound, DEFAULT_SEPARATION};
use coreset_core::harness::{gen_ensemble, measure, EnsembleReport};
use coreset_core::subspace::{brute_flat_opt, flat_cost, svd_flat_opt, weak_coreset_sample, Flat};
use coreset_core::{build as build_coreset, synthetic, CoresetMeta, Method, PointSet, WeightedCoreset};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::io::{self, CsvOptions, Format};

fn required<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| anyhow!("missing required setting `{key}`"))
}

fn csv_options(cfg: &RunConfig) -> CsvOptions {
    CsvOptions {
        header: cfg.csv_header.unwrap_or(false),
        weights: cfg.csv_weights.unwrap_or(false),
    }
}

pub fn load_input(cfg: &RunConfig) -> Result<PointSet> {
    let path = required(&cfg.input, "input")?;
    let format = Format::resolve(path, cfg.format.as_deref())?;
    io::read_dataset(path, format, csv_options(cfg))
}

fn digest_hex(x: &PointSet) -> String {
    format!("{:016x}", x.digest())
}

fn elapsed(cfg: &RunConfig, start: Instant) -> Option<f64> {
    cfg.record_timings().then(|| start.elapsed().as_secs_f64())
}

/// Prints to stdout, or writes to `report` when configured.
pub fn emit(cfg: &RunConfig, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &cfg.report {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenSummary {
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub dim_used: Option<usize>,
    pub dataset_digest: String,
}

pub fn gen(cfg: &RunConfig) -> Result<GenSummary> {
    let kind = required(&cfg.kind, "kind")?.replace('_', "-");
    let seed = cfg.seed();
    let (ps, dim_used) = match kind.as_str() {
        "gaussian-mixture" | "gaussian" => {
            let ps = synthetic::gaussian_mixture(
                cfg.n.unwrap_or(1000),
                cfg.d.unwrap_or(2),
                cfg.k_true.unwrap_or(5),
                cfg.spread.unwrap_or(1.0),
                seed,
            )?;
            (ps, None)
        }
        "uniform-box" => (
            synthetic::uniform_box(cfg.n.unwrap_or(1000), cfg.d.unwrap_or(2), cfg.lo.unwrap_or(0.0), cfg.hi.unwrap_or(1.0), seed)?,
            None,
        ),
        "lowerbound" => {
            let inst = gen_lower_bound(
                cfg.k.unwrap_or(1),
                cfg.z.unwrap_or(100.0),
                cfg.d.unwrap_or(3),
                cfg.separation.unwrap_or(DEFAULT_SEPARATION),
            )?;
            let used = inst.dim_used;
            (inst.points, Some(used))
        }
        other => bail!("unknown dataset kind `{other}` (expected gaussian-mixture, uniform-box or lowerbound)"),
    };
    let out = required(&cfg.output, "output")?;
    io::write_dataset(out, &ps, Format::resolve(out, cfg.format.as_deref())?)?;
    Ok(GenSummary {
        kind,
        n: ps.len(),
        d: ps.dim(),
        dim_used,
        dataset_digest: digest_hex(&ps),
    })
}

pub fn build(cfg: &RunConfig) -> Result<(WeightedCoreset, Value)> {
    let x = load_input(cfg)?;
    let bc = cfg.build_config()?;
    let start = Instant::now();
    let s = build_coreset(&x, &bc)?;
    let wall = elapsed(cfg, start);
    let sidecar = json!({
        "coreset_meta": s.meta(),
        "rows": s.len(),
        "total_weight": s.total_weight(),
        "wall_time_s": wall,
    });
    let out = required(&cfg.output, "output")?;
    io::write_coreset(out, &s, Format::resolve(out, cfg.format.as_deref())?, Some(&sidecar))?;
    Ok((s, sidecar))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub dataset_digest: String,
    pub coreset_meta: CoresetMeta,
    pub ensembles: Vec<EnsembleReport>,
    pub eps_emp: f64,
    pub evaluated: usize,
    pub eps_budget: Option<f64>,
    pub within_budget: bool,
    pub wall_time_s: Option<f64>,
}

pub fn eval(cfg: &RunConfig) -> Result<EvalReport> {
    let x = load_input(cfg)?;
    let path = required(&cfg.coreset, "coreset")?;
    let s = io::read_coreset(path, Format::resolve(path, cfg.format.as_deref())?)?;
    if s.dim() != x.dim() {
        bail!("dimension mismatch: dataset has d={}, coreset has d={}", x.dim(), s.dim());
    }
    let meta = s.meta().clone();
    let k = cfg.k.or((meta.k > 0).then_some(meta.k)).unwrap_or(10);
    let m = match (cfg.p, cfg.z) {
        (None, None) if meta.builder != "unknown" => meta.metric,
        _ => cfg.metric()?,
    };
    let start = Instant::now();
    let specs = cfg.ensemble_specs(k, m.z(), x.dim())?;
    let ensembles = specs
        .iter()
        .map(|spec| gen_ensemble(&x, Some(&s), k, spec, &m))
        .collect::<coreset_core::Result<Vec<_>>>()?;
    let rep = measure(&x, &s, &ensembles, &m)?;
    let within_budget = cfg.eps_budget.is_none_or(|b| rep.eps_emp <= b);
    Ok(EvalReport {
        dataset_digest: digest_hex(&x),
        coreset_meta: meta,
        ensembles: rep.ensembles,
        eps_emp: rep.eps_emp,
        evaluated: rep.evaluated,
        eps_budget: cfg.eps_budget,
        within_budget,
        wall_time_s: elapsed(cfg, start),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteCheck {
    pub brute_value: f64,
    /// The z = 2 optimal flat of `X` evaluated with z-th power residuals.
    pub svd_flat_value_at_z: f64,
    pub brute_not_worse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceReport {
    pub dataset_digest: String,
    pub k: usize,
    pub z: f64,
    pub count: usize,
    pub sample_rows: usize,
    pub opt_x: f64,
    pub opt_s: f64,
    pub ratio: f64,
    pub both_zero: bool,
    /// `Σ d^z` of each side's SVD flat when z ≠ 2.
    pub value_x_at_z: f64,
    pub value_s_at_z: f64,
    pub coreset_meta: CoresetMeta,
    pub brute: Option<BruteCheck>,
    pub wall_time_s: Option<f64>,
}

pub fn subspace(cfg: &RunConfig) -> Result<SubspaceReport> {
    let x = load_input(cfg)?;
    let k = cfg.k.unwrap_or(5);
    let z = cfg.z.unwrap_or(2.0);
    let count = cfg.count.unwrap_or(500);
    let start = Instant::now();
    let s = weak_coreset_sample(&x, k, z, cfg.epsilon.unwrap_or(0.1), cfg.delta.unwrap_or(0.1), count, cfg.seed())?;
    let ident = WeightedCoreset::identity(&x);
    let on_x = svd_flat_opt(&ident, k)?;
    let on_s = svd_flat_opt(&s, k)?;
    // residuals of data inside a flat come out at rounding level, not 0
    let zero_x = 1e-12 * flat_cost(&ident, &Flat::origin(x.dim())?, 2.0)?;
    let zero_s = 1e-12 * flat_cost(&s, &Flat::origin(x.dim())?, 2.0)?;
    let both_zero = on_x.value <= zero_x && on_s.value <= zero_s;
    let ratio = if both_zero { 1.0 } else { on_s.value / on_x.value };
    let brute = if cfg.brute.unwrap_or(false) {
        let b = brute_flat_opt(&ident, k, z, cfg.span_budget.unwrap_or(x.len()))?;
        let svd_at_z = flat_cost(&ident, &on_x.flat, z)?;
        Some(BruteCheck {
            brute_value: b.value,
            svd_flat_value_at_z: svd_at_z,
            brute_not_worse: b.value <= svd_at_z * (1.0 + 1e-12),
        })
    } else {
        None
    };
    Ok(SubspaceReport {
        dataset_digest: digest_hex(&x),
        k,
        z,
        count,
        sample_rows: s.len(),
        ratio,
        both_zero,
        value_x_at_z: flat_cost(&ident, &on_x.flat, z)?,
        value_s_at_z: flat_cost(&s, &on_s.flat, z)?,
        opt_x: on_x.value,
        opt_s: on_s.value,
        coreset_meta: s.meta().clone(),
        brute,
        wall_time_s: elapsed(cfg, start),
    })
}

/// Builds every method on one synthetic mixture and measures each against
/// the same ensembles.
pub fn bench(cfg: &RunConfig) -> Result<Value> {
    let n = cfg.n.unwrap_or(10_000);
    let d = cfg.d.unwrap_or(20);
    let k = cfg.k.unwrap_or(10);
    let x = synthetic::gaussian_mixture(n, d, cfg.k_true.unwrap_or(k), cfg.spread.unwrap_or(1.0), cfg.seed())?;
    let mut rows = Vec::new();
    for method in Method::ALL {
        let run = RunConfig {
            method: Some(method.name().into()),
            k: Some(k),
            ..cfg.clone()
        };
        let bc = run.build_config()?;
        let t = Instant::now();
        let s = build_coreset(&x, &bc)?;
        let build_s = t.elapsed().as_secs_f64();
        let m = bc.metric;
        let t = Instant::now();
        let ensembles = run
            .ensemble_specs(k, m.z(), d)?
            .iter()
            .map(|spec| gen_ensemble(&x, Some(&s), k, spec, &m))
            .collect::<coreset_core::Result<Vec<_>>>()?;
        let rep = measure(&x, &s, &ensembles, &m)?;
        rows.push(json!({
            "method": method.name(),
            "rows": s.len(),
            "eps_emp": rep.eps_emp,
            "build_s": cfg.record_timings().then_some(build_s),
            "eval_s": cfg.record_timings().then_some(t.elapsed().as_secs_f64()),
        }));
    }
    Ok(json!({ "n": n, "d": d, "k": k, "dataset_digest": digest_hex(&x), "methods": rows }))
}

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}
