//! Run configuration: a flat TOML file whose every key can also be given as
//! a `--kebab-case` flag. Flags win over the file, the file wins over the
//! built-in defaults. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use coreset_core::adversarial::DEFAULT_SEPARATION;
use coreset_core::harness::{AdversarialParams, EnsembleKind, EnsembleSpec};
use coreset_core::{BuildConfig, Method, Metric, SolverConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset to read (`.csv` or binary)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where `gen` and `build` write their result
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Coreset file read by `eval`
    #[arg(long)]
    pub coreset: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Force `csv` or `bin` instead of going by file extension
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub csv_header: Option<bool>,
    /// The last CSV column holds point weights
    #[arg(long)]
    pub csv_weights: Option<bool>,

    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// two-stage, fl11, bfl16 or uniform
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the worst-case sample sizes
    #[arg(long)]
    pub theory_mode: Option<bool>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub alpha_bound: Option<f64>,
    /// Seedings tried by the approximate solver
    #[arg(long)]
    pub restarts: Option<usize>,

    /// Comma-separated `name[:trials[:param]]` list
    #[arg(long)]
    pub ensembles: Option<String>,
    /// Exit with status 2 when eps_emp exceeds this
    #[arg(long)]
    pub eps_budget: Option<f64>,
    /// Include the weight-probe sets in adversarial ensembles
    #[arg(long)]
    pub probes: Option<bool>,

    #[arg(long)]
    pub threads: Option<usize>,
    /// Set to false for byte-stable reports
    #[arg(long)]
    pub record_timings: Option<bool>,

    /// gaussian-mixture, uniform-box or lowerbound
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k_true: Option<usize>,
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,

    /// Weak-coreset sample size for `subspace`
    #[arg(long)]
    pub count: Option<usize>,
    /// Cross-check with the exhaustive flat search
    #[arg(long)]
    pub brute: Option<bool>,
    #[arg(long)]
    pub span_budget: Option<usize>,
}

pub const DEFAULT_ENSEMBLES: &str = "kmeanspp:100,lloyd_on_coreset:20,random_box:100";

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration file")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Keys set in `over` replace the ones in `self`.
    pub fn overlay(&self, over: &RunConfig) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        let top = serde_json::to_value(over)?;
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            for (key, v) in t {
                if !v.is_null() {
                    b.insert(key, v);
                }
            }
        }
        Ok(serde_json::from_value(base)?)
    }

    /// Reads `file` (if any) and applies the command-line values on top.
    pub fn resolve(file: Option<&Path>, flags: &RunConfig) -> Result<Self> {
        match file {
            Some(path) => Self::from_file(path)?.overlay(flags),
            None => Ok(flags.clone()),
        }
    }

    pub fn metric(&self) -> Result<Metric> {
        Ok(Metric::new(self.p.unwrap_or(2.0), self.z.unwrap_or(2.0))?)
    }

    pub fn method(&self) -> Result<Method> {
        Ok(self.method.as_deref().unwrap_or("two-stage").parse()?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn record_timings(&self) -> bool {
        self.record_timings.unwrap_or(true)
    }

    pub fn build_config(&self) -> Result<BuildConfig> {
        let defaults = BuildConfig::default();
        let solver = SolverConfig {
            rounds: self.rounds.unwrap_or(defaults.solver.rounds),
            alpha_bound: self.alpha_bound.unwrap_or(defaults.solver.alpha_bound),
            restarts: self.restarts.unwrap_or(defaults.solver.restarts),
        };
        let cfg = BuildConfig {
            k: self.k.unwrap_or(defaults.k),
            metric: self.metric()?,
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            delta: self.delta.unwrap_or(defaults.delta),
            n1: self.n1.unwrap_or(defaults.n1),
            n2: self.n2.unwrap_or(defaults.n2),
            method: self.method()?,
            seed: self.seed(),
            theory_mode: self.theory_mode.unwrap_or(false),
            solver,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ensemble specs with per-entry seeds derived from `seed`. The token
    /// `adversarial` targets the lower-bound instance described by `k`, `z`
    /// and `separation`, with `dim` taken from the dataset.
    pub fn ensemble_specs(&self, k: usize, z: f64, dim: usize) -> Result<Vec<EnsembleSpec>> {
        let list = self.ensembles.as_deref().unwrap_or(DEFAULT_ENSEMBLES);
        let mut out = Vec::new();
        for (i, token) in list.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            let seed = self.seed().wrapping_add(i as u64);
            let mut spec = if token == "adversarial" {
                let d = if k >= 2 { dim.saturating_sub(1) } else { dim };
                let instance = AdversarialParams {
                    k,
                    z,
                    d: d.max(1),
                    separation: self.separation.unwrap_or(DEFAULT_SEPARATION),
                    probes: self.probes.unwrap_or(false),
                };
                EnsembleSpec::new(EnsembleKind::Adversarial { instance }, 1, seed)?
            } else {
                token.parse::<EnsembleSpec>()?
            };
            spec.seed = seed;
            out.push(spec);
        }
        if out.is_empty() {
            bail!("no ensembles configured");
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("k = 3\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml_str("k = \"three\"\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml_str("k = 3\nseed = 9\nmethod = \"fl11\"\n").unwrap();
        let flags = RunConfig {
            seed: Some(4),
            ..RunConfig::default()
        };
        let merged = file.overlay(&flags).unwrap();
        assert_eq!((merged.k, merged.seed, merged.method.as_deref()), (Some(3), Some(4), Some("fl11")));
    }

    #[test]
    fn defaults_fill_the_build_config() {
        let cfg = RunConfig::default().build_config().unwrap();
        assert_eq!(cfg, BuildConfig::default());
        let bad = RunConfig {
            epsilon: Some(0.7),
            ..RunConfig::default()
        };
        assert!(bad.build_config().is_err());
    }

    #[test]
    fn ensemble_list_parsing() {
        let cfg = RunConfig {
            ensembles: Some("kmeanspp:5, random_box:7:2,adversarial".into()),
            seed: Some(10),
            ..RunConfig::default()
        };
        let specs = cfg.ensemble_specs(2, 100.0, 33).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!((specs[0].trials, specs[0].seed), (5, 10));
        assert_eq!(specs[1].kind, EnsembleKind::RandomBox { inflation: 2.0 });
        match &specs[2].kind {
            EnsembleKind::Adversarial { instance } => assert_eq!((instance.k, instance.d), (2, 32)),
            other => panic!("{other:?}"),
        }
    }
}
