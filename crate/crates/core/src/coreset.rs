use serde::{Deserialize, Serialize};

use crate::cost::{self, LogValue};
use crate::error::{check_dim, Error, Result};
use crate::metric::Metric;
use crate::sampler::{SizeBound, TheorySizes};
use crate::types::{CenterSet, PointSet};

/// Provenance carried alongside every coreset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetMeta {
    pub builder: String,
    pub seed: u64,
    /// FNV-1a digest of the source dataset, as 16 hex digits.
    pub source_digest: String,
    pub source_len: usize,
    pub k: usize,
    pub metric: Metric,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha_bound: f64,
    pub n1: usize,
    pub n2: usize,
    /// Distinct rows after merging duplicate draws, per sampling stage.
    pub stage_sizes: Vec<usize>,
    /// Rows at the end of the table that are offset-corrected centers.
    pub offset_rows: usize,
    pub has_negative_weights: bool,
    pub theory: Option<TheorySizes>,
    /// Worst-case count of a single-pass sampler such as the subspace one.
    pub theory_count: Option<SizeBound>,
    /// Set when a degenerate branch replaced part of the pipeline.
    pub degenerate: Option<String>,
}

impl CoresetMeta {
    pub fn new(builder: &str, source: &PointSet, metric: Metric) -> Self {
        Self {
            builder: builder.to_string(),
            seed: 0,
            source_digest: format!("{:016x}", source.digest()),
            source_len: source.len(),
            k: 0,
            metric,
            epsilon: 0.0,
            delta: 0.0,
            alpha_bound: 1.0,
            n1: 0,
            n2: 0,
            stage_sizes: Vec::new(),
            offset_rows: 0,
            has_negative_weights: false,
            theory: None,
            theory_count: None,
            degenerate: None,
        }
    }
}

/// Points with real weights. Only rows flagged as offset-corrected centers
/// may carry a negative weight; the total weight is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoreset {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    offset: Vec<bool>,
    meta: CoresetMeta,
}

impl WeightedCoreset {
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        offset: Vec<bool>,
        mut meta: CoresetMeta,
    ) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput("coreset rows do not match dimension".into()));
        }
        let n = coords.len() / dim;
        check_dim(n, weights.len())?;
        check_dim(n, offset.len())?;
        if coords.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("coreset values must be finite".into()));
        }
        if let Some(i) = weights
            .iter()
            .zip(&offset)
            .position(|(&w, &is_offset)| w < 0.0 && !is_offset)
        {
            return Err(Error::InvalidInput(format!(
                "row {i} has negative weight but is not an offset-corrected center"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "coreset total weight must be positive, got {total}"
            )));
        }
        meta.has_negative_weights = weights.iter().any(|&w| w < 0.0);
        meta.offset_rows = offset.iter().filter(|&&f| f).count();
        Ok(Self {
            dim,
            coords,
            weights,
            offset,
            meta,
        })
    }

    /// `S = X` with weights equal to the multiplicities.
    pub fn identity(x: &PointSet) -> Self {
        let mut meta = CoresetMeta::new("identity", x, Metric::kmeans());
        meta.stage_sizes = vec![x.len()];
        Self::new(
            x.dim(),
            x.coords().to_vec(),
            x.weights(),
            vec![false; x.len()],
            meta,
        )
        .expect("a valid point set is a valid coreset")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_offset(&self, i: usize) -> bool {
        self.offset[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn meta(&self) -> &CoresetMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut CoresetMeta {
        &mut self.meta
    }

    /// The rows as a point set, negative weights clamped to zero. Used where
    /// a nonnegative weighting is required, such as running a solver on the
    /// coreset itself.
    pub fn to_point_set_clamped(&self) -> Result<PointSet> {
        PointSet::with_multiplicity(
            self.dim,
            self.coords.clone(),
            self.weights.iter().map(|w| w.max(0.0)).collect(),
        )
    }

    pub fn cost(&self, c: &CenterSet, m: &Metric) -> Result<f64> {
        cost::cost_of_rows(&self.coords, self.dim, &self.weights, c, m)
    }

    pub fn ln_cost(&self, c: &CenterSet, m: &Metric) -> Result<LogValue> {
        cost::ln_cost_of_rows(&self.coords, self.dim, &self.weights, c, m)
    }
}

/// `Σ_{x∈S} w(x)·d_p^z(x, C)`; signed when offset weights are negative.
pub fn cost_weighted(s: &WeightedCoreset, c: &CenterSet, m: &Metric) -> Result<f64> {
    s.cost(c, m)
}
