use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{check_dim, Error, Result};

/// The input dataset: an immutable `n × d` table with optional per-point
/// multiplicities (default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    multiplicity: Option<Vec<f64>>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        Self::build(dim, coords, None)
    }

    pub fn with_multiplicity(dim: usize, coords: Vec<f64>, multiplicity: Vec<f64>) -> Result<Self> {
        Self::build(dim, coords, Some(multiplicity))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (dim, coords) = flatten_rows(rows)?;
        Self::new(dim, coords)
    }

    fn build(dim: usize, coords: Vec<f64>, multiplicity: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "coordinate buffer of length {} is not a nonempty multiple of d={dim}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate in row {}",
                i / dim
            )));
        }
        let n = coords.len() / dim;
        if let Some(m) = &multiplicity {
            check_dim(n, m.len())?;
            if m.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::InvalidInput(
                    "multiplicities must be finite and nonnegative".into(),
                ));
            }
            if !m.iter().any(|&w| w > 0.0) {
                return Err(Error::InvalidInput(
                    "at least one multiplicity must be positive".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            coords,
            multiplicity,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; a `PointSet` holds at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn multiplicity(&self, i: usize) -> f64 {
        self.multiplicity.as_ref().map_or(1.0, |m| m[i])
    }

    pub fn multiplicities(&self) -> Option<&[f64]> {
        self.multiplicity.as_deref()
    }

    /// Multiplicities with the implicit default of 1 filled in.
    pub fn weights(&self) -> Vec<f64> {
        match &self.multiplicity {
            Some(m) => m.clone(),
            None => vec![1.0; self.len()],
        }
    }

    pub fn total_mass(&self) -> f64 {
        match &self.multiplicity {
            Some(m) => m.iter().sum(),
            None => self.len() as f64,
        }
    }

    /// Per-axis `(min, max)` over all points.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.points() {
            for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(p) {
                *l = l.min(v);
                *h = h.max(v);
            }
        }
        (lo, hi)
    }

    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            coords.extend_from_slice(self.point(r));
        }
        match &self.multiplicity {
            Some(m) => Self::with_multiplicity(self.dim, coords, rows.iter().map(|&r| m[r]).collect()),
            None => Self::new(self.dim, coords),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self.len(), self.dim, &self.coords, self.multiplicity.as_deref())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let raw = codec::decode(bytes)?;
        match raw.weights {
            Some(w) => Self::with_multiplicity(raw.d, raw.coords, w),
            None => Self::new(raw.d, raw.coords),
        }
    }

    /// FNV-1a over the canonical binary encoding.
    pub fn digest(&self) -> u64 {
        codec::fnv1a(&self.to_bytes())
    }
}

/// An ordered list of `k ≥ 1` centers; repetition allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSet {
    dim: usize,
    coords: Vec<f64>,
}

impl CenterSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(
                "center set needs k ≥ 1 centers of dimension ≥ 1".into(),
            ));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite center coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (dim, coords) = flatten_rows(rows)?;
        Self::new(dim, coords)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Copy with center `i` replaced.
    pub fn replaced(&self, i: usize, center: &[f64]) -> Result<Self> {
        check_dim(self.dim, center.len())?;
        let mut coords = self.coords.clone();
        coords[i * self.dim..(i + 1) * self.dim].copy_from_slice(center);
        Self::new(self.dim, coords)
    }

    /// Copy with one more center appended.
    pub fn pushed(&self, center: &[f64]) -> Result<Self> {
        check_dim(self.dim, center.len())?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(center);
        Self::new(self.dim, coords)
    }

    pub fn digest(&self) -> u64 {
        codec::fnv1a(&codec::encode(self.k(), self.dim, &self.coords, None))
    }
}

fn flatten_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<(usize, Vec<f64>)> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidInput("no rows".into()))?;
    let dim = first.as_ref().len();
    let mut coords = Vec::with_capacity(rows.len() * dim);
    for r in rows {
        check_dim(dim, r.as_ref().len())?;
        coords.extend_from_slice(r.as_ref());
    }
    Ok((dim, coords))
}
