//! Hard instances for small coresets: `k` far-apart copies of the cross
//! polytope vertices `{o_i ± e_j}` and the center sets that expose a missing
//! vertex.

use serde::{Deserialize, Serialize};

use crate::coreset::WeightedCoreset;
use crate::cost::{ln_cost, nearest, LogValue};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::types::{CenterSet, PointSet};

/// Intra-copy diameter of `{±e_j}`.
const COPY_DIAMETER: f64 = 2.0;
pub const DEFAULT_SEPARATION: f64 = 1e6 * COPY_DIAMETER;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundInstance {
    pub points: PointSet,
    pub copy_anchors: Vec<Vec<f64>>,
    pub dim_used: usize,
    pub separation: f64,
    pub k: usize,
    pub z: f64,
}

impl LowerBoundInstance {
    /// Columns of the generated data: `dim_used`, plus one translation axis when `k ≥ 2`.
    pub fn ambient_dim(&self) -> usize {
        self.copy_anchors[0].len()
    }

    pub fn metric(&self) -> Result<Metric> {
        Metric::euclidean(self.z)
    }

    /// `o_i + sign·e_j`.
    pub fn vertex(&self, copy: usize, axis: usize, sign: f64) -> Vec<f64> {
        let mut v = self.copy_anchors[copy].clone();
        v[axis] += sign;
        v
    }

    /// The baseline center set `C = (o_1, …, o_k)`.
    pub fn baseline(&self) -> CenterSet {
        CenterSet::from_rows(&self.copy_anchors).expect("anchors share one dimension")
    }
}

/// `min(d, 2^⌊z/20⌋)`.
pub fn dim_used(d: usize, z: f64) -> usize {
    let e = (z / 20.0).floor();
    if e >= 63.0 {
        d
    } else {
        d.min(1usize << (e as u32))
    }
}

/// Builds `k` copies of `{±e_1, …, ±e_m}` with `m = min(d, 2^⌊z/20⌋)`.
/// For `k ≥ 2` the copies sit at `o_i = i·separation` along an extra axis;
/// a single copy is centered at the origin in `m` dimensions. Points are
/// ordered copy by copy as `+e_1, −e_1, +e_2, −e_2, …`.
pub fn gen_lower_bound(k: usize, z: f64, d: usize, separation: f64) -> Result<LowerBoundInstance> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidConfig("k and d must be at least 1".into()));
    }
    if !(z >= 1.0 && z.is_finite()) {
        return Err(Error::InvalidConfig(format!("z must be finite and ≥ 1, got {z}")));
    }
    if !(separation > 2.0 * COPY_DIAMETER && separation.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "separation must exceed {} so copies dominate the intra-copy geometry, got {separation}",
            2.0 * COPY_DIAMETER
        )));
    }
    let m = dim_used(d, z);
    let ambient = if k >= 2 { m + 1 } else { m };
    let anchors: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut o = vec![0.0; ambient];
            if k >= 2 {
                o[m] = i as f64 * separation;
            }
            o
        })
        .collect();
    let mut coords = Vec::with_capacity(2 * m * k * ambient);
    for o in &anchors {
        for j in 0..m {
            for sign in [1.0, -1.0] {
                coords.extend(o.iter().enumerate().map(|(a, &v)| if a == j { v + sign } else { v }));
            }
        }
    }
    Ok(LowerBoundInstance {
        points: PointSet::new(ambient, coords)?,
        copy_anchors: anchors,
        dim_used: m,
        separation,
        k,
        z,
    })
}

/// The baseline `C` followed by, for each copy `i`, axis `j` and sign, the set
/// with `c_i` replaced by `o_i ± e_j`: `1 + 2·dim_used·k` center sets.
pub fn adversarial_ensembles(inst: &LowerBoundInstance) -> Vec<CenterSet> {
    let base = inst.baseline();
    let mut out = vec![base.clone()];
    for i in 0..inst.k {
        for j in 0..inst.dim_used {
            for sign in [-1.0, 1.0] {
                out.push(base.replaced(i, &inst.vertex(i, j, sign)).expect("same dimension"));
            }
        }
    }
    out
}

/// One set per copy with `c_i` moved to `o_i + 10⁵·z·k·e_1`. Costs against
/// these overflow `f64` for large `z`; evaluate them in the log domain.
pub fn weight_probe_ensembles(inst: &LowerBoundInstance) -> Vec<CenterSet> {
    let base = inst.baseline();
    let reach = 1e5 * inst.z * inst.k as f64;
    (0..inst.k)
        .map(|i| {
            let mut c = inst.copy_anchors[i].clone();
            c[0] += reach;
            base.replaced(i, &c).expect("same dimension")
        })
        .collect()
}

/// Outcome of the two-sided test on one coreset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    /// Per copy, the first vertex index (within the copy) whose Voronoi cell
    /// holds no coreset point.
    pub empty_cells: Vec<Option<usize>>,
    pub ln_cost_x_c: f64,
    pub ln_cost_s_c: f64,
    pub ln_cost_x_c_prime: f64,
    pub ln_cost_s_c_prime: f64,
    /// `cost_S(C′) ≤ 0.5·cost_X(C′)`.
    pub undershoots_c_prime: bool,
    /// `cost_S(C) ≥ 1.01·cost_X(C)`.
    pub overshoots_c: bool,
}

impl Dichotomy {
    pub fn holds(&self) -> bool {
        self.undershoots_c_prime || self.overshoots_c
    }
}

fn ln_of(v: LogValue) -> f64 {
    if v.sign <= 0 {
        f64::NEG_INFINITY
    } else {
        v.ln_abs
    }
}

/// For a coreset with at least one empty cell, builds `C′` by moving every
/// such copy's center to the reflection `2·o_i − y` of its empty vertex `y`
/// and compares both sides on `C` and `C′` in the log domain. Returns `None`
/// when no cell is empty.
pub fn dichotomy_check(inst: &LowerBoundInstance, s: &WeightedCoreset) -> Result<Option<Dichotomy>> {
    let x = &inst.points;
    let m = inst.metric()?;
    if s.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: s.dim(),
        });
    }
    let verts = CenterSet::new(x.dim(), x.coords().to_vec())?;
    let per_copy = 2 * inst.dim_used;
    let mut occupied = vec![false; x.len()];
    for p in s.points() {
        occupied[nearest(p, &verts, &m).0] = true;
    }
    let empty_cells: Vec<Option<usize>> = (0..inst.k)
        .map(|i| (0..per_copy).find(|&v| !occupied[i * per_copy + v]))
        .collect();
    if empty_cells.iter().all(Option::is_none) {
        return Ok(None);
    }
    let c = inst.baseline();
    let mut c_prime = c.clone();
    for (i, cell) in empty_cells.iter().enumerate() {
        if let Some(v) = cell {
            let y = x.point(i * per_copy + v);
            let o = &inst.copy_anchors[i];
            let reflected: Vec<f64> = o.iter().zip(y).map(|(oi, yi)| 2.0 * oi - yi).collect();
            c_prime = c_prime.replaced(i, &reflected)?;
        }
    }
    let ln_cost_x_c = ln_of(ln_cost(x, &c, &m)?);
    let ln_cost_s_c = ln_of(s.ln_cost(&c, &m)?);
    let ln_cost_x_c_prime = ln_of(ln_cost(x, &c_prime, &m)?);
    let ln_cost_s_c_prime = ln_of(s.ln_cost(&c_prime, &m)?);
    Ok(Some(Dichotomy {
        undershoots_c_prime: ln_cost_s_c_prime <= 0.5f64.ln() + ln_cost_x_c_prime,
        overshoots_c: ln_cost_s_c >= 1.01f64.ln() + ln_cost_x_c,
        empty_cells,
        ln_cost_x_c,
        ln_cost_s_c,
        ln_cost_x_c_prime,
        ln_cost_s_c_prime,
    }))
}
