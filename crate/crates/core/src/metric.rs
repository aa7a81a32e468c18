use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// The dissimilarity `d_p(x, y)^z`, with `d_p` the ℓp distance.
///
/// Internally distances are handled through the *base* `Σ |x_i − y_i|^p`,
/// which is monotone in `d_p` and cheap; the power `z / p` is applied only to
/// the values that survive a nearest-center reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMetric", into = "RawMetric")]
pub struct Metric {
    p: f64,
    z: f64,
    kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// p = 1
    Manhattan,
    /// p = 1.5
    ThreeHalves,
    /// p = 2
    Euclidean,
    General,
}

#[derive(Serialize, Deserialize)]
struct RawMetric {
    p: f64,
    z: f64,
}

impl TryFrom<RawMetric> for Metric {
    type Error = Error;
    fn try_from(raw: RawMetric) -> Result<Self> {
        Metric::new(raw.p, raw.z)
    }
}

impl From<Metric> for RawMetric {
    fn from(m: Metric) -> Self {
        RawMetric { p: m.p, z: m.z }
    }
}

impl Metric {
    pub fn new(p: f64, z: f64) -> Result<Self> {
        if !p.is_finite() || !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "distance exponent p must lie in [1, 2] (got {p}); p > 2 is not supported"
            )));
        }
        if !z.is_finite() || z < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "cost power z must be finite and ≥ 1 (got {z})"
            )));
        }
        let kind = if p == 1.0 {
            Kind::Manhattan
        } else if p == 1.5 {
            Kind::ThreeHalves
        } else if p == 2.0 {
            Kind::Euclidean
        } else {
            Kind::General
        };
        Ok(Self { p, z, kind })
    }

    /// Euclidean distance to the power `z`.
    pub fn euclidean(z: f64) -> Result<Self> {
        Self::new(2.0, z)
    }

    pub fn kmeans() -> Self {
        Self::new(2.0, 2.0).unwrap()
    }

    pub fn kmedian() -> Self {
        Self::new(2.0, 1.0).unwrap()
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    /// `Σ |x_i − y_i|^p`. No dimension check.
    #[inline]
    pub fn base(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            Kind::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            Kind::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Kind::ThreeHalves => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let t = (a - b).abs();
                    t * t.sqrt()
                })
                .sum(),
            Kind::General => x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(self.p)).sum(),
        }
    }

    /// Maps a base value to `d_p^z`.
    #[inline]
    pub fn from_base(&self, base: f64) -> f64 {
        match self.kind {
            Kind::Euclidean if self.z == 2.0 => base,
            Kind::Euclidean if self.z == 1.0 => base.sqrt(),
            Kind::Manhattan if self.z == 1.0 => base,
            _ => base.powf(self.z / self.p),
        }
    }

    /// Maps a base value to `ln d_p^z`.
    #[inline]
    pub fn ln_from_base(&self, base: f64) -> f64 {
        (self.z / self.p) * base.ln()
    }

    /// `d_p(x, y)^z` without the dimension check.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.from_base(self.base(x, y))
    }

    /// `ln d_p(x, y)^z`; `-inf` when `x = y`.
    #[inline]
    pub fn ln_eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.ln_from_base(self.base(x, y))
    }
}

/// `d_p(x, y)^z`.
pub fn dist(x: &[f64], y: &[f64], m: &Metric) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(m.eval(x, y))
}
