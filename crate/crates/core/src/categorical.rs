use rand::Rng;

use crate::error::{Error, Result};

/// Inverse-CDF sampler over nonnegative weights.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sampling weight {i} is {w}; weights must be finite and nonnegative"
                )));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            acc += w;
            cumulative.push(acc);
        }
        let last_positive = last_positive
            .ok_or_else(|| Error::InvalidInput("all sampling weights are zero".into()))?;
        if !acc.is_finite() {
            return Err(Error::InvalidInput("sampling weights overflow".into()));
        }
        Ok(Self {
            cumulative,
            last_positive,
        })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.last_positive)
    }
}

/// Sampling weights `exp(ln_w − max)`, for log-weights whose exponentials
/// would overflow.
pub fn normalized_from_ln(ln_weights: &[f64]) -> Vec<f64> {
    let max = ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ln_weights.iter().map(|&l| (l - max).exp()).collect()
}
