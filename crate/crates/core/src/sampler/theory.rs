//! Worst-case sample sizes with every hidden constant set to 1.

use serde::{Deserialize, Serialize};

/// A sample size that may exceed `i64::MAX`; `value` saturates there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBound {
    pub value: u64,
    pub log10: f64,
    pub saturated: bool,
}

impl SizeBound {
    pub(crate) fn from_ln(ln: f64) -> Self {
        let limit = i64::MAX as u64;
        let log10 = ln / std::f64::consts::LN_10;
        if !ln.is_finite() || ln >= (limit as f64).ln() {
            return Self {
                value: limit,
                log10,
                saturated: !ln.is_nan(),
            };
        }
        Self {
            value: (ln.exp().ceil() as u64).max(1),
            log10,
            saturated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheorySizes {
    pub n1: SizeBound,
    pub n2: SizeBound,
}

impl TheorySizes {
    pub fn saturated(&self) -> bool {
        self.n1.saturated || self.n2.saturated
    }
}

/// `max(1, ln k)`, so the `log k` factors do not vanish at `k = 1`.
pub fn log_k_floor(k: usize) -> f64 {
    (k as f64).ln().max(1.0)
}

/// Evaluates
/// `N₁ = (168z)^{10z}·ε^{−5z−15}·k⁵·ln(k/δ)` and
/// `N₂ = ε^{−2z−2}·k·max(1, ln k)·ln(k/(εδ))`
/// in the log domain.
pub fn theory_sizes(eps: f64, delta: f64, k: usize, z: f64) -> TheorySizes {
    let kf = k as f64;
    let inv_eps = (1.0 / eps).ln();
    let ln_n1 = 10.0 * z * (168.0 * z).ln()
        + (5.0 * z + 15.0) * inv_eps
        + 5.0 * kf.ln()
        + (kf / delta).ln().ln();
    let ln_n2 = (2.0 * z + 2.0) * inv_eps
        + kf.ln()
        + log_k_floor(k).ln()
        + (kf / (eps * delta)).ln().ln();
    TheorySizes {
        n1: SizeBound::from_ln(ln_n1),
        n2: SizeBound::from_ln(ln_n2),
    }
}
