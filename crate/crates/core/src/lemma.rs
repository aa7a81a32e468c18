//! Small numeric facts about powers of distances.

/// Checks the implication
///
/// `|a − b| ≤ c` and `|aᶻ − bᶻ| > z·cᶻ / ε^(z−1)`  ⇒  `|aᶻ − bᶻ| ≤ z·ε·max(a, b)ᶻ`
///
/// for one tuple. Returns `true` when the hypotheses fail (vacuous case) or
/// the conclusion holds.
pub fn power_gap_check(a: f64, b: f64, c: f64, eps: f64, z: f64) -> bool {
    let gap = (a.powf(z) - b.powf(z)).abs();
    let hypotheses = (a - b).abs() <= c && gap > z * c.powf(z) / eps.powf(z - 1.0);
    !hypotheses || gap <= z * eps * a.max(b).powf(z)
}

/// Right-hand side of the relaxed triangle inequality
/// `d^z(x, x'') ≤ 2^z·(d^z(x, x') + d^z(x', x''))`.
pub fn relaxed_triangle_bound(d_xy: f64, d_yz: f64, z: f64) -> f64 {
    2f64.powf(z) * (d_xy + d_yz)
}
