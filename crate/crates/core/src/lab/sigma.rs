use serde::Serialize;

use super::grid::GridSet;

/// Slack for the two (δ,σ)-set conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaTolerance {
    /// Allowed `|log2|A|/n − σ|`.
    pub dimension_slack: f64,
    /// Allowed Frostman constant.
    pub max_constant: f64,
}

impl Default for SigmaTolerance {
    fn default() -> Self {
        SigmaTolerance { dimension_slack: 0.1, max_constant: 16.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaReport {
    pub sigma: f64,
    pub n: u32,
    pub size: usize,
    /// `log2|A| / n`.
    pub measured_dimension: f64,
    /// `max |A ∩ B(x,r)| / (r^σ |A|)` over points `x` of `A` and dyadic `r ∈ [δ, 1]`.
    pub frostman_constant: f64,
    /// `log2(1/r)` at the maximizing radius.
    pub worst_radius_exponent: u32,
    /// `1 / (hi − lo)^σ`: the whole origin interval forces at least this.
    pub lower_bound: f64,
    pub dimension_ok: bool,
    pub constant_ok: bool,
    pub pass: bool,
    pub tolerance: SigmaTolerance,
}

/// Maximum over dyadic radii `r = 2^−j` (`0 ≤ j ≤ n`) and windows
/// `[x − r, x + r)` centred at points of `A` of `|A ∩ window| / (r^s |A|)`.
/// Returns the constant and the maximizing `j`. Restricting to dyadic radii
/// and centred windows changes the constant by at most a factor 4.
pub fn counting_frostman_constant(a: &GridSet, s: f64) -> (f64, u32) {
    let pts: Vec<i64> = a.absolute().collect();
    if pts.is_empty() {
        return (0.0, 0);
    }
    let n = a.n();
    let size = pts.len() as f64;
    let mut best = (0.0f64, 0u32);
    for j in 0..=n {
        let radius = 1i64 << (n - j);
        let (mut left, mut right) = (0usize, 0usize);
        let mut most = 0usize;
        for &x in &pts {
            while pts[left] < x - radius {
                left += 1;
            }
            while right < pts.len() && pts[right] < x + radius {
                right += 1;
            }
            most = most.max(right - left);
        }
        let ratio = most as f64 / ((-(j as f64) * s).exp2() * size);
        if ratio > best.0 {
            best = (ratio, j);
        }
    }
    best
}

pub fn sigma_report(a: &GridSet, sigma: f64) -> SigmaReport {
    sigma_report_with(a, sigma, SigmaTolerance::default())
}

pub fn sigma_report_with(a: &GridSet, sigma: f64, tolerance: SigmaTolerance) -> SigmaReport {
    let n = a.n();
    let measured_dimension = if a.is_empty() || n == 0 { 0.0 } else { (a.len() as f64).log2() / n as f64 };
    let (frostman_constant, worst_radius_exponent) = counting_frostman_constant(a, sigma);
    let dimension_ok = !a.is_empty() && (measured_dimension - sigma).abs() <= tolerance.dimension_slack;
    let constant_ok = !a.is_empty() && frostman_constant <= tolerance.max_constant;
    SigmaReport {
        sigma,
        n,
        size: a.len(),
        measured_dimension,
        frostman_constant,
        worst_radius_exponent,
        lower_bound: 1.0 / (a.hi() - a.lo()).powf(sigma),
        dimension_ok,
        constant_ok,
        pass: dimension_ok && constant_ok,
        tolerance,
    }
}
