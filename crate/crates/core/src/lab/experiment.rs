use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{productset_cover, quotientset_cover, sumset_cover, Sign};
use super::generate::{ap_gp_intersection_set, cantor_set, digit_restricted_set, free_positions, random_frostman_set};
use super::grid::GridSet;
use super::measure::{convolve, dyadic_entropy, multiply_measures, quotient_measures, uniform_measure};
use super::slope::{check_discretised_slope_inequality, DEFAULT_GUARD};
use super::LabError;

/// A set generator indexed by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SetFamily {
    /// All of `[1, 2)` at scale `n`.
    Full,
    /// Digit-restricted set with evenly spread free positions.
    Digit { sigma: f64 },
    /// Middle-thirds Cantor set at depth `n`.
    Cantor,
    RandomFrostman { sigma: f64, seed: u64 },
    ApGp { t: f64, seed: u64 },
}

impl SetFamily {
    pub fn generate(&self, n: u32) -> Result<GridSet, LabError> {
        match *self {
            SetFamily::Full => GridSet::full(n),
            SetFamily::Digit { sigma } => digit_restricted_set(n, &free_positions(n, sigma)?),
            SetFamily::Cantor => cantor_set(n, n),
            SetFamily::RandomFrostman { sigma, seed } => random_frostman_set(sigma, n, seed),
            SetFamily::ApGp { t, seed } => ap_gp_intersection_set(t, n, seed),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SetFamily::Full => "full".into(),
            SetFamily::Digit { sigma } => format!("digit(sigma={sigma})"),
            SetFamily::Cantor => "cantor".into(),
            SetFamily::RandomFrostman { sigma, seed } => format!("random(sigma={sigma},seed={seed})"),
            SetFamily::ApGp { t, seed } => format!("apgp(t={t},seed={seed})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub guard: u32,
    /// Exponent in the check `max(N(A+A), N(A·A)) ≥ 2^{cn}|A|`.
    pub c: f64,
    /// Also evaluate the second slope inequality.
    pub slope: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { guard: DEFAULT_GUARD, c: 0.05, slope: false }
    }
}

/// Measurements of one set at its own scale. Logarithms are base 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRow {
    pub n: u32,
    pub size: usize,
    pub n_sum: usize,
    pub n_diff: usize,
    pub n_prod: usize,
    pub n_quot: usize,
    /// `H_n` of `μ`, `μ∗μ`, `μ∗−μ`, `μ·μ`, `μ/μ` for the uniform measure `μ`.
    pub h_mu: f64,
    pub h_sum: f64,
    pub h_diff: f64,
    pub h_prod: f64,
    pub h_quot: f64,
    /// `min± (2 log N(A±A) + 4 log N(A·A) − 5 log|A|) / n`.
    pub c_hat: f64,
    /// `min± (2 log N(A±A) + 3 log N(A/A) − 4 log|A|) / n`.
    pub c_hat_quotient: f64,
    /// Second slope inequality, when requested.
    pub implied_log_k: Option<f64>,
    /// `max(N(A+A), N(A·A)) ≥ 2^{cn}|A|`; trivially true for degenerate rows.
    pub theorem_b_pass: bool,
    /// `|A| = 1`: every count is 1 and the check says nothing.
    pub degenerate: bool,
}

pub fn scale_row(a: &GridSet, options: &ExperimentOptions) -> Result<ScaleRow, LabError> {
    let n = a.n();
    let size = a.len();
    let (n_sum, _) = sumset_cover(a, a, Sign::Plus)?;
    let (n_diff, _) = sumset_cover(a, a, Sign::Minus)?;
    let n_prod = productset_cover(a, a)?;
    let n_quot = quotientset_cover(a, a)?;
    let mu = uniform_measure(a)?.to_fast();
    let g = options.guard;
    let h = |m| dyadic_entropy(&m, n);
    let h_mu = dyadic_entropy(&mu, n)?;
    let h_sum = h(convolve(&mu, &mu, Sign::Plus, g)?)?;
    let h_diff = h(convolve(&mu, &mu, Sign::Minus, g)?)?;
    let h_prod = h(multiply_measures(&mu, &mu, g)?)?;
    let h_quot = h(quotient_measures(&mu, &mu, g)?)?;
    let lg = |x: usize| (x as f64).log2();
    let nf = n.max(1) as f64;
    let best_additive = lg(n_sum.min(n_diff));
    let c_hat = (2.0 * best_additive + 4.0 * lg(n_prod) - 5.0 * lg(size)) / nf;
    let c_hat_quotient = (2.0 * best_additive + 3.0 * lg(n_quot) - 4.0 * lg(size)) / nf;
    let implied_log_k = if options.slope {
        Some(check_discretised_slope_inequality(a, 2, g)?.implied_log_k)
    } else {
        None
    };
    let target = (options.c * n as f64).exp2() * size as f64;
    Ok(ScaleRow {
        n,
        size,
        n_sum,
        n_diff,
        n_prod,
        n_quot,
        h_mu,
        h_sum,
        h_diff,
        h_prod,
        h_quot,
        c_hat,
        c_hat_quotient,
        implied_log_k,
        theorem_b_pass: size == 1 || n_sum.max(n_prod) as f64 >= target,
        degenerate: size == 1,
    })
}

/// One [`ScaleRow`] per scale, computed in parallel and sorted by `n`.
pub fn theorem_a_experiment(
    family: &SetFamily,
    scales: &[u32],
    options: &ExperimentOptions,
) -> Result<Vec<ScaleRow>, LabError> {
    let mut rows = scales
        .par_iter()
        .map(|&n| scale_row(&family.generate(n)?, options))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}
