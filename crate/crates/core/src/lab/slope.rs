use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cover::Sign;
use super::grid::GridSet;
pub(crate) use super::measure::quotient_at;
use super::measure::{
    convolve, dyadic_entropy, from_counts, multiply_measures, quotient_measures,
    restrict_to_interval, uniform_measure, DyadicMeasure,
};
use super::LabError;

pub const DEFAULT_GUARD: u32 = 3;
/// Exact slope histograms are built from at most this many cell pairs.
pub const SLOPE_PAIR_CAP: u64 = 1 << 30;
/// Pairs drawn when the cap is exceeded.
pub const SAMPLED_PAIRS: usize = 10_000_000;
const SAMPLE_SEED: u64 = 0x51_0e;

/// Windows for the difference variants: left endpoints in `[1, 5/4]` and `[7/4, 2]`.
const LOW_WINDOW: (f64, f64) = (1.0, 1.25);
const HIGH_WINDOW: (f64, f64) = (1.75, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeVariant {
    /// `(μ ∗ μ) / (μ ∗ μ)`.
    Sum,
    /// `(μ ∗ −μ) / (μ′ ∗ −μ″)` with `μ′`, `μ″` the restrictions to the low and high windows.
    Difference,
}

/// Law of the slope `(X1 ± X2)/(X3 ± X4)` for independent draws, binned at
/// resolution `m + guard`. The numerator and denominator histograms are
/// exact; their quotient is exact up to [`SLOPE_PAIR_CAP`] pairs and
/// sampled beyond (the result is then flagged approximate).
pub fn slope_measure(mu: &DyadicMeasure, variant: SlopeVariant, guard: u32) -> Result<DyadicMeasure, LabError> {
    let (num, den) = match variant {
        SlopeVariant::Sum => {
            let s = convolve(mu, mu, Sign::Plus, guard)?;
            (s.clone(), s)
        }
        SlopeVariant::Difference => {
            let (low, high) = windows(mu)?;
            (convolve(mu, mu, Sign::Minus, guard)?, convolve(&low, &high, Sign::Minus, guard)?)
        }
    };
    let out = num.resolution();
    if (num.len() as u64) * (den.len() as u64) <= SLOPE_PAIR_CAP {
        quotient_at(&num, &den, out)
    } else {
        sampled_quotient(&num, &den, out)
    }
}

fn windows(mu: &DyadicMeasure) -> Result<(DyadicMeasure, DyadicMeasure), LabError> {
    Ok((
        restrict_to_interval(mu, LOW_WINDOW.0, LOW_WINDOW.1)?,
        restrict_to_interval(mu, HIGH_WINDOW.0, HIGH_WINDOW.1)?,
    ))
}

pub(crate) fn sampled_quotient(num: &DyadicMeasure, den: &DyadicMeasure, out: u32) -> Result<DyadicMeasure, LabError> {
    let draw = |m: &DyadicMeasure| -> Vec<f64> {
        let mut acc = 0.0;
        m.masses()
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    };
    let (cn, cd) = (draw(num), draw(den));
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut pick = |cdf: &[f64]| -> usize {
        let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
        cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
    };
    let mut counts: std::collections::BTreeMap<i64, u128> = std::collections::BTreeMap::new();
    for _ in 0..SAMPLED_PAIRS {
        let i = num.indices()[pick(&cn)];
        let j = den.indices()[pick(&cd)];
        let point = point_quotient(i, j, out)?;
        *counts.entry(point).or_insert(0) += 1;
    }
    let total = SAMPLED_PAIRS as u128;
    let cells: Vec<(i64, u128)> = counts.into_iter().collect();
    Ok(from_counts(out, cells, total).with_approximate(true))
}

fn point_quotient(i: i64, j: i64, out: u32) -> Result<i64, LabError> {
    if j == 0 {
        return Err(LabError::ZeroDenominator);
    }
    let (a, b) = ((i as i128) << out, j as i128);
    let q = a / b;
    Ok(if a % b != 0 && (a < 0) != (b < 0) { q - 1 } else { q } as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeTerm {
    pub name: String,
    pub coefficient: f64,
    /// Entropy in bits at resolution `n`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub variant: u8,
    pub n: u32,
    pub guard: u32,
    pub left: Vec<SlopeTerm>,
    pub right: Vec<SlopeTerm>,
    pub lhs: f64,
    /// Right-hand side without `log K`.
    pub rhs: f64,
    /// `lhs − rhs`: the smallest `log K` making the inequality hold here.
    pub implied_log_k: f64,
    /// Some histogram was sampled rather than enumerated.
    pub approximate: bool,
}

/// Evaluate one of the four single-set discretised slope inequalities for the
/// uniform measure `μ` on `A ⊂ [1, 2]`:
///
/// 1. `H(S₋) + 3H(μ) + H(μ′) + H(μ″) ≤ H(μ∗−μ) + H(μ′∗−μ″) + 2H(μ·μ) + H(μ·μ′) + H(μ·μ″) + log K`
/// 2. `H(S₊) + 5H(μ) ≤ 2H(μ∗μ) + 4H(μ·μ) + log K`
/// 3. `H(S₋) + 2H(μ) + H(μ′) + H(μ″) ≤ H(μ∗−μ) + H(μ′∗−μ″) + H(μ/μ) + H(μ′/μ) + H(μ″/μ) + log K`
/// 4. `H(S₊) + 4H(μ) ≤ 2H(μ∗μ) + 3H(μ/μ) + log K`
///
/// with `S₊ = (μ∗μ)/(μ∗μ)`, `S₋ = (μ∗−μ)/(μ′∗−μ″)`, `μ′ = μ|[1, 5/4]`,
/// `μ″ = μ|[7/4, 2]`, and every `H = H_n`.
pub fn check_discretised_slope_inequality(a: &GridSet, variant: u8, guard: u32) -> Result<SlopeCheck, LabError> {
    if !(1..=4).contains(&variant) {
        return Err(LabError::InvalidParameter(format!("slope variant must be 1..=4, got {variant}")));
    }
    let n = a.n();
    let mu = uniform_measure(a)?.to_fast();
    let h = |m: &DyadicMeasure| dyadic_entropy(m, n);
    let term = |name: &str, c: f64, v: f64| SlopeTerm { name: name.into(), coefficient: c, value: v };
    let h_mu = h(&mu)?;
    let mut approximate = false;
    let (left, right) = match variant {
        2 | 4 => {
            let slope = slope_measure(&mu, SlopeVariant::Sum, guard)?;
            approximate |= slope.is_approximate();
            let sum = convolve(&mu, &mu, Sign::Plus, guard)?;
            let left = vec![term("H(S+)", 1.0, h(&slope)?), term("H(mu)", if variant == 2 { 5.0 } else { 4.0 }, h_mu)];
            let right = if variant == 2 {
                let prod = multiply_measures(&mu, &mu, guard)?;
                vec![term("H(mu*mu)", 2.0, h(&sum)?), term("H(mu.mu)", 4.0, h(&prod)?)]
            } else {
                let quot = quotient_measures(&mu, &mu, guard)?;
                vec![term("H(mu*mu)", 2.0, h(&sum)?), term("H(mu/mu)", 3.0, h(&quot)?)]
            };
            (left, right)
        }
        _ => {
            let (low, high) = windows(&mu)?;
            let slope = slope_measure(&mu, SlopeVariant::Difference, guard)?;
            approximate |= slope.is_approximate();
            let diff = convolve(&mu, &mu, Sign::Minus, guard)?;
            let window_diff = convolve(&low, &high, Sign::Minus, guard)?;
            let left = vec![
                term("H(S-)", 1.0, h(&slope)?),
                term("H(mu)", if variant == 1 { 3.0 } else { 2.0 }, h_mu),
                term("H(mu')", 1.0, h(&low)?),
                term("H(mu'')", 1.0, h(&high)?),
            ];
            let mut right = vec![term("H(mu*-mu)", 1.0, h(&diff)?), term("H(mu'*-mu'')", 1.0, h(&window_diff)?)];
            if variant == 1 {
                right.push(term("H(mu.mu)", 2.0, h(&multiply_measures(&mu, &mu, guard)?)?));
                right.push(term("H(mu.mu')", 1.0, h(&multiply_measures(&mu, &low, guard)?)?));
                right.push(term("H(mu.mu'')", 1.0, h(&multiply_measures(&mu, &high, guard)?)?));
            } else {
                right.push(term("H(mu/mu)", 1.0, h(&quotient_measures(&mu, &mu, guard)?)?));
                right.push(term("H(mu'/mu)", 1.0, h(&quotient_measures(&low, &mu, guard)?)?));
                right.push(term("H(mu''/mu)", 1.0, h(&quotient_measures(&high, &mu, guard)?)?));
            }
            (left, right)
        }
    };
    let total = |ts: &[SlopeTerm]| ts.iter().map(|t| t.coefficient * t.value).sum::<f64>();
    let (lhs, rhs) = (total(&left), total(&right));
    Ok(SlopeCheck {
        variant,
        n,
        guard,
        left,
        right,
        lhs,
        rhs,
        implied_log_k: lhs - rhs,
        approximate,
    })
}
