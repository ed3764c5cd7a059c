use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use serde::Serialize;

use super::cover::Sign;
use super::grid::{GridSet, MAX_SCALE};
use super::LabError;
use crate::Rational;

/// Upper bound on the index span of a dense pushforward accumulator.
const MAX_DENSE_SPAN: i64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Integer counts over a common integer total.
    Exact,
    /// `f64` weights.
    Fast,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Exact { counts: Vec<u128>, total: u128 },
    Fast(Vec<f64>),
}

/// Probability measure on dyadic cells `[i·2^−m, (i+1)·2^−m)` of resolution
/// `m`, stored sparsely by increasing absolute index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicMeasure {
    resolution: u32,
    indices: Vec<i64>,
    weights: Weights,
    approximate: bool,
}

impl DyadicMeasure {
    fn exact(resolution: u32, cells: Vec<(i64, u128)>, total: u128) -> Self {
        let (indices, counts) = cells.into_iter().filter(|c| c.1 > 0).unzip();
        DyadicMeasure { resolution, indices, weights: Weights::Exact { counts, total }, approximate: false }
    }

    fn fast(resolution: u32, cells: Vec<(i64, f64)>) -> Self {
        let total: f64 = cells.iter().map(|c| c.1).sum();
        let (indices, w): (Vec<i64>, Vec<f64>) = cells.into_iter().filter(|c| c.1 > 0.0).unzip();
        let w = w.into_iter().map(|x| x / total).collect();
        DyadicMeasure { resolution, indices, weights: Weights::Fast(w), approximate: false }
    }

    pub(crate) fn with_approximate(mut self, approximate: bool) -> Self {
        self.approximate = approximate;
        self
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn mode(&self) -> Mode {
        match self.weights {
            Weights::Exact { .. } => Mode::Exact,
            Weights::Fast(_) => Mode::Fast,
        }
    }

    /// Built from a sample rather than the full product of supports.
    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    /// Number of occupied cells.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn masses(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Exact { counts, total } => counts.iter().map(|&c| c as f64 / *total as f64).collect(),
            Weights::Fast(w) => w.clone(),
        }
    }

    /// Exact cell masses; `None` in fast mode.
    pub fn exact_masses(&self) -> Option<Vec<Rational>> {
        match &self.weights {
            Weights::Exact { counts, total } => Some(
                counts
                    .iter()
                    .map(|&c| Rational::new(BigInt::from(c), BigInt::from(*total)))
                    .collect(),
            ),
            Weights::Fast(_) => None,
        }
    }

    /// Sum of cell masses: exactly 1 in exact mode.
    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    pub fn exact_total(&self) -> Option<Rational> {
        self.exact_masses().map(|m| m.into_iter().sum())
    }

    /// Convex hull of the support as `[lo, hi)`.
    pub fn interval(&self) -> (f64, f64) {
        let d = (-(self.resolution as f64)).exp2();
        match (self.indices.first(), self.indices.last()) {
            (Some(&a), Some(&b)) => (a as f64 * d, (b + 1) as f64 * d),
            _ => (0.0, 0.0),
        }
    }

    pub fn to_fast(&self) -> DyadicMeasure {
        DyadicMeasure {
            resolution: self.resolution,
            indices: self.indices.clone(),
            weights: Weights::Fast(self.masses()),
            approximate: self.approximate,
        }
    }

    /// Same measure at a finer resolution (cells split, mass on the left child).
    fn refined(&self, resolution: u32) -> DyadicMeasure {
        let shift = resolution - self.resolution;
        DyadicMeasure {
            resolution,
            indices: self.indices.iter().map(|i| i << shift).collect(),
            weights: self.weights.clone(),
            approximate: self.approximate,
        }
    }

    /// Masses of the dyadic cells at resolution `k ≤ m`.
    fn coarse_masses(&self, k: u32) -> Vec<f64> {
        let shift = self.resolution - k;
        let m = self.masses();
        let mut out: Vec<f64> = Vec::new();
        let mut last: Option<i64> = None;
        for (i, w) in self.indices.iter().zip(m) {
            let c = i >> shift;
            if last == Some(c) {
                *out.last_mut().expect("open cell") += w;
            } else {
                out.push(w);
                last = Some(c);
            }
        }
        out
    }
}

/// Weight `1/|A|` on every cell of `A` at resolution `n`.
pub fn uniform_measure(a: &GridSet) -> Result<DyadicMeasure, LabError> {
    if a.is_empty() {
        return Err(LabError::InvalidParameter("uniform measure on an empty set".into()));
    }
    let cells: Vec<(i64, u128)> = a.absolute().map(|i| (i, 1)).collect();
    let total = cells.len() as u128;
    Ok(DyadicMeasure::exact(a.n(), cells, total))
}

/// Unit mass on the cell `[x, x + 2^−m)` with `x = index·2^−m`.
pub fn point_mass(index: i64, resolution: u32) -> DyadicMeasure {
    DyadicMeasure::exact(resolution, vec![(index, 1)], 1)
}

/// Exact measure from integer counts over `total`.
pub(crate) fn from_counts(resolution: u32, cells: Vec<(i64, u128)>, total: u128) -> DyadicMeasure {
    DyadicMeasure::exact(resolution, cells, total)
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Pushforward of `μ × ν` through a map of cell representatives that is
/// monotone in each argument on the supports (so the output range is spanned
/// by the four corners).
fn pair_pushforward(
    mu: &DyadicMeasure,
    nu: &DyadicMeasure,
    resolution: u32,
    f: &dyn Fn(i64, i64) -> i64,
) -> Result<DyadicMeasure, LabError> {
    if mu.is_empty() || nu.is_empty() {
        return Err(LabError::InvalidParameter("pushforward of an empty measure".into()));
    }
    let (a0, a1) = (mu.indices[0], mu.indices[mu.len() - 1]);
    let (b0, b1) = (nu.indices[0], nu.indices[nu.len() - 1]);
    let corners = [f(a0, b0), f(a0, b1), f(a1, b0), f(a1, b1)];
    let lo = *corners.iter().min().expect("corners");
    let hi = *corners.iter().max().expect("corners");
    if hi - lo >= MAX_DENSE_SPAN {
        return Err(LabError::CapExceeded(format!("pushforward spans {} cells", hi - lo + 1)));
    }
    let span = (hi - lo + 1) as usize;
    match (&mu.weights, &nu.weights) {
        (Weights::Exact { counts: ca, total: ta }, Weights::Exact { counts: cb, total: tb }) => {
            let total = ta.checked_mul(*tb).ok_or(LabError::Overflow)?;
            let mut acc = vec![0u128; span];
            for (&i, &wa) in mu.indices.iter().zip(ca) {
                for (&j, &wb) in nu.indices.iter().zip(cb) {
                    acc[(f(i, j) - lo) as usize] += wa * wb;
                }
            }
            let cells = acc.into_iter().enumerate().map(|(k, w)| (lo + k as i64, w)).collect();
            Ok(DyadicMeasure::exact(resolution, cells, total)
                .with_approximate(mu.approximate || nu.approximate))
        }
        _ => {
            let (wa, wb) = (mu.masses(), nu.masses());
            let mut acc = vec![0f64; span];
            for (&i, &x) in mu.indices.iter().zip(&wa) {
                for (&j, &y) in nu.indices.iter().zip(&wb) {
                    acc[(f(i, j) - lo) as usize] += x * y;
                }
            }
            let cells = acc.into_iter().enumerate().map(|(k, w)| (lo + k as i64, w)).collect();
            Ok(DyadicMeasure::fast(resolution, cells).with_approximate(mu.approximate || nu.approximate))
        }
    }
}

fn common_resolution(mu: &DyadicMeasure, nu: &DyadicMeasure, guard: u32) -> Result<(DyadicMeasure, DyadicMeasure, u32), LabError> {
    let m = mu.resolution.max(nu.resolution);
    if m + guard > MAX_SCALE {
        return Err(LabError::InvalidParameter(format!("resolution {} exceeds {MAX_SCALE}", m + guard)));
    }
    Ok((mu.refined(m), nu.refined(m), m))
}

/// Law of `X ± Y` for independent `X ~ μ`, `Y ~ ν`, stored at resolution
/// `m + guard`. Sums of left endpoints are exact, so the guard only widens
/// the index space.
pub fn convolve(mu: &DyadicMeasure, nu: &DyadicMeasure, sign: Sign, guard: u32) -> Result<DyadicMeasure, LabError> {
    let (a, b, m) = common_resolution(mu, nu, guard)?;
    match sign {
        Sign::Plus => pair_pushforward(&a, &b, m + guard, &|i, j| (i + j) << guard),
        Sign::Minus => pair_pushforward(&a, &b, m + guard, &|i, j| (i - j) << guard),
    }
}

/// Law of `X·Y`, binned at resolution `m + guard`. Supports must not
/// straddle 0.
pub fn multiply_measures(mu: &DyadicMeasure, nu: &DyadicMeasure, guard: u32) -> Result<DyadicMeasure, LabError> {
    let (a, b, m) = common_resolution(mu, nu, guard)?;
    for s in [&a, &b] {
        if s.indices[0] < 0 && s.indices[s.len() - 1] >= 0 {
            return Err(LabError::InvalidParameter("product of a measure straddling 0".into()));
        }
    }
    let shift = m as i32 - guard as i32;
    pair_pushforward(&a, &b, m + guard, &|i, j| {
        let p = i as i128 * j as i128;
        (if shift >= 0 { p >> shift } else { p << -shift }) as i64
    })
}

/// Law of `X/Y`, binned at resolution `m + guard`. `ν` must not charge the
/// cell at 0 and its support must not straddle 0.
pub fn quotient_measures(mu: &DyadicMeasure, nu: &DyadicMeasure, guard: u32) -> Result<DyadicMeasure, LabError> {
    let (a, b, m) = common_resolution(mu, nu, guard)?;
    quotient_at(&a, &b, m + guard)
}

/// Quotient binned at an explicit output resolution.
pub(crate) fn quotient_at(a: &DyadicMeasure, b: &DyadicMeasure, out: u32) -> Result<DyadicMeasure, LabError> {
    let (a, b, _) = common_resolution(a, b, 0)?;
    if b.indices.contains(&0) {
        return Err(LabError::ZeroDenominator);
    }
    if b.indices[0] < 0 && b.indices[b.len() - 1] > 0 {
        return Err(LabError::InvalidParameter("denominator support straddles 0".into()));
    }
    pair_pushforward(&a, &b, out, &|i, j| floor_div((i as i128) << out, j as i128) as i64)
}

/// Shannon entropy in bits of `μ` against the dyadic cells of resolution `k ≤ m`.
pub fn dyadic_entropy(mu: &DyadicMeasure, k: u32) -> Result<f64, LabError> {
    if k > mu.resolution {
        return Err(LabError::InvalidParameter(format!(
            "resolution {k} is finer than the measure's {}",
            mu.resolution
        )));
    }
    Ok(mu
        .coarse_masses(k)
        .into_iter()
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.log2())
        .sum())
}

/// Maximum over dyadic radii `r = 2^−j` (`0 ≤ j ≤ m`) and half-open windows
/// `[x − r, x + r)` centred at support cells of `μ(window) / r^s`.
pub fn frostman_constant(mu: &DyadicMeasure, s: f64) -> f64 {
    let m = mu.resolution;
    let w = mu.masses();
    let mut prefix = vec![0.0f64; w.len() + 1];
    for (k, x) in w.iter().enumerate() {
        prefix[k + 1] = prefix[k] + x;
    }
    let idx = &mu.indices;
    let mut best = 0.0f64;
    for j in 0..=m {
        let radius = 1i64 << (m - j);
        let (mut left, mut right) = (0usize, 0usize);
        let mut most = 0.0f64;
        for &x in idx {
            while idx[left] < x - radius {
                left += 1;
            }
            while right < idx.len() && idx[right] < x + radius {
                right += 1;
            }
            most = most.max(prefix[right] - prefix[left]);
        }
        best = best.max(most / (-(j as f64) * s).exp2());
    }
    best
}

/// `μ|_Y` renormalized, for a set `Y` of absolute cell indices at `μ`'s resolution.
pub fn restrict_measure(mu: &DyadicMeasure, cells: &BTreeSet<i64>) -> Result<DyadicMeasure, LabError> {
    restrict_by(mu, &|i| cells.contains(&i), &format!("{} cells", cells.len()))
}

/// `μ` restricted to cells whose left endpoint lies in the closed interval `[lo, hi]`.
pub fn restrict_to_interval(mu: &DyadicMeasure, lo: f64, hi: f64) -> Result<DyadicMeasure, LabError> {
    let d = (-(mu.resolution as f64)).exp2();
    restrict_by(mu, &|i| (lo..=hi).contains(&(i as f64 * d)), &format!("[{lo}, {hi}]"))
}

fn restrict_by(mu: &DyadicMeasure, keep: &dyn Fn(i64) -> bool, what: &str) -> Result<DyadicMeasure, LabError> {
    let r = match &mu.weights {
        Weights::Exact { counts, .. } => {
            let cells: Vec<(i64, u128)> = mu
                .indices
                .iter()
                .zip(counts)
                .filter(|(i, _)| keep(**i))
                .map(|(i, c)| (*i, *c))
                .collect();
            let total: u128 = cells.iter().map(|c| c.1).sum();
            if total == 0 {
                return Err(LabError::EmptyRestriction(what.into()));
            }
            DyadicMeasure::exact(mu.resolution, cells, total)
        }
        Weights::Fast(w) => {
            let cells: Vec<(i64, f64)> = mu
                .indices
                .iter()
                .zip(w)
                .filter(|(i, x)| keep(**i) && **x > 0.0)
                .map(|(i, x)| (*i, *x))
                .collect();
            if cells.is_empty() {
                return Err(LabError::EmptyRestriction(what.into()));
            }
            DyadicMeasure::fast(mu.resolution, cells)
        }
    };
    Ok(r.with_approximate(mu.approximate))
}

/// Restriction property at `μ`'s resolution: when `μ(Y) ≥ 1 − ε` and every
/// cell has mass at most 1/3, `(1 − ε)·H(μ|_Y) ≤ H(μ)`. `None` when the
/// hypotheses fail.
pub fn restriction_property(mu: &DyadicMeasure, cells: &BTreeSet<i64>, eps: f64) -> Option<bool> {
    let m = mu.masses();
    let mass_y: f64 = mu.indices.iter().zip(&m).filter(|(i, _)| cells.contains(i)).map(|(_, w)| w).sum();
    if mass_y < 1.0 - eps || m.iter().any(|w| *w > 1.0 / 3.0) {
        return None;
    }
    let nu = restrict_measure(mu, cells).ok()?;
    let k = mu.resolution;
    let (h_nu, h_mu) = (dyadic_entropy(&nu, k).ok()?, dyadic_entropy(mu, k).ok()?);
    Some((1.0 - eps) * h_nu <= h_mu + 1e-12)
}

/// `H_k(μ)/k` for each `k` of the range (`k = 0` and `k > m` skipped).
pub fn entropy_dimension_profile(mu: &DyadicMeasure, ks: RangeInclusive<u32>) -> Vec<(u32, f64)> {
    ks.filter(|&k| k >= 1 && k <= mu.resolution)
        .map(|k| (k, dyadic_entropy(mu, k).expect("k within resolution") / k as f64))
        .collect()
}
