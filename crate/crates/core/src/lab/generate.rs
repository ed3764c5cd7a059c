use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::{GridSet, MAX_SCALE};
use super::LabError;

/// Largest scale for generators that enumerate their sets.
const MAX_GENERATED_SCALE: u32 = 30;

fn check_scale(n: u32) -> Result<(), LabError> {
    if n == 0 || n > MAX_GENERATED_SCALE {
        return Err(LabError::InvalidParameter(format!(
            "scale must be in 1..={MAX_GENERATED_SCALE}, got {n}"
        )));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<(), LabError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(LabError::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// One cell per touched half-open dyadic interval of length `2^−n`. The
/// origin interval is `[⌊min⌋, ⌊max⌋ + 1)`.
pub fn discretise(points: &[f64], n: u32) -> Result<GridSet, LabError> {
    if n > MAX_SCALE {
        return Err(LabError::InvalidParameter(format!("scale {n} exceeds {MAX_SCALE}")));
    }
    if points.is_empty() || points.iter().any(|x| !x.is_finite()) {
        return Err(LabError::InvalidParameter("need a nonempty list of finite points".into()));
    }
    let min = points.iter().copied().fold(f64::INFINITY, f64::min);
    let max = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = (1u64 << n) as f64;
    let lo = min.floor() as i64;
    let hi = max.floor() as i64 + 1;
    let abs: Vec<i64> = points.iter().map(|x| (x * scale).floor() as i64).collect();
    GridSet::from_absolute(n, lo << n, hi << n, abs)
}

/// Middle-thirds Cantor set truncated at `depth`, shifted to `[1, 2)` and
/// discretised at scale `n`. Points are the left endpoints `1 + N/3^depth`
/// with `N` having only ternary digits 0 and 2, rounded down exactly.
pub fn cantor_set(depth: u32, n: u32) -> Result<GridSet, LabError> {
    check_scale(n)?;
    if depth > 40 {
        return Err(LabError::InvalidParameter(format!("depth {depth} exceeds 40")));
    }
    let denom = 3u128.pow(depth);
    let mut numerators: Vec<u128> = vec![0];
    for level in 1..=depth {
        let step = 2 * 3u128.pow(depth - level);
        let mut next = Vec::with_capacity(numerators.len() * 2);
        for &v in &numerators {
            next.push(v);
            next.push(v + step);
        }
        numerators = next;
        if numerators.len() > 1 << 24 {
            return Err(LabError::CapExceeded(format!("Cantor depth {depth}")));
        }
    }
    let cells: Vec<i64> = numerators
        .iter()
        .map(|&v| (1i64 << n) + ((v << n) / denom) as i64)
        .collect();
    GridSet::from_absolute(n, 1 << n, 2 << n, cells)
}

/// Points of `[1, 2)` whose binary digits at the constrained positions (all
/// positions in `1..=n` not listed in `free`) are zero.
pub fn digit_restricted_set(n: u32, free: &[u32]) -> Result<GridSet, LabError> {
    check_scale(n)?;
    let mut free: Vec<u32> = free.to_vec();
    free.sort_unstable();
    free.dedup();
    if let Some(p) = free.iter().find(|p| **p == 0 || **p > n) {
        return Err(LabError::InvalidParameter(format!("digit position {p} outside 1..={n}")));
    }
    let mut cells = Vec::with_capacity(1 << free.len());
    for mask in 0u64..1 << free.len() {
        let mut k = 0u64;
        for (b, &p) in free.iter().enumerate() {
            if mask >> b & 1 == 1 {
                k |= 1 << (n - p);
            }
        }
        cells.push(k);
    }
    cells.sort_unstable();
    GridSet::unit(n, cells)
}

/// Evenly spread positions: `i` is free when `⌈iσ⌉ > ⌈(i−1)σ⌉`, so the first
/// `i` positions hold `⌈iσ⌉ ≥ iσ` free ones. For `σ = 1/2` these are the odd
/// positions.
pub fn free_positions(n: u32, sigma: f64) -> Result<Vec<u32>, LabError> {
    check_unit("sigma", sigma)?;
    let count = |i: u32| (i as f64 * sigma - 1e-12).ceil().max(0.0) as u64;
    Ok((1..=n).filter(|&i| count(i) > count(i - 1)).collect())
}

/// Random branching set: at each free level (see [`free_positions`]) every
/// surviving interval keeps both halves, at every other level one half chosen
/// at random. `|A| = 2^⌈σn⌉` and the counting Frostman constant at exponent
/// `σ` stays at most 3.
pub fn random_frostman_set(sigma: f64, n: u32, seed: u64) -> Result<GridSet, LabError> {
    check_scale(n)?;
    let free = free_positions(n, sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<u64> = vec![0];
    for level in 1..=n {
        let bit = 1u64 << (n - level);
        if free.contains(&level) {
            nodes = nodes.iter().flat_map(|&v| [v, v | bit]).collect();
        } else {
            for v in nodes.iter_mut() {
                if rng.gen::<bool>() {
                    *v |= bit;
                }
            }
        }
    }
    nodes.sort_unstable();
    GridSet::unit(n, nodes)
}

/// Scale-block roles in the AP∩GP construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockLabel {
    /// No constraint on either set.
    Free,
    /// Linear binary digits vanish (arithmetic-progression structure).
    Arithmetic,
    /// Binary digits of `log2 x + θ` vanish (geometric-progression structure).
    Geometric,
}

/// Default number of digit positions per block.
const DEFAULT_BLOCK: u32 = 4;

/// `A = B ∩ C` in `[1, 2)` at scale `n`, targeting dimension `2t − 1`.
/// Digit positions are cut into blocks; a fraction `2t − 1` of blocks is
/// free and the rest alternate between an arithmetic block (zero digits of
/// `x`, constraining `B`) and a geometric block (zero digits of
/// `log2 x + θ`, constraining `C`), with `θ` drawn from the seed. Both `B`
/// and `C` then have dimension about `t`, so `A + A ⊂ B + B` and
/// `A·A ⊂ C·C` stay near `δ^−t`.
pub fn ap_gp_intersection_set(t: f64, n: u32, seed: u64) -> Result<GridSet, LabError> {
    ap_gp_intersection_with(t, n, seed, DEFAULT_BLOCK).map(|(a, _)| a)
}

/// [`ap_gp_intersection_set`] with an explicit block length; also returns
/// the label of every digit position `1..=n`.
pub fn ap_gp_intersection_with(
    t: f64,
    n: u32,
    seed: u64,
    block: u32,
) -> Result<(GridSet, Vec<BlockLabel>), LabError> {
    check_scale(n)?;
    if !(0.5..=1.0).contains(&t) {
        return Err(LabError::InvalidParameter(format!("t must lie in [1/2, 1], got {t}")));
    }
    if block == 0 {
        return Err(LabError::InvalidParameter("block length must be positive".into()));
    }
    let free_fraction = 2.0 * t - 1.0;
    let blocks = n.div_ceil(block);
    let count = |k: u32| (k as f64 * free_fraction - 1e-12).ceil().max(0.0) as u64;
    let mut labels = Vec::with_capacity(n as usize);
    let mut constrained = 0u32;
    for k in 0..blocks {
        let label = if count(k + 1) > count(k) {
            BlockLabel::Free
        } else {
            constrained += 1;
            if constrained % 2 == 1 {
                BlockLabel::Arithmetic
            } else {
                BlockLabel::Geometric
            }
        };
        for _ in 0..block.min(n - k * block) {
            labels.push(label);
        }
    }
    let theta: f64 = ChaCha8Rng::seed_from_u64(seed).gen();
    let linear_free: Vec<u32> = (1..=n).filter(|&p| labels[p as usize - 1] != BlockLabel::Arithmetic).collect();
    let log_mask: u64 = (1..=n)
        .filter(|&p| labels[p as usize - 1] == BlockLabel::Geometric)
        .fold(0, |m, p| m | 1 << (n - p));
    let b = digit_restricted_set(n, &linear_free)?;
    let scale = (1u64 << n) as f64;
    let cells: Vec<u64> = b
        .cells()
        .iter()
        .copied()
        .filter(|&k| {
            let x = 1.0 + k as f64 / scale;
            let digits = ((x.log2() + theta).fract() * scale).floor() as u64;
            digits & log_mask == 0
        })
        .collect();
    Ok((GridSet::unit(n, cells)?, labels))
}
