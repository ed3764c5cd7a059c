use fixedbitset::FixedBitSet;

use super::grid::GridSet;
use super::LabError;

/// Per-operand size cap for the `O(|A||B|)` covering kernels.
pub const MAX_KERNEL_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

fn check_pair(a: &GridSet, b: &GridSet) -> Result<(), LabError> {
    if a.n() != b.n() {
        return Err(LabError::ScaleMismatch { left: a.n(), right: b.n() });
    }
    for s in [a, b] {
        if s.len() > MAX_KERNEL_CELLS {
            return Err(LabError::CapExceeded(format!(
                "{} cells exceed the kernel cap of {MAX_KERNEL_CELLS}",
                s.len()
            )));
        }
    }
    Ok(())
}

/// Occupied cells of `f(a, b)` over all pairs, for values in `[lo, hi]`.
fn occupied(
    a: &[i64],
    b: &[i64],
    lo: i64,
    hi: i64,
    f: impl Fn(i64, i64) -> i64,
) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity((hi - lo + 1) as usize);
    for &x in a {
        for &y in b {
            bits.insert((f(x, y) - lo) as usize);
        }
    }
    bits
}

/// `N_δ(A ± B)` as the number of occupied grid cells (sums of grid points
/// stay on the grid), together with the set itself.
pub fn sumset_cover(a: &GridSet, b: &GridSet, sign: Sign) -> Result<(usize, GridSet), LabError> {
    check_pair(a, b)?;
    let n = a.n();
    if a.is_empty() || b.is_empty() {
        let (lo, hi) = (a.lo_units() + b.lo_units(), a.hi_units() + b.hi_units());
        return Ok((0, GridSet::new(n, lo, hi, Vec::new())?));
    }
    let xa: Vec<i64> = a.absolute().collect();
    let xb: Vec<i64> = b.absolute().collect();
    let (amin, amax) = (xa[0], xa[xa.len() - 1]);
    let (bmin, bmax) = (xb[0], xb[xb.len() - 1]);
    let (bits, vlo, lo, hi) = match sign {
        Sign::Plus => (
            occupied(&xa, &xb, amin + bmin, amax + bmax, |x, y| x + y),
            amin + bmin,
            a.lo_units() + b.lo_units(),
            a.hi_units() + b.hi_units() - 1,
        ),
        Sign::Minus => (
            occupied(&xa, &xb, amin - bmax, amax - bmin, |x, y| x - y),
            amin - bmax,
            a.lo_units() - b.hi_units() + 1,
            a.hi_units() - b.lo_units(),
        ),
    };
    let cells: Vec<u64> = bits.ones().map(|i| (vlo + i as i64 - lo) as u64).collect();
    Ok((cells.len(), GridSet::new(n, lo, hi, cells)?))
}

fn check_positive(s: &GridSet, what: &str) -> Result<(), LabError> {
    match s.absolute().next() {
        Some(p) if p <= 0 => Err(LabError::InvalidParameter(format!(
            "{what} needs positive points; found {}",
            p as f64 * s.delta()
        ))),
        _ => Ok(()),
    }
}

/// `N_δ(A·B)`: products of left endpoints rounded down to δ-cells.
pub fn productset_cover(a: &GridSet, b: &GridSet) -> Result<usize, LabError> {
    check_pair(a, b)?;
    check_positive(a, "product")?;
    check_positive(b, "product")?;
    if a.is_empty() || b.is_empty() {
        return Ok(0);
    }
    let n = a.n();
    let xa: Vec<i64> = a.absolute().collect();
    let xb: Vec<i64> = b.absolute().collect();
    let f = |x: i64, y: i64| ((x as i128 * y as i128) >> n) as i64;
    let lo = f(xa[0], xb[0]);
    let hi = f(xa[xa.len() - 1], xb[xb.len() - 1]);
    Ok(occupied(&xa, &xb, lo, hi, f).count_ones(..))
}

/// `N_δ(A/B)`: quotients of left endpoints rounded down to δ-cells.
pub fn quotientset_cover(a: &GridSet, b: &GridSet) -> Result<usize, LabError> {
    check_pair(a, b)?;
    check_positive(a, "quotient")?;
    if b.absolute().any(|y| y == 0) {
        return Err(LabError::ZeroDenominator);
    }
    check_positive(b, "quotient")?;
    if a.is_empty() || b.is_empty() {
        return Ok(0);
    }
    let n = a.n();
    let xa: Vec<i64> = a.absolute().collect();
    let xb: Vec<i64> = b.absolute().collect();
    let f = |x: i64, y: i64| (((x as i128) << n) / y as i128) as i64;
    let lo = f(xa[0], xb[xb.len() - 1]);
    let hi = f(xa[xa.len() - 1], xb[0]);
    Ok(occupied(&xa, &xb, lo, hi, f).count_ones(..))
}
