use serde::{Deserialize, Serialize};

use super::LabError;

/// Largest supported scale exponent; keeps products of indices inside `i128`
/// and interval endpoints exact in `f64`.
pub(crate) const MAX_SCALE: u32 = 40;

/// A δ-separated set at `δ = 2^−n`, read both as the points
/// `lo + k·δ` and as the union of the cells `[lo + k·δ, lo + (k+1)·δ)`.
///
/// `lo` and `hi` are stored in units of `δ`, so every point has the integer
/// coordinate `lo + k` ("absolute index").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    n: u32,
    lo: i64,
    hi: i64,
    cells: Vec<u64>,
}

/// On-disk form: `{n, lo, hi, cells}` or run-length `{n, lo, hi, runs: [[start, len]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub n: u32,
    pub lo: f64,
    pub hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<[u64; 2]>>,
}

fn to_units(x: f64, n: u32) -> Result<i64, LabError> {
    let scaled = x * (1u64 << n) as f64;
    if !scaled.is_finite() || scaled.fract() != 0.0 || scaled.abs() > (1u64 << 52) as f64 {
        return Err(LabError::InvalidGrid(format!("{x} is not a multiple of 2^-{n}")));
    }
    Ok(scaled as i64)
}

impl GridSet {
    /// `cells` must be strictly increasing and fit in `[lo, hi)` (in units of δ).
    pub fn new(n: u32, lo: i64, hi: i64, cells: Vec<u64>) -> Result<Self, LabError> {
        if n > MAX_SCALE {
            return Err(LabError::InvalidParameter(format!("scale {n} exceeds {MAX_SCALE}")));
        }
        if hi <= lo {
            return Err(LabError::InvalidGrid(format!("empty origin interval [{lo}, {hi})")));
        }
        if cells.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::InvalidGrid("cells must be strictly increasing".into()));
        }
        if let Some(&last) = cells.last() {
            if last as i128 >= (hi - lo) as i128 {
                return Err(LabError::InvalidGrid(format!("cell {last} outside the origin interval")));
            }
        }
        Ok(GridSet { n, lo, hi, cells })
    }

    /// Cells inside `[lo, hi)` given as dyadic reals.
    pub fn from_interval(n: u32, lo: f64, hi: f64, cells: Vec<u64>) -> Result<Self, LabError> {
        GridSet::new(n, to_units(lo, n)?, to_units(hi, n)?, cells)
    }

    /// Cells of `[1, 2)`.
    pub fn unit(n: u32, cells: Vec<u64>) -> Result<Self, LabError> {
        GridSet::new(n, 1 << n, 2 << n, cells)
    }

    /// Every cell of `[1, 2)`.
    pub fn full(n: u32) -> Result<Self, LabError> {
        GridSet::unit(n, (0..1u64 << n).collect())
    }

    /// Build from absolute indices (deduplicated and sorted).
    pub(crate) fn from_absolute(n: u32, lo: i64, hi: i64, mut points: Vec<i64>) -> Result<Self, LabError> {
        points.sort_unstable();
        points.dedup();
        let cells = points
            .into_iter()
            .map(|p| {
                if p < lo || p >= hi {
                    Err(LabError::InvalidGrid(format!("point {p} outside [{lo}, {hi})")))
                } else {
                    Ok((p - lo) as u64)
                }
            })
            .collect::<Result<_, _>>()?;
        GridSet::new(n, lo, hi, cells)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn delta(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    pub fn lo(&self) -> f64 {
        self.lo as f64 * self.delta()
    }

    pub fn hi(&self) -> f64 {
        self.hi as f64 * self.delta()
    }

    pub fn lo_units(&self) -> i64 {
        self.lo
    }

    pub fn hi_units(&self) -> i64 {
        self.hi
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn point(&self, k: usize) -> f64 {
        (self.lo + self.cells[k] as i64) as f64 * self.delta()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Points in units of δ.
    pub fn absolute(&self) -> impl Iterator<Item = i64> + '_ {
        self.cells.iter().map(move |&c| self.lo + c as i64)
    }

    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        if self.n != other.n {
            return false;
        }
        let theirs: std::collections::BTreeSet<i64> = other.absolute().collect();
        self.absolute().all(|p| theirs.contains(&p))
    }

    pub fn to_file(&self, run_length: bool) -> GridFile {
        let mut f = GridFile { n: self.n, lo: self.lo(), hi: self.hi(), cells: None, runs: None };
        if run_length {
            let mut runs: Vec<[u64; 2]> = Vec::new();
            for &c in &self.cells {
                match runs.last_mut() {
                    Some(r) if r[0] + r[1] == c => r[1] += 1,
                    _ => runs.push([c, 1]),
                }
            }
            f.runs = Some(runs);
        } else {
            f.cells = Some(self.cells.clone());
        }
        f
    }

    pub fn from_file(f: &GridFile) -> Result<Self, LabError> {
        let cells = match (&f.cells, &f.runs) {
            (Some(c), None) => c.clone(),
            (None, Some(runs)) => {
                let mut out = Vec::new();
                for &[start, len] in runs {
                    out.extend(start..start + len);
                }
                out
            }
            _ => return Err(LabError::Format("exactly one of `cells` and `runs` is required".into())),
        };
        GridSet::from_interval(f.n, f.lo, f.hi, cells)
    }

    pub fn to_json(&self, run_length: bool) -> String {
        serde_json::to_string(&self.to_file(run_length)).expect("grid file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let f: GridFile = serde_json::from_str(text).map_err(|e| LabError::Format(e.to_string()))?;
        GridSet::from_file(&f)
    }
}
