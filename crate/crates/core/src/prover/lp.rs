//! Feasibility LPs `A x = b, x ≥ 0` in two flavours: a floating-point sparse
//! simplex used only to guess a support or a Farkas candidate, and an exact
//! rational tableau simplex (Bland's rule) that decides feasibility and yields
//! either a solution or a Farkas dual.

use num_traits::{One, Signed, Zero};

use crate::Rational;

/// Sparse column: `(row, coefficient)` pairs with distinct rows.
pub(crate) type Column<T> = Vec<(usize, T)>;

pub(crate) struct FloatOutcome {
    /// Columns with positive value in a float solution.
    pub support: Vec<usize>,
    /// Optimal `y·b` of the dual LP; zero when the primal is feasible.
    pub infeasibility: f64,
    /// A Farkas candidate when the infeasibility is positive.
    pub duals: Vec<f64>,
}

const EPS: f64 = 1e-9;

/// Best rational approximation of `x` with denominator at most `max_den`.
pub(crate) fn rationalize(x: f64, max_den: i64) -> Rational {
    use num_bigint::BigInt;
    if !x.is_finite() {
        return Rational::zero();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x.abs();
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a.saturating_mul(p1).saturating_add(p0), a.saturating_mul(q1).saturating_add(q0));
        if q2 > max_den || q2 <= 0 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a as f64;
        if frac < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if x < 0.0 {
        -r
    } else {
        r
    }
}

pub(crate) enum ExactOutcome {
    /// Values of the structural columns.
    Feasible(Vec<Rational>),
    /// `y` with `y·b > 0` and `y·A_j ≤ 0` for every column of the master.
    Infeasible(Vec<Rational>),
}

/// Exact Phase-I tableau simplex with Bland's rule. Columns earlier in the
/// list are preferred on entry, so warm-start candidates should come first.
pub(crate) fn exact_phase_one(
    rows: usize,
    columns: &[Column<Rational>],
    b: &[Rational],
    max_pivots: usize,
) -> Option<ExactOutcome> {
    let m = rows;
    let n = columns.len();
    let width = n + m + 1;
    let sign: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for r in 0..m {
        let mut row = vec![Rational::zero(); width];
        row[n + r] = Rational::one();
        row[width - 1] = if sign[r] { -b[r].clone() } else { b[r].clone() };
        t.push(row);
    }
    for (j, col) in columns.iter().enumerate() {
        for (r, c) in col {
            t[*r][j] = if sign[*r] { -c.clone() } else { c.clone() };
        }
    }
    // objective row: reduced costs d_j = c_j − Σ_r t[r][j] (artificials basic)
    let mut z = vec![Rational::zero(); width];
    for row in &t {
        for k in 0..n {
            if !row[k].is_zero() {
                z[k] -= &row[k];
            }
        }
        z[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    for _ in 0..max_pivots {
        // Bland: first structural column with negative reduced cost
        let Some(e) = (0..n).find(|&k| z[k].is_negative()) else {
            let infeasible = z[width - 1].is_negative();
            if !infeasible {
                let mut x = vec![Rational::zero(); n];
                for (r, &bi) in basis.iter().enumerate() {
                    if bi < n {
                        x[bi] = t[r][width - 1].clone();
                    }
                }
                return Some(ExactOutcome::Feasible(x));
            }
            // d_art(r) = 1 − y_r in the sign-adjusted system
            let y = (0..m)
                .map(|r| {
                    let yr = Rational::one() - &z[n + r];
                    if sign[r] {
                        -yr
                    } else {
                        yr
                    }
                })
                .collect();
            return Some(ExactOutcome::Infeasible(y));
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for r in 0..m {
            if t[r][e].is_positive() {
                let ratio = &t[r][width - 1] / &t[r][e];
                let take = match &best {
                    None => true,
                    Some(bv) => ratio < *bv || (ratio == *bv && basis[r] < basis[leave.unwrap()]),
                };
                if take {
                    best = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let r = leave?;
        pivot(&mut t, &mut z, r, e);
        basis[r] = e;
    }
    None
}

fn pivot(t: &mut [Vec<Rational>], z: &mut [Rational], r: usize, e: usize) {
    let inv = t[r][e].recip();
    let width = z.len();
    let nz: Vec<usize> = (0..width).filter(|&k| !t[r][k].is_zero()).collect();
    for &k in &nz {
        t[r][k] *= &inv;
    }
    let prow: Vec<(usize, Rational)> = nz.iter().map(|&k| (k, t[r][k].clone())).collect();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[e].is_zero() {
            continue;
        }
        let f = row[e].clone();
        for (k, v) in &prow {
            row[*k] -= &f * v;
        }
    }
    if !z[e].is_zero() {
        let f = z[e].clone();
        for (k, v) in &prow {
            z[*k] -= &f * v;
        }
    }
}

/// Float feasibility of `A·x = b, x ≥ 0` through a sparse LU simplex. On
/// infeasibility a second LP `max y·b` over `y·A_j ≤ 0, |y| ≤ 1` supplies the
/// Farkas candidate.
pub(crate) fn float_solve(rows: usize, columns: &[Column<f64>], b: &[f64]) -> Option<FloatOutcome> {
    use microlp::{ComparisonOp, Error, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
    for (j, col) in columns.iter().enumerate() {
        for &(r, v) in col {
            by_row[r].push((j, v));
        }
    }
    let mut primal = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = columns.iter().map(|_| primal.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (r, entries) in by_row.iter().enumerate() {
        if entries.is_empty() {
            if b[r] != 0.0 {
                // no column touches this row; fall through to the dual
                return float_dual(columns, b);
            }
            continue;
        }
        let mut e = LinearExpr::empty();
        for &(j, v) in entries {
            e.add(vars[j], v);
        }
        primal.add_constraint(e, ComparisonOp::Eq, b[r]);
    }
    match primal.solve() {
        Ok(SolveOutcome::Solution(s)) => {
            let support = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| s.var_value(**v) > EPS)
                .map(|(j, _)| j)
                .collect();
            Some(FloatOutcome { support, infeasibility: 0.0, duals: vec![0.0; rows] })
        }
        Err(Error::Infeasible) => float_dual(columns, b),
        _ => None,
    }
}

fn float_dual( columns: &[Column<f64>], b: &[f64]) -> Option<FloatOutcome> {
    use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

    let mut dual = Problem::new(OptimizationDirection::Maximize);
    let y: Vec<_> = b.iter().map(|&v| dual.add_var(v, (-1.0, 1.0))).collect();
    for col in columns {
        let mut e = LinearExpr::empty();
        for &(r, v) in col {
            e.add(y[r], v);
        }
        dual.add_constraint(e, ComparisonOp::Le, 0.0);
    }
    match dual.solve() {
        Ok(SolveOutcome::Solution(s)) => {
            let duals: Vec<f64> = y.iter().map(|v| s.var_value(*v)).collect();
            Some(FloatOutcome {
                support: Vec::new(),
                infeasibility: s.objective().max(0.0),
                duals,
            })
        }
        _ => None,
    }
}
