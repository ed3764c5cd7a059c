use super::{ConstraintId, ProverError};

/// Default bound on the number of ground variables.
pub const DEFAULT_CAP: usize = 16;

/// Elemental Shannon inequalities on `n` variables: `H(N) − H(N∖{i}) ≥ 0`
/// for each `i`, and `I(i; j | K) ≥ 0` for `i < j` and `K ⊆ N∖{i, j}`.
///
/// Refuses `n ≥ cap`; with the default cap of 16 that keeps the subset
/// lattice at most `2^15` coordinates.
pub fn elemental_inequalities(n: usize, cap: usize) -> Result<Vec<ConstraintId>, ProverError> {
    if n >= cap || n > 31 {
        return Err(ProverError::TooManyVariables { count: n, cap });
    }
    let mut out: Vec<ConstraintId> = (0..n).map(|var| ConstraintId::Monotonicity { var }).collect();
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    for i in 0..n {
        for j in i + 1..n {
            let others = full & !(1 << i) & !(1 << j);
            let mut rest = others;
            loop {
                out.push(ConstraintId::Submodularity { i, j, rest });
                if rest == 0 {
                    break;
                }
                rest = (rest - 1) & others;
            }
        }
    }
    Ok(out)
}
