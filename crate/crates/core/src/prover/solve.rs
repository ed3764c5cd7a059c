use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::lp::{exact_phase_one, float_solve, rationalize, Column, ExactOutcome};
use super::reduce::{Reduction, ZERO_CLASS};
use super::{
    check_certificate, elaborate_with, elemental_inequalities, Certificate, ConstraintId,
    ElaborateOptions, Form, ProblemInstance, ProverError,
};
use crate::expr::{InequalityStatement, Relation};
use crate::Rational;

#[derive(Debug, Clone)]
pub struct ProveOptions {
    pub max_rounds: usize,
    pub columns_per_round: usize,
    pub max_pivots: usize,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            max_rounds: 400,
            columns_per_round: 48,
            max_pivots: 200_000,
        }
    }
}

/// A point of the entropy space (one coordinate per nonempty subset of the
/// ground set, plus log slacks) satisfying every constraint of an instance
/// while making the objective negative. `scale` is the value of the constant
/// coordinate: 1 for an affine point, 0 for a ray of the cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntropyVector {
    pub n: usize,
    /// Indexed by `mask − 1`.
    #[serde(serialize_with = "ser_rationals")]
    pub values: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub logs: Vec<Rational>,
    #[serde(serialize_with = "super::ser_display")]
    pub scale: Rational,
    #[serde(serialize_with = "super::ser_display")]
    pub objective: Rational,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

impl EntropyVector {
    pub fn get(&self, mask: u32) -> Rational {
        if mask == 0 {
            Rational::zero()
        } else {
            self.values[mask as usize - 1].clone()
        }
    }

    /// Value of a form at this point, with the constant weighted by `scale`.
    pub fn evaluate(&self, f: &Form) -> Rational {
        let mut v = &f.constant * &self.scale;
        for (m, c) in &f.sets {
            v += c * self.get(*m);
        }
        for (i, c) in &f.logs {
            v += c * &self.logs[*i];
        }
        v
    }

    /// Exhaustive check against every constraint family of `pi`.
    pub fn satisfies(&self, pi: &ProblemInstance) -> bool {
        let zero = Rational::zero();
        let ok = |id: &ConstraintId| {
            pi.constraint_form(id).is_some_and(|f| {
                let v = self.evaluate(&f);
                if id.is_equality(pi) {
                    v == zero
                } else {
                    v >= zero
                }
            })
        };
        let Ok(elemental) = elemental_inequalities(pi.n(), 32) else {
            return false;
        };
        if !elemental.iter().all(&ok) || !pi.side_ids().iter().all(&ok) {
            return false;
        }
        if !pi.independence_ids().iter().all(&ok) {
            return false;
        }
        let full = pi.full_mask();
        for (rule, d) in pi.ground.determinations.iter().enumerate() {
            let pm = d.parent_mask();
            for set in 0..=full {
                if set & pm == pm && set >> d.target & 1 == 0 && !ok(&ConstraintId::Determination { set, rule }) {
                    return false;
                }
            }
        }
        for (group, g) in pi.symmetry.iter().enumerate() {
            for permutation in 0..g.permutations.len() {
                for set in 1..=full {
                    if g.image(permutation, set).is_some()
                        && !ok(&ConstraintId::Symmetry { set, group, permutation })
                    {
                        return false;
                    }
                }
            }
        }
        self.scale >= zero && self.objective.is_negative() && self.evaluate(&pi.objective) == self.objective
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProofOutcome {
    Proved { certificate: Certificate },
    /// Not derivable from the elemental inequalities and the instance's
    /// equalities and hypotheses; says nothing about truth.
    NotShannonProvable { witness: EntropyVector },
}

impl ProofOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofOutcome::Proved { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            ProofOutcome::Proved { certificate } => Some(certificate),
            _ => None,
        }
    }
}

struct ReducedColumn {
    id: ConstraintId,
    free: bool,
    coeffs: Column<Rational>,
}

/// Reduced columns: elemental (or the given inequality list), side
/// constraints and independence equalities, deduplicated.
fn reduced_columns(
    pi: &ProblemInstance,
    red: &Reduction,
    inequalities: Option<&[ConstraintId]>,
) -> Result<Vec<ReducedColumn>, ProverError> {
    let mut out: Vec<ReducedColumn> = Vec::new();
    let mut seen: HashMap<(bool, Vec<(usize, Rational)>), usize> = HashMap::new();
    let mut push = |id: ConstraintId, free: bool, coeffs: Column<Rational>, out: &mut Vec<ReducedColumn>| {
        if coeffs.is_empty() {
            return;
        }
        let key = (free, coeffs.clone());
        if seen.contains_key(&key) {
            return;
        }
        seen.insert(key, out.len());
        out.push(ReducedColumn { id, free, coeffs });
    };
    let to_col = |m: BTreeMap<usize, Rational>| -> Column<Rational> { m.into_iter().collect() };
    for id in pi.side_ids() {
        let f = pi.constraint_form(&id).expect("side constraint");
        let free = id.is_equality(pi);
        push(id, free, to_col(red.reduce(&f)), &mut out);
    }
    for id in pi.independence_ids() {
        let f = pi.constraint_form(&id).expect("independence constraint");
        push(id, true, to_col(red.reduce(&f)), &mut out);
    }
    match inequalities {
        Some(list) => {
            for id in list {
                let f = pi
                    .constraint_form(id)
                    .ok_or_else(|| ProverError::Internal(format!("invalid constraint {id:?}")))?;
                let free = id.is_equality(pi);
                push(id.clone(), free, to_col(red.reduce(&f)), &mut out);
            }
        }
        None => {
            // fast path: integer coefficients via class lookups
            let full = pi.full_mask();
            let add = |acc: &mut BTreeMap<usize, i64>, mask: u32, c: i64| {
                if mask != 0 {
                    let k = red.class_of[mask as usize];
                    if k != ZERO_CLASS {
                        *acc.entry(k as usize).or_insert(0) += c;
                    }
                }
            };
            for id in elemental_inequalities(pi.n(), pi.cap)? {
                let mut acc = BTreeMap::new();
                match &id {
                    ConstraintId::Monotonicity { var } => {
                        add(&mut acc, full, 1);
                        add(&mut acc, full & !(1 << var), -1);
                    }
                    ConstraintId::Submodularity { i, j, rest } => {
                        let (bi, bj) = (1u32 << i, 1u32 << j);
                        add(&mut acc, rest | bi, 1);
                        add(&mut acc, rest | bj, 1);
                        add(&mut acc, rest | bi | bj, -1);
                        add(&mut acc, *rest, -1);
                    }
                    _ => unreachable!("elemental ids"),
                }
                let col: Column<Rational> = acc
                    .into_iter()
                    .filter(|(_, v)| *v != 0)
                    .map(|(k, v)| (k, Rational::from_integer(v.into())))
                    .collect();
                push(id, false, col, &mut out);
            }
        }
    }
    Ok(out)
}

/// Decide Shannon-provability of an elaborated instance.
pub fn prove(pi: &ProblemInstance) -> Result<ProofOutcome, ProverError> {
    prove_with(pi, None, &ProveOptions::default())
}

/// Like [`prove`] but only the listed inequalities (plus hypotheses, log and
/// constant bounds, and all equalities) may appear in the certificate.
pub fn prove_restricted(
    pi: &ProblemInstance,
    inequalities: &[ConstraintId],
) -> Result<ProofOutcome, ProverError> {
    prove_with(pi, Some(inequalities), &ProveOptions::default())
}

pub(crate) fn prove_with(
    pi: &ProblemInstance,
    inequalities: Option<&[ConstraintId]>,
    opts: &ProveOptions,
) -> Result<ProofOutcome, ProverError> {
    if pi.n() >= pi.cap {
        return Err(ProverError::TooManyVariables { count: pi.n(), cap: pi.cap });
    }
    let red = Reduction::build(pi);
    let cols = reduced_columns(pi, &red, inequalities)?;
    let dim = red.dim();
    let target: BTreeMap<usize, Rational> = red.reduce(&pi.objective);
    // LP columns: (reduced column, sign)
    let mut lp: Vec<(usize, bool)> = Vec::new();
    for (k, c) in cols.iter().enumerate() {
        lp.push((k, true));
        if c.free {
            lp.push((k, false));
        }
    }
    let lp_col = |j: usize| -> Column<Rational> {
        let (k, pos) = lp[j];
        cols[k]
            .coeffs
            .iter()
            .map(|(r, v)| (*r, if pos { v.clone() } else { -v.clone() }))
            .collect()
    };
    let float_cols: Vec<Column<f64>> = (0..lp.len())
        .map(|j| lp_col(j).into_iter().map(|(r, v)| (r, v.to_f64().unwrap_or(0.0))).collect())
        .collect();
    let mut b_f = vec![0.0f64; dim];
    for (r, v) in &target {
        b_f[*r] = v.to_f64().unwrap_or(0.0);
    }
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; lp.len()];
    let fres = float_solve(dim, &float_cols, &b_f);
    let exact_cols: Vec<Column<Rational>> = (0..lp.len()).map(lp_col).collect();
    if let Some(fo) = fres {
        if fo.infeasibility > 1e-7 {
            for den in [1_000, 1_000_000] {
                let y: Vec<Rational> = fo.duals.iter().map(|v| rationalize(*v, den)).collect();
                if is_farkas(&y, &target, &exact_cols) {
                    return Ok(ProofOutcome::NotShannonProvable { witness: witness(pi, &red, &y) });
                }
            }
        }
        for j in fo.support {
            if !in_active[j] {
                in_active[j] = true;
                active.push(j);
            }
        }
    }
    drop(float_cols);
    for _round in 0..opts.max_rounds {
        let mut rows: BTreeSet<usize> = target.keys().copied().collect();
        for &j in &active {
            rows.extend(exact_cols[j].iter().map(|(r, _)| *r));
        }
        let rows: Vec<usize> = rows.into_iter().collect();
        let local: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let master_cols: Vec<Column<Rational>> = active
            .iter()
            .map(|&j| exact_cols[j].iter().map(|(r, v)| (local[r], v.clone())).collect())
            .collect();
        let b: Vec<Rational> = rows
            .iter()
            .map(|r| target.get(r).cloned().unwrap_or_else(Rational::zero))
            .collect();
        let outcome = exact_phase_one(rows.len(), &master_cols, &b, opts.max_pivots)
            .ok_or_else(|| ProverError::LimitExceeded("exact simplex pivots".into()))?;
        match outcome {
            ExactOutcome::Feasible(x) => {
                let mut mult: BTreeMap<usize, Rational> = BTreeMap::new();
                for (pos, &j) in active.iter().enumerate() {
                    if x[pos].is_zero() {
                        continue;
                    }
                    let (k, sign) = lp[j];
                    let v = if sign { x[pos].clone() } else { -x[pos].clone() };
                    *mult.entry(k).or_insert_with(Rational::zero) += v;
                }
                let certificate = assemble(pi, &red, &cols, mult)?;
                if !check_certificate(&certificate, pi) {
                    return Err(ProverError::Internal("assembled certificate fails recombination".into()));
                }
                return Ok(ProofOutcome::Proved { certificate });
            }
            ExactOutcome::Infeasible(y_local) => {
                let mut y = vec![Rational::zero(); dim];
                for (i, r) in rows.iter().enumerate() {
                    y[*r] = y_local[i].clone();
                }
                let mut priced: Vec<(f64, usize)> = Vec::new();
                for (j, col) in exact_cols.iter().enumerate() {
                    if in_active[j] {
                        continue;
                    }
                    let mut s = Rational::zero();
                    for (r, v) in col {
                        if !y[*r].is_zero() {
                            s += &y[*r] * v;
                        }
                    }
                    if s.is_positive() {
                        let norm = col.len() as f64;
                        priced.push((s.to_f64().unwrap_or(f64::MAX) / norm, j));
                    }
                }
                if priced.is_empty() {
                    return Ok(ProofOutcome::NotShannonProvable { witness: witness(pi, &red, &y) });
                }
                priced.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for &(_, j) in priced.iter().take(opts.columns_per_round) {
                    in_active[j] = true;
                    active.push(j);
                }
            }
        }
    }
    Err(ProverError::LimitExceeded("column generation rounds".into()))
}

/// `y·b > 0` and `y·A_j ≤ 0` for every column.
fn is_farkas(y: &[Rational], b: &BTreeMap<usize, Rational>, cols: &[Column<Rational>]) -> bool {
    let dot = |c: &mut dyn Iterator<Item = (usize, &Rational)>| {
        let mut s = Rational::zero();
        for (r, v) in c {
            if !y[r].is_zero() {
                s += &y[r] * v;
            }
        }
        s
    };
    dot(&mut b.iter().map(|(r, v)| (*r, v))).is_positive()
        && cols
            .iter()
            .all(|c| !dot(&mut c.iter().map(|(r, v)| (*r, v))).is_positive())
}

fn assemble(
    pi: &ProblemInstance,
    red: &Reduction,
    cols: &[ReducedColumn],
    mult: BTreeMap<usize, Rational>,
) -> Result<Certificate, ProverError> {
    let mut entries: Vec<(ConstraintId, Rational)> = Vec::new();
    let mut residual = pi.objective.clone();
    for (k, m) in mult {
        if m.is_zero() {
            continue;
        }
        let id = cols[k].id.clone();
        let f = pi.constraint_form(&id).expect("generated constraint");
        residual.add_scaled(&f, &-m.clone());
        entries.push((id, m));
    }
    entries.extend(red.lift(pi, &residual)?);
    Ok(Certificate { entries })
}

fn witness(pi: &ProblemInstance, red: &Reduction, y: &[Rational]) -> EntropyVector {
    let h: Vec<Rational> = y.iter().map(|v| -v.clone()).collect();
    let mut scale = h[red.constant_coord()].clone();
    let divisor = if scale.is_positive() { scale.clone() } else { Rational::one() };
    if scale.is_positive() {
        scale = Rational::one();
    }
    let n = pi.n();
    let values: Vec<Rational> = (1..1u32 << n)
        .map(|m| {
            let k = red.class_of[m as usize];
            if k == ZERO_CLASS {
                Rational::zero()
            } else {
                &h[k as usize] / &divisor
            }
        })
        .collect();
    let logs: Vec<Rational> = (0..red.logs).map(|i| &h[red.classes + i] / &divisor).collect();
    let mut w = EntropyVector {
        n,
        values,
        logs,
        scale,
        objective: Rational::zero(),
    };
    w.objective = w.evaluate(&pi.objective);
    w
}

/// Outcome for a statement; `=` statements need both directions.
#[derive(Debug, Clone, Serialize)]
pub struct StatementProof {
    pub instance: ProblemInstance,
    pub outcome: ProofOutcome,
    /// The `≥` half of an equality statement.
    pub reverse: Option<Box<(ProblemInstance, ProofOutcome)>>,
}

impl StatementProof {
    pub fn is_proved(&self) -> bool {
        self.outcome.is_proved() && self.reverse.as_ref().is_none_or(|r| r.1.is_proved())
    }

    /// Re-verify every certificate against its instance.
    pub fn verify(&self) -> bool {
        let one = |pi: &ProblemInstance, o: &ProofOutcome| {
            o.certificate().is_some_and(|c| check_certificate(c, pi))
        };
        one(&self.instance, &self.outcome) && self.reverse.as_ref().is_none_or(|r| one(&r.0, &r.1))
    }
}

pub fn prove_statement(
    s: &InequalityStatement,
    options: &ElaborateOptions,
) -> Result<StatementProof, ProverError> {
    let instance = elaborate_with(s, options)?;
    let outcome = prove(&instance)?;
    let reverse = if s.relation == Relation::Eq {
        let rev = instance.reversed();
        let o = prove(&rev)?;
        Some(Box::new((rev, o)))
    } else {
        None
    };
    Ok(StatementProof {
        instance,
        outcome,
        reverse,
    })
}
