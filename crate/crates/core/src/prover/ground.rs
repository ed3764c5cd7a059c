use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ProverError;
use crate::expr::{evaluate, CompiledExpr, FieldExpr, FieldValue, InequalityStatement};

/// Modulus for identity fingerprints (`2^61 − 1`).
const FINGERPRINT_PRIME: u64 = (1 << 61) - 1;
const FINGERPRINT_POINTS: usize = 3;
/// Fields used to validate every non-structural determination.
const VALIDATION_FIELDS: [u64; 2] = [5, 7];
/// Exhaustive validation up to this many assignments, sampling beyond.
const EXHAUSTIVE_LIMIT: u64 = 200_000;
const SAMPLED_ASSIGNMENTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundVar {
    /// Canonical expression.
    #[serde(serialize_with = "super::ser_display")]
    pub expr: FieldExpr,
    /// Base variables the expression depends on.
    pub support: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeterminationSource {
    /// The target is built from the parents by its own syntax tree.
    Structural,
    /// Found by identity search over small compositions of ground variables.
    RuleBase,
    /// Supplied by an `identity` clause.
    Annotation,
}

/// `target` is a function of `parents`: `H(target | parents) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Determination {
    pub target: usize,
    pub parents: Vec<usize>,
    /// Formula for the target written in terms of the parents' expressions.
    #[serde(serialize_with = "super::ser_display")]
    pub witness: FieldExpr,
    pub source: DeterminationSource,
}

impl Determination {
    pub fn parent_mask(&self) -> u32 {
        self.parents.iter().fold(0, |m, &p| m | (1 << p))
    }
}

/// Base and derived variables of a statement, with functional dependencies.
#[derive(Debug, Clone, Serialize)]
pub struct GroundSet {
    pub vars: Vec<GroundVar>,
    /// Number of leading entries of `vars` that are base variables.
    pub base_count: usize,
    pub determinations: Vec<Determination>,
}

impl GroundSet {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, e: &FieldExpr) -> Option<usize> {
        let c = e.canonical();
        self.vars.iter().position(|v| v.expr == c)
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.vars[..self.base_count]
            .iter()
            .position(|v| matches!(&v.expr, FieldExpr::Var(n) if n == name))
    }

    pub fn mask_of(&self, exprs: &[FieldExpr]) -> Option<u32> {
        exprs
            .iter()
            .try_fold(0u32, |m, e| self.index_of(e).map(|i| m | (1 << i)))
    }

    pub fn describe_mask(&self, mask: u32) -> String {
        let names: Vec<String> = (0..self.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.vars[i].expr.to_string())
            .collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Collect ground variables: declared base variables, then every distinct
/// compound expression inside an entropy term or a `using` clause.
pub(crate) fn collect_ground(
    s: &InequalityStatement,
    cap: usize,
) -> Result<GroundSet, ProverError> {
    let mut vars: Vec<GroundVar> = s
        .declared_variables()
        .into_iter()
        .map(|n| GroundVar {
            support: [n.clone()].into_iter().collect(),
            expr: FieldExpr::Var(n),
        })
        .collect();
    let base_count = vars.len();
    let push = |e: &FieldExpr, vars: &mut Vec<GroundVar>| {
        let c = e.canonical();
        if !vars.iter().any(|v| v.expr == c) {
            vars.push(GroundVar {
                support: c.free_variables(),
                expr: c,
            });
        }
    };
    let mut sides = vec![&s.left, &s.right];
    for h in &s.hypotheses {
        sides.push(&h.left);
        sides.push(&h.right);
    }
    for side in sides {
        for t in side.entropy_terms() {
            for e in t.arguments.iter().chain(&t.conditions) {
                push(e, &mut vars);
            }
        }
    }
    for e in &s.auxiliary {
        push(e, &mut vars);
    }
    if vars.len() >= cap {
        return Err(ProverError::TooManyVariables {
            count: vars.len(),
            cap,
        });
    }
    Ok(GroundSet {
        vars,
        base_count,
        determinations: Vec::new(),
    })
}

/// Ground variables covering the maximal subtrees of `e`, never `exclude`.
fn cover(e: &FieldExpr, ground: &GroundSet, exclude: Option<usize>, out: &mut BTreeSet<usize>) {
    if let Some(i) = ground.index_of(e) {
        if Some(i) != exclude {
            out.insert(i);
            return;
        }
    }
    for c in e.children() {
        cover(c, ground, exclude, out);
    }
}

fn structural_determinations(ground: &GroundSet) -> Vec<Determination> {
    let mut out = Vec::new();
    for (i, v) in ground.vars.iter().enumerate().skip(ground.base_count) {
        let mut parents = BTreeSet::new();
        for c in v.expr.children() {
            cover(c, ground, Some(i), &mut parents);
        }
        out.push(Determination {
            target: i,
            parents: parents.into_iter().collect(),
            witness: v.expr.clone(),
            source: DeterminationSource::Structural,
        });
        let base: Vec<usize> = v
            .support
            .iter()
            .map(|n| ground.base_index(n).expect("declared base variable"))
            .collect();
        out.push(Determination {
            target: i,
            parents: base,
            witness: v.expr.clone(),
            source: DeterminationSource::Structural,
        });
    }
    out
}

type Fingerprint = [Option<u64>; FINGERPRINT_POINTS];

fn fp_binary(a: &Fingerprint, b: &Fingerprint, op: u8) -> Fingerprint {
    let q = FINGERPRINT_PRIME;
    let mut out = [None; FINGERPRINT_POINTS];
    for k in 0..FINGERPRINT_POINTS {
        out[k] = match (a[k], b[k]) {
            (Some(x), Some(y)) => match op {
                b'+' => Some((x + y) % q),
                b'-' => Some((x + q - y) % q),
                b'*' => Some(((x as u128 * y as u128) % q as u128) as u64),
                _ => {
                    if y == 0 {
                        None
                    } else {
                        Some(((x as u128 * crate::expr::inv_mod(y, q) as u128) % q as u128) as u64)
                    }
                }
            },
            _ => None,
        };
    }
    out
}

fn make_binary(a: FieldExpr, b: FieldExpr, op: u8) -> FieldExpr {
    let (a, b) = (Box::new(a), Box::new(b));
    match op {
        b'+' => FieldExpr::Add(a, b),
        b'-' => FieldExpr::Sub(a, b),
        b'*' => FieldExpr::Mul(a, b),
        _ => FieldExpr::Div(a, b),
    }
}

/// Candidate determinations from compositions of up to three ground variables
/// whose fingerprints agree with a ground variable's.
fn rule_base_candidates(ground: &GroundSet, seed: u64) -> Vec<Determination> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ground.len();
    let base_names: Vec<String> = ground.vars[..ground.base_count]
        .iter()
        .map(|v| v.expr.to_string())
        .collect();
    let points: Vec<HashMap<String, u64>> = (0..FINGERPRINT_POINTS)
        .map(|_| {
            base_names
                .iter()
                .map(|b| (b.clone(), rng.gen_range(1..FINGERPRINT_PRIME)))
                .collect()
        })
        .collect();
    let fps: Vec<Fingerprint> = ground
        .vars
        .iter()
        .map(|v| {
            let mut f = [None; FINGERPRINT_POINTS];
            for (k, pt) in points.iter().enumerate() {
                f[k] = match evaluate(&v.expr, pt, FINGERPRINT_PRIME) {
                    Ok(FieldValue::Finite(x)) => Some(x),
                    _ => None,
                };
            }
            f
        })
        .collect();
    let mut by_fp: HashMap<Fingerprint, Vec<usize>> = HashMap::new();
    for (i, f) in fps.iter().enumerate() {
        if f.iter().all(|x| x.is_some()) {
            by_fp.entry(*f).or_default().push(i);
        }
    }
    let mut out: Vec<Determination> = Vec::new();
    let mut emit = |fp: &Fingerprint, parents: Vec<usize>, witness: &dyn Fn() -> FieldExpr| {
        if let Some(targets) = by_fp.get(fp) {
            for &t in targets {
                if !parents.contains(&t) {
                    let mut ps = parents.clone();
                    ps.sort_unstable();
                    ps.dedup();
                    out.push(Determination {
                        target: t,
                        parents: ps,
                        witness: witness(),
                        source: DeterminationSource::RuleBase,
                    });
                }
            }
        }
    };
    let ex = |i: usize| ground.vars[i].expr.clone();
    let one: Fingerprint = [Some(1); FINGERPRINT_POINTS];
    let zero: Fingerprint = [Some(0); FINGERPRINT_POINTS];
    let ops = *b"+-*/";
    for u in 0..n {
        emit(&fps[u], vec![u], &|| ex(u));
        emit(&fp_binary(&zero, &fps[u], b'-'), vec![u], &|| FieldExpr::Neg(Box::new(ex(u))));
        emit(&fp_binary(&one, &fps[u], b'/'), vec![u], &|| {
            FieldExpr::Div(Box::new(FieldExpr::Const(1)), Box::new(ex(u)))
        });
    }
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            for &op in &ops {
                if (op == b'+' || op == b'*') && u > v {
                    continue;
                }
                let f = fp_binary(&fps[u], &fps[v], op);
                emit(&f, vec![u, v], &|| make_binary(ex(u), ex(v), op));
                for w in 0..n {
                    if w == u || w == v {
                        continue;
                    }
                    for &op2 in &ops {
                        let left = fp_binary(&f, &fps[w], op2);
                        emit(&left, vec![u, v, w], &|| {
                            make_binary(make_binary(ex(u), ex(v), op), ex(w), op2)
                        });
                        let right = fp_binary(&fps[w], &f, op2);
                        emit(&right, vec![u, v, w], &|| {
                            make_binary(ex(w), make_binary(ex(u), ex(v), op), op2)
                        });
                    }
                }
            }
        }
    }
    out
}

fn annotation_determinations(
    s: &InequalityStatement,
    ground: &GroundSet,
) -> Result<Vec<Determination>, ProverError> {
    let mut out = Vec::new();
    for (l, r) in &s.identities {
        let (target, witness) = match (ground.index_of(r), ground.index_of(l)) {
            (Some(t), _) => (t, l),
            (None, Some(t)) => (t, r),
            (None, None) => {
                return Err(ProverError::UnusableIdentity(format!("{l} = {r}")));
            }
        };
        let mut parents = BTreeSet::new();
        cover(witness, ground, Some(target), &mut parents);
        out.push(Determination {
            target,
            parents: parents.into_iter().collect(),
            witness: witness.clone(),
            source: DeterminationSource::Annotation,
        });
    }
    Ok(out)
}

/// Check `target = witness` on admissible assignments over small fields:
/// nonzero-flagged variables avoid 0 and `given` expressions never vanish.
pub(crate) fn validate_determination(
    s: &InequalityStatement,
    ground: &GroundSet,
    d: &Determination,
    seed: u64,
) -> Result<(), String> {
    let target = &ground.vars[d.target].expr;
    for p in VALIDATION_FIELDS {
        for_each_admissible(s, &[target, &d.witness], p, seed, &mut |vals, names, v| {
            if v[0] != v[1] {
                let shown: Vec<String> = names.iter().zip(vals).map(|(n, v)| format!("{n}={v}")).collect();
                return Err(format!("{target} != {} over F_{p} at {}", d.witness, shown.join(", ")));
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Run `check` on assignments over `F_p` of the variables of `exprs` (plus
/// those of any `given` clause touching them) that respect the statement's
/// nonzero flags and `given` clauses: all of them when there are at most
/// [`EXHAUSTIVE_LIMIT`], otherwise a seeded sample. `check` receives the
/// assignment, the variable names and the raw values of `exprs` (`p` for `∞`).
pub(crate) fn for_each_admissible(
    s: &InequalityStatement,
    exprs: &[&FieldExpr],
    p: u64,
    seed: u64,
    check: &mut dyn FnMut(&[u64], &[String], &[u64]) -> Result<(), String>,
) -> Result<(), String> {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for e in exprs {
        names.extend(e.free_variables());
    }
    let givens: Vec<&FieldExpr> = s
        .nonzero_exprs
        .iter()
        .filter(|g| g.free_variables().iter().any(|v| names.contains(v)))
        .collect();
    for g in &givens {
        names.extend(g.free_variables());
    }
    let names: Vec<String> = names.into_iter().collect();
    let compile = |e: &FieldExpr| CompiledExpr::new(e, &names, p).map_err(|e| e.to_string());
    let es: Vec<CompiledExpr> = exprs.iter().map(|e| compile(e)).collect::<Result<_, _>>()?;
    let gs: Vec<CompiledExpr> = givens.iter().map(|e| compile(e)).collect::<Result<_, _>>()?;
    let lows: Vec<u64> = names.iter().map(|n| u64::from(s.is_nonzero(n))).collect();
    let total = p.checked_pow(names.len() as u32).unwrap_or(u64::MAX);
    let mut stack = Vec::new();
    let mut vals = vec![0u64; names.len()];
    let mut out = vec![0u64; es.len()];
    let mut visit = |vals: &[u64]| -> Result<(), String> {
        if vals.iter().zip(&lows).any(|(v, lo)| v < lo) {
            return Ok(());
        }
        if gs.iter().any(|g| g.eval_raw(vals, &mut stack) == 0) {
            return Ok(());
        }
        for (o, e) in out.iter_mut().zip(&es) {
            *o = e.eval_raw(vals, &mut stack);
        }
        check(vals, &names, &out)
    };
    if total <= EXHAUSTIVE_LIMIT {
        for code in 0..total {
            let mut c = code;
            for v in vals.iter_mut() {
                *v = c % p;
                c /= p;
            }
            visit(&vals)?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
        for _ in 0..SAMPLED_ASSIGNMENTS {
            for (v, lo) in vals.iter_mut().zip(&lows) {
                *v = rng.gen_range(*lo..p);
            }
            visit(&vals)?;
        }
    }
    Ok(())
}

/// Drop determinations whose parent set strictly contains another parent set
/// for the same target, and exact duplicates.
fn minimal(dets: Vec<Determination>) -> Vec<Determination> {
    let mut by_target: BTreeMap<usize, Vec<Determination>> = BTreeMap::new();
    for d in dets {
        by_target.entry(d.target).or_default().push(d);
    }
    let mut out = Vec::new();
    for (_, mut ds) in by_target {
        ds.sort_by_key(|d| (d.parents.len(), d.parents.clone(), d.source as u8));
        let mut kept: Vec<Determination> = Vec::new();
        for d in ds {
            let m = d.parent_mask();
            if kept.iter().any(|k| k.parent_mask() & m == k.parent_mask()) {
                continue;
            }
            kept.push(d);
        }
        out.extend(kept);
    }
    out
}

/// Build the ground set and its validated determinations.
pub(crate) fn build_ground_set(
    s: &InequalityStatement,
    cap: usize,
    seed: u64,
) -> Result<GroundSet, ProverError> {
    let mut ground = collect_ground(s, cap)?;
    let annotated = annotation_determinations(s, &ground)?;
    for d in &annotated {
        validate_determination(s, &ground, d, seed).map_err(ProverError::DeterminationInvalid)?;
    }
    let mut dets = structural_determinations(&ground);
    dets.extend(annotated);
    let structural_masks: BTreeSet<(usize, u32)> =
        dets.iter().map(|d| (d.target, d.parent_mask())).collect();
    let mut candidates = rule_base_candidates(&ground, seed);
    candidates.retain(|d| !structural_masks.contains(&(d.target, d.parent_mask())));
    let candidates = minimal(candidates);
    for d in candidates {
        // rule-base candidates that fail validation are simply not used
        if validate_determination(s, &ground, &d, seed).is_ok() {
            dets.push(d);
        }
    }
    ground.determinations = minimal(dets);
    Ok(ground)
}
