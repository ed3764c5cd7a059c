use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::ground::build_ground_set;
use super::{Form, GroundSet, ProverError, DEFAULT_CAP};
use crate::expr::{InequalityStatement, LinearForm, Relation};
use crate::Rational;

/// Identifies one constraint of a [`ProblemInstance`]; the constraint's
/// coefficients are regenerated from the id alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintId {
    /// `H(N) − H(N∖{var}) ≥ 0`.
    Monotonicity { var: usize },
    /// `H(iK) + H(jK) − H(ijK) − H(K) ≥ 0`.
    Submodularity { i: usize, j: usize, rest: u32 },
    /// `H(a) + H(b) − H(a∪b) − H(a∩b) ≥ 0` for arbitrary subsets.
    SubmodularPair { a: u32, b: u32 },
    /// `H(large) − H(small) ≥ 0` for `small ⊆ large`.
    MonotonePair { small: u32, large: u32 },
    /// `log k ≥ 0`.
    LogNonnegative { log: usize },
    /// `1 ≥ 0`, carrying constant terms.
    ConstantPositive,
    /// An `assuming` clause, `≥ 0` or `= 0`.
    Hypothesis { index: usize },
    /// `H(set ∪ {target}) − H(set) = 0` when the rule's parents lie in `set`.
    Determination { set: u32, rule: usize },
    /// `H(set) − H(π(set)) = 0` for a permutation `π` of an iid group.
    Symmetry { set: u32, group: usize, permutation: usize },
    /// `H(subset) − Σ_{i ∈ subset} H(i) = 0` inside an independent family.
    Independence { family: usize, subset: u32 },
}

impl ConstraintId {
    pub fn is_equality(&self, pi: &ProblemInstance) -> bool {
        match self {
            ConstraintId::Determination { .. }
            | ConstraintId::Symmetry { .. }
            | ConstraintId::Independence { .. } => true,
            ConstraintId::Hypothesis { index } => {
                pi.hypotheses.get(*index).is_some_and(|h| h.equality)
            }
            _ => false,
        }
    }
}

/// Exchangeable base variables and the induced action on ground variables.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryGroup {
    /// Ground indices of the group's base variables.
    pub base: Vec<usize>,
    /// Per non-identity permutation, the image of each ground variable, or `None` when the
    /// variable depends on something outside the group or its image is not
    /// in the ground set.
    pub permutations: Vec<Vec<Option<usize>>>,
}

impl SymmetryGroup {
    pub fn image(&self, permutation: usize, set: u32) -> Option<u32> {
        let g = self.permutations.get(permutation)?;
        let mut out = 0u32;
        for (i, img) in g.iter().enumerate() {
            if set >> i & 1 == 1 {
                out |= 1 << (*img)?;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumedConstraint {
    pub text: String,
    #[serde(skip)]
    pub form: Form,
    pub equality: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ElaborateOptions {
    pub cap: usize,
    pub seed: u64,
}

impl Default for ElaborateOptions {
    fn default() -> Self {
        ElaborateOptions { cap: DEFAULT_CAP, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemInstance {
    pub statement: String,
    pub ground: GroundSet,
    /// Asserted nonnegative.
    #[serde(skip)]
    pub objective: Form,
    pub hypotheses: Vec<AssumedConstraint>,
    pub log_names: Vec<String>,
    /// Ground masks of independent families (iid or indep groups).
    pub families: Vec<u32>,
    pub symmetry: Vec<SymmetryGroup>,
    pub cap: usize,
}

pub fn elaborate(s: &InequalityStatement) -> Result<ProblemInstance, ProverError> {
    elaborate_with(s, &ElaborateOptions::default())
}

fn to_form(
    lf: &LinearForm,
    ground: &GroundSet,
    log_names: &[String],
) -> Result<Form, ProverError> {
    let mut f = Form::default();
    for (exprs, c) in &lf.entropies {
        let mask = ground.mask_of(exprs).ok_or_else(|| {
            let shown: Vec<String> = exprs.iter().map(|e| e.to_string()).collect();
            ProverError::UnknownExpression(shown.join(", "))
        })?;
        f.add_set(mask, c);
    }
    for (name, c) in &lf.logs {
        let i = log_names.iter().position(|n| n == name).expect("collected log name");
        f.add_log(i, c);
    }
    f.constant = lf.constant.clone();
    Ok(f)
}

/// Elaborate a statement. For `=` statements the objective is `right − left`;
/// see [`super::prove_statement`] for the reverse direction.
pub fn elaborate_with(
    s: &InequalityStatement,
    options: &ElaborateOptions,
) -> Result<ProblemInstance, ProverError> {
    let ground = build_ground_set(s, options.cap, options.seed)?;
    let log_names: Vec<String> = s.log_names().into_iter().collect();
    let objective = to_form(&s.objective(), &ground, &log_names)?;
    let mut hypotheses = Vec::new();
    for h in &s.hypotheses {
        hypotheses.push(AssumedConstraint {
            text: h.to_string(),
            form: to_form(&h.objective(), &ground, &log_names)?,
            equality: h.relation == Relation::Eq,
        });
    }
    let mut families = Vec::new();
    let mut symmetry = Vec::new();
    for g in &s.groups {
        let base: Vec<usize> = g
            .names
            .iter()
            .map(|n| ground.base_index(n).expect("declared"))
            .collect();
        if g.is_independent_family() {
            families.push(base.iter().fold(0u32, |m, &i| m | (1 << i)));
        }
        if g.iid && base.len() >= 2 {
            symmetry.push(symmetry_group(&ground, &g.names, &base));
        }
    }
    Ok(ProblemInstance {
        statement: s.to_string(),
        ground,
        objective,
        hypotheses,
        log_names,
        families,
        symmetry,
        cap: options.cap,
    })
}

/// Every permutation of `names` acting on the ground set. Single generators
/// are not enough: an orbit path may pass through images that are not
/// ground variables.
fn symmetry_group(ground: &GroundSet, names: &[String], base: &[usize]) -> SymmetryGroup {
    let k = names.len();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    permutations(&mut current, 0, &mut perms);
    perms.retain(|p| p.iter().enumerate().any(|(i, &j)| i != j));
    let permutations = perms
        .iter()
        .map(|perm| {
            let rename: BTreeMap<&str, &str> = names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.as_str(), names[perm[i]].as_str()))
                .collect();
            ground
                .vars
                .iter()
                .map(|v| {
                    if !v.support.iter().all(|n| rename.contains_key(n.as_str())) {
                        return None;
                    }
                    let img = v.expr.substitute(&|n| {
                        rename.get(n).map(|m| crate::expr::FieldExpr::Var(m.to_string()))
                    });
                    ground.index_of(&img)
                })
                .collect()
        })
        .collect();
    SymmetryGroup {
        base: base.to_vec(),
        permutations,
    }
}

fn permutations(current: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == current.len() {
        out.push(current.clone());
        return;
    }
    for i in start..current.len() {
        current.swap(start, i);
        permutations(current, start + 1, out);
        current.swap(start, i);
    }
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn full_mask(&self) -> u32 {
        if self.n() == 0 {
            0
        } else {
            (1u32 << self.n()) - 1
        }
    }

    /// The same instance with the objective negated (the `≥` half of an
    /// equality, or a reverse check).
    pub fn reversed(&self) -> ProblemInstance {
        let mut pi = self.clone();
        pi.objective = self.objective.negated();
        pi
    }

    /// Coefficients of a constraint, or `None` if the id does not denote a
    /// valid constraint of this instance.
    pub fn constraint_form(&self, id: &ConstraintId) -> Option<Form> {
        let full = self.full_mask();
        let one = Rational::one();
        let neg = -Rational::one();
        let mut f = Form::default();
        match id {
            ConstraintId::Monotonicity { var } => {
                if *var >= self.n() {
                    return None;
                }
                f.add_set(full, &one);
                f.add_set(full & !(1 << var), &neg);
            }
            ConstraintId::Submodularity { i, j, rest } => {
                if i >= j || *j >= self.n() {
                    return None;
                }
                let (bi, bj) = (1u32 << i, 1u32 << j);
                if rest & !full != 0 || rest & (bi | bj) != 0 {
                    return None;
                }
                f.add_set(rest | bi, &one);
                f.add_set(rest | bj, &one);
                f.add_set(rest | bi | bj, &neg);
                f.add_set(*rest, &neg);
            }
            ConstraintId::SubmodularPair { a, b } => {
                if (a | b) & !full != 0 {
                    return None;
                }
                f.add_set(*a, &one);
                f.add_set(*b, &one);
                f.add_set(a | b, &neg);
                f.add_set(a & b, &neg);
            }
            ConstraintId::MonotonePair { small, large } => {
                if large & !full != 0 || small & !large != 0 {
                    return None;
                }
                f.add_set(*large, &one);
                f.add_set(*small, &neg);
            }
            ConstraintId::LogNonnegative { log } => {
                if *log >= self.log_names.len() {
                    return None;
                }
                f.add_log(*log, &one);
            }
            ConstraintId::ConstantPositive => f.constant = one,
            ConstraintId::Hypothesis { index } => return Some(self.hypotheses.get(*index)?.form.clone()),
            ConstraintId::Determination { set, rule } => {
                let d = self.ground.determinations.get(*rule)?;
                let pm = d.parent_mask();
                if set & !full != 0 || pm & !set != 0 || set >> d.target & 1 == 1 {
                    return None;
                }
                f.add_set(set | 1 << d.target, &one);
                f.add_set(*set, &neg);
            }
            ConstraintId::Symmetry { set, group, permutation } => {
                if set & !full != 0 {
                    return None;
                }
                let img = self.symmetry.get(*group)?.image(*permutation, *set)?;
                f.add_set(*set, &one);
                f.add_set(img, &neg);
            }
            ConstraintId::Independence { family, subset } => {
                let fam = *self.families.get(*family)?;
                if subset & !fam != 0 || subset.count_ones() < 2 {
                    return None;
                }
                f.add_set(*subset, &one);
                for i in 0..self.n() {
                    if subset >> i & 1 == 1 {
                        f.add_set(1 << i, &neg);
                    }
                }
            }
        }
        Some(f)
    }

    /// All equality constraints other than determinations and symmetries,
    /// which are handled by reduction.
    pub(crate) fn independence_ids(&self) -> Vec<ConstraintId> {
        let mut out = Vec::new();
        for (family, &fam) in self.families.iter().enumerate() {
            let mut sub = fam;
            while sub != 0 {
                if sub.count_ones() >= 2 {
                    out.push(ConstraintId::Independence { family, subset: sub });
                }
                sub = (sub - 1) & fam;
            }
        }
        out.reverse();
        out
    }

    pub(crate) fn side_ids(&self) -> Vec<ConstraintId> {
        let mut out: Vec<ConstraintId> = (0..self.hypotheses.len())
            .map(|index| ConstraintId::Hypothesis { index })
            .collect();
        out.extend((0..self.log_names.len()).map(|log| ConstraintId::LogNonnegative { log }));
        out.push(ConstraintId::ConstantPositive);
        out
    }
}
