use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::FieldExpr;

/// `coefficient · H(arguments | conditions)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyTerm {
    pub coefficient: BigRational,
    pub arguments: Vec<FieldExpr>,
    pub conditions: Vec<FieldExpr>,
}

/// One summand of a side of a statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Entropy(EntropyTerm),
    /// `coefficient · log name`, a nonnegative symbolic quantity such as `log K`.
    Log {
        coefficient: BigRational,
        name: String,
    },
    Constant(BigRational),
}

impl Term {
    pub fn coefficient(&self) -> &BigRational {
        match self {
            Term::Entropy(t) => &t.coefficient,
            Term::Log { coefficient, .. } => coefficient,
            Term::Constant(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Side {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// A group of declared variables sharing flags.
///
/// `iid` makes the group mutually independent with identical marginals,
/// `indep` makes it mutually independent. Distinct groups carry no joint
/// constraint between each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclGroup {
    pub names: Vec<String>,
    pub iid: bool,
    pub independent: bool,
    pub nonzero: bool,
}

impl DeclGroup {
    /// Whether the group's variables are mutually independent.
    pub fn is_independent_family(&self) -> bool {
        (self.iid || self.independent) && self.names.len() >= 2
    }
}

/// An assumed linear entropy relation, e.g. `H(X+Y) <= H(X) + log K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub left: Side,
    pub relation: Relation,
    pub right: Side,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityStatement {
    pub left: Side,
    pub relation: Relation,
    pub right: Side,
    pub groups: Vec<DeclGroup>,
    /// Extra expressions to include as ground variables (auxiliary copies etc.).
    pub auxiliary: Vec<FieldExpr>,
    /// Expressions assumed to be nonzero almost surely.
    pub nonzero_exprs: Vec<FieldExpr>,
    /// Algebraic identities `lhs = rhs` offered as determination witnesses.
    pub identities: Vec<(FieldExpr, FieldExpr)>,
    pub hypotheses: Vec<Hypothesis>,
}

impl Side {
    pub fn entropy_terms(&self) -> impl Iterator<Item = &EntropyTerm> {
        self.terms.iter().filter_map(|t| match t {
            Term::Entropy(e) => Some(e),
            _ => None,
        })
    }

    pub fn constant(&self) -> BigRational {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Constant(c) => Some(c.clone()),
                _ => None,
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Coefficients of the symbolic `log` quantities, merged by name.
    pub fn log_coefficients(&self) -> BTreeMap<String, BigRational> {
        let mut out: BTreeMap<String, BigRational> = BTreeMap::new();
        for t in &self.terms {
            if let Term::Log { coefficient, name } = t {
                *out.entry(name.clone()).or_insert_with(BigRational::zero) += coefficient;
            }
        }
        out
    }

    fn expressions(&self) -> impl Iterator<Item = &FieldExpr> {
        self.entropy_terms()
            .flat_map(|t| t.arguments.iter().chain(t.conditions.iter()))
    }
}

impl InequalityStatement {
    pub fn declared_variables(&self) -> Vec<String> {
        self.groups.iter().flat_map(|g| g.names.iter().cloned()).collect()
    }

    pub fn group_of(&self, name: &str) -> Option<&DeclGroup> {
        self.groups.iter().find(|g| g.names.iter().any(|n| n == name))
    }

    pub fn is_nonzero(&self, name: &str) -> bool {
        self.group_of(name).is_some_and(|g| g.nonzero)
    }

    /// Every field expression mentioned anywhere in the statement.
    pub fn all_expressions(&self) -> Vec<&FieldExpr> {
        let mut out: Vec<&FieldExpr> = self
            .left
            .expressions()
            .chain(self.right.expressions())
            .collect();
        for h in &self.hypotheses {
            out.extend(h.left.expressions().chain(h.right.expressions()));
        }
        out.extend(self.auxiliary.iter());
        out.extend(self.nonzero_exprs.iter());
        for (l, r) in &self.identities {
            out.push(l);
            out.push(r);
        }
        out
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        self.all_expressions()
            .into_iter()
            .flat_map(|e| e.free_variables())
            .collect()
    }

    /// Names of all symbolic `log` quantities in the statement and hypotheses.
    pub fn log_names(&self) -> BTreeSet<String> {
        let mut sides = vec![&self.left, &self.right];
        for h in &self.hypotheses {
            sides.push(&h.left);
            sides.push(&h.right);
        }
        sides
            .into_iter()
            .flat_map(|s| s.log_coefficients().into_keys())
            .collect()
    }
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: &BigRational, first: bool) -> fmt::Result {
    if c.is_negative() {
        f.write_str(if first { "-" } else { " - " })?;
    } else if !first {
        f.write_str(" + ")?;
    }
    let a = c.abs();
    if !a.is_one() {
        write!(f, "{a} ")?;
    }
    Ok(())
}

fn write_list(f: &mut fmt::Formatter<'_>, exprs: &[FieldExpr]) -> fmt::Result {
    for (i, e) in exprs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let first = i == 0;
            match t {
                Term::Constant(c) => {
                    if c.is_negative() {
                        f.write_str(if first { "-" } else { " - " })?;
                    } else if !first {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}", c.abs())?;
                }
                Term::Log { coefficient, name } => {
                    write_coefficient(f, coefficient, first)?;
                    write!(f, "log {name}")?;
                }
                Term::Entropy(e) => {
                    write_coefficient(f, &e.coefficient, first)?;
                    f.write_str("H(")?;
                    write_list(f, &e.arguments)?;
                    if !e.conditions.is_empty() {
                        f.write_str(" | ")?;
                        write_list(f, &e.conditions)?;
                    }
                    f.write_str(")")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.relation, self.right)
    }
}

impl fmt::Display for InequalityStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} where ", self.left, self.relation, self.right)?;
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(&g.names.join(", "))?;
            if g.iid {
                f.write_str(" iid")?;
            }
            if g.independent {
                f.write_str(" indep")?;
            }
            if g.nonzero {
                f.write_str(" nonzero")?;
            }
        }
        if !self.auxiliary.is_empty() {
            f.write_str(" using ")?;
            write_list(f, &self.auxiliary)?;
        }
        if !self.nonzero_exprs.is_empty() {
            f.write_str(" given ")?;
            for (i, e) in self.nonzero_exprs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{e} != 0")?;
            }
        }
        for (l, r) in &self.identities {
            write!(f, " identity {l} = {r}")?;
        }
        for h in &self.hypotheses {
            write!(f, " assuming {h}")?;
        }
        Ok(())
    }
}

pub(crate) fn one() -> BigRational {
    BigRational::one()
}

/// A statement side or difference of sides as a linear functional:
/// `Σ c_S · H(S) + Σ c_k · log k + constant`, with each `S` a sorted,
/// duplicate-free tuple of canonical expressions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    pub entropies: BTreeMap<Vec<FieldExpr>, BigRational>,
    pub logs: BTreeMap<String, BigRational>,
    pub constant: BigRational,
}

impl LinearForm {
    pub fn add_entropy(&mut self, exprs: &[FieldExpr], c: &BigRational) {
        let mut key: Vec<FieldExpr> = exprs.iter().map(|e| e.canonical()).collect();
        key.sort();
        key.dedup();
        if key.is_empty() || c.is_zero() {
            return;
        }
        let slot = self.entropies.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.entropies.remove(&key);
        }
    }

    fn add_log(&mut self, name: &str, c: &BigRational) {
        let slot = self.logs.entry(name.to_string()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.logs.remove(name);
        }
    }

    /// `self + sign · side`.
    pub fn add_side(&mut self, side: &Side, negate: bool) {
        let sgn = |c: &BigRational| if negate { -c.clone() } else { c.clone() };
        for t in &side.terms {
            match t {
                Term::Constant(c) => self.constant += sgn(c),
                Term::Log { coefficient, name } => self.add_log(name, &sgn(coefficient)),
                Term::Entropy(e) => {
                    let c = sgn(&e.coefficient);
                    let joint: Vec<FieldExpr> =
                        e.arguments.iter().chain(e.conditions.iter()).cloned().collect();
                    self.add_entropy(&joint, &c);
                    if !e.conditions.is_empty() {
                        self.add_entropy(&e.conditions, &-c);
                    }
                }
            }
        }
    }

    /// The form `right − left` (for `<=`), `left − right` (for `>=`), or
    /// `right − left` for equalities, whose negation is checked separately.
    pub fn of_relation(left: &Side, relation: Relation, right: &Side) -> LinearForm {
        let mut f = LinearForm::default();
        match relation {
            Relation::Le | Relation::Eq => {
                f.add_side(right, false);
                f.add_side(left, true);
            }
            Relation::Ge => {
                f.add_side(left, false);
                f.add_side(right, true);
            }
        }
        f
    }

    pub fn negated(&self) -> LinearForm {
        LinearForm {
            entropies: self.entropies.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
            logs: self.logs.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
            constant: -self.constant.clone(),
        }
    }
}

impl InequalityStatement {
    /// The quantity asserted to be nonnegative (or zero for `=`).
    pub fn objective(&self) -> LinearForm {
        LinearForm::of_relation(&self.left, self.relation, &self.right)
    }
}

impl Hypothesis {
    pub fn objective(&self) -> LinearForm {
        LinearForm::of_relation(&self.left, self.relation, &self.right)
    }
}
