//! Multi-step derivations: statements proved in sequence, where a step may
//! assume substitution instances of earlier steps.
//!
//! A use `source[v ↦ e, …]` is admitted only if the substitution respects the
//! source's declarations inside the host step: nonzero variables and `given`
//! expressions map to expressions that never vanish, independent families map
//! to expressions with disjoint supports inside one independent family of the
//! host, iid families additionally map to renamings of each other, and the
//! source's own `assuming` clauses reappear verbatim among the host's.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ground::for_each_admissible;
use super::{prove_statement, ElaborateOptions, ProofOutcome, StatementProof};
use crate::expr::{
    parse_expression, parse_statement, EntropyTerm, FieldExpr, Hypothesis, InequalityStatement,
    Side, Term,
};

/// Fields on which substituted expressions are checked to be nonzero.
const CHECK_FIELDS: [u64; 2] = [5, 7];

#[derive(Debug, Clone, Serialize)]
pub struct LemmaUse {
    /// Name of an earlier step.
    pub source: String,
    /// `variable ↦ expression`; unlisted variables map to themselves.
    pub substitution: Vec<(String, String)>,
}

impl LemmaUse {
    pub fn new(source: &str, substitution: &[(&str, &str)]) -> Self {
        LemmaUse {
            source: source.to_string(),
            substitution: substitution
                .iter()
                .map(|(v, e)| (v.to_string(), e.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivationStep {
    pub name: String,
    pub statement: String,
    pub uses: Vec<LemmaUse>,
}

impl DerivationStep {
    pub fn new(name: &str, statement: &str, uses: Vec<LemmaUse>) -> Self {
        DerivationStep {
            name: name.to_string(),
            statement: statement.to_string(),
            uses,
        }
    }
}

/// Steps in dependency order; the last step is the derived statement.
#[derive(Debug, Clone, Serialize)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
}

impl Derivation {
    pub fn conclusion(&self) -> &str {
        self.steps.last().map(|s| s.statement.as_str()).unwrap_or("")
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StepStatus {
    Proved { certificate_entries: usize },
    NotShannonProvable,
    /// A lemma use failed its substitution check; the step was not attempted.
    InvalidUse { detail: String },
    /// A source step was not proved.
    Unjustified { source: String },
    Error { detail: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub name: String,
    /// The step with the instantiated lemma uses as `assuming` clauses.
    pub elaborated: String,
    pub status: StepStatus,
    #[serde(skip)]
    pub proof: Option<StatementProof>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivationReport {
    pub steps: Vec<StepReport>,
}

impl DerivationReport {
    pub fn is_proved(&self) -> bool {
        !self.steps.is_empty()
            && self
                .steps
                .iter()
                .all(|s| matches!(s.status, StepStatus::Proved { .. }))
    }

    /// Re-check every step certificate by recombination.
    pub fn verify(&self) -> bool {
        self.is_proved() && self.steps.iter().all(|s| s.proof.as_ref().is_some_and(|p| p.verify()))
    }

    /// First step that is not proved, with its status.
    pub fn first_failure(&self) -> Option<&StepReport> {
        self.steps
            .iter()
            .find(|s| !matches!(s.status, StepStatus::Proved { .. }))
    }

    pub fn certificate_entries(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s.status {
                StepStatus::Proved { certificate_entries } => certificate_entries,
                _ => 0,
            })
            .sum()
    }
}

fn substitute_side(side: &Side, map: &BTreeMap<String, FieldExpr>) -> Side {
    let sub = |e: &FieldExpr| e.substitute(&|n| map.get(n).cloned()).canonical();
    Side {
        terms: side
            .terms
            .iter()
            .map(|t| match t {
                Term::Entropy(e) => Term::Entropy(EntropyTerm {
                    coefficient: e.coefficient.clone(),
                    arguments: e.arguments.iter().map(sub).collect(),
                    conditions: e.conditions.iter().map(sub).collect(),
                }),
                other => other.clone(),
            })
            .collect(),
    }
}

fn instantiate(h: &Hypothesis, map: &BTreeMap<String, FieldExpr>) -> Hypothesis {
    Hypothesis {
        left: substitute_side(&h.left, map),
        relation: h.relation,
        right: substitute_side(&h.right, map),
    }
}

fn conclusion_of(s: &InequalityStatement) -> Hypothesis {
    Hypothesis {
        left: s.left.clone(),
        relation: s.relation,
        right: s.right.clone(),
    }
}

/// Whether `e` is finite and nonzero on every admissible assignment of the host.
fn never_zero(host: &InequalityStatement, e: &FieldExpr) -> Result<(), String> {
    for p in CHECK_FIELDS {
        for_each_admissible(host, &[e], p, 0x5eed, &mut |vals, names, value| {
            let v = value[0];
            if v == 0 || v == p {
                let shown: Vec<String> =
                    names.iter().zip(vals).map(|(n, v)| format!("{n}={v}")).collect();
                return Err(format!("`{e}` vanishes or is undefined over F_{p} at {}", shown.join(", ")));
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Whether `b` is `a` with its variables renamed bijectively inside `pool`.
fn is_renaming(a: &FieldExpr, b: &FieldExpr, pool: &BTreeSet<String>) -> bool {
    let sa: Vec<String> = a.free_variables().into_iter().collect();
    let sb: Vec<String> = b.free_variables().into_iter().collect();
    if sa.len() != sb.len() || sa.len() > 7 || !sa.iter().chain(&sb).all(|v| pool.contains(v)) {
        return false;
    }
    let target = b.canonical();
    let mut perm: Vec<usize> = (0..sb.len()).collect();
    loop {
        let map: BTreeMap<&str, &str> =
            sa.iter().zip(&perm).map(|(x, &k)| (x.as_str(), sb[k].as_str())).collect();
        if a.substitute(&|n| map.get(n).map(|m| FieldExpr::var(*m))).canonical() == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Check that `source[map]` may be assumed inside `host`.
pub fn check_use(
    host: &InequalityStatement,
    source: &InequalityStatement,
    map: &BTreeMap<String, FieldExpr>,
) -> Result<(), String> {
    let image = |v: &str| map.get(v).cloned().unwrap_or_else(|| FieldExpr::var(v));
    let declared: BTreeSet<String> = host.declared_variables().into_iter().collect();
    let source_vars: BTreeSet<String> = source.declared_variables().into_iter().collect();
    if let Some(extra) = map.keys().find(|k| !source_vars.contains(*k)) {
        return Err(format!("`{extra}` is not a variable of the source"));
    }
    for v in &source_vars {
        let e = image(v);
        if let Some(u) = e.free_variables().iter().find(|u| !declared.contains(*u)) {
            return Err(format!("`{v}` ↦ `{e}` uses undeclared `{u}`"));
        }
    }
    for g in &source.groups {
        if g.nonzero {
            for v in &g.names {
                never_zero(host, &image(v)).map_err(|m| format!("nonzero `{v}`: {m}"))?;
            }
        }
        if !g.is_independent_family() {
            continue;
        }
        let images: Vec<FieldExpr> = g.names.iter().map(|v| image(v)).collect();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (v, e) in g.names.iter().zip(&images) {
            for u in e.free_variables() {
                if !seen.insert(u.clone()) {
                    return Err(format!("independent `{v}` ↦ `{e}` shares `{u}` with another image"));
                }
            }
        }
        let families: BTreeSet<usize> = seen
            .iter()
            .map(|u| {
                host.groups
                    .iter()
                    .position(|hg| hg.names.contains(u) && hg.is_independent_family())
                    .ok_or_else(|| format!("`{u}` is not in an independent family of the host"))
            })
            .collect::<Result<_, _>>()?;
        if families.len() > 1 {
            return Err(format!(
                "images of the independent family {} span several host families",
                g.names.join(", ")
            ));
        }
        if g.iid {
            let Some(&f) = families.iter().next() else { continue };
            let hg = &host.groups[f];
            if !hg.iid {
                return Err(format!("iid family {} maps into a non-iid family", g.names.join(", ")));
            }
            let pool: BTreeSet<String> = hg.names.iter().cloned().collect();
            for (v, e) in g.names.iter().zip(&images).skip(1) {
                if !is_renaming(&images[0], e, &pool) {
                    return Err(format!(
                        "iid `{v}` ↦ `{e}` is not identically distributed with `{}`",
                        images[0]
                    ));
                }
            }
        }
    }
    for g in &source.nonzero_exprs {
        let e = g.substitute(&|n| map.get(n).cloned());
        never_zero(host, &e).map_err(|m| format!("given `{g} != 0`: {m}"))?;
    }
    for h in &source.hypotheses {
        let inst = instantiate(h, map);
        let form = inst.objective();
        if !host
            .hypotheses
            .iter()
            .any(|hh| hh.relation == inst.relation && hh.objective() == form)
        {
            return Err(format!("assumption `{inst}` is not among the host's"));
        }
    }
    Ok(())
}

fn parse_map(use_: &LemmaUse) -> Result<BTreeMap<String, FieldExpr>, String> {
    use_.substitution
        .iter()
        .map(|(v, e)| {
            parse_expression(e)
                .map(|x| (v.clone(), x))
                .map_err(|err| format!("substitution `{v} ↦ {e}`: {err}"))
        })
        .collect()
}

/// Prove every step in order.
pub fn run_derivation(d: &Derivation, options: &ElaborateOptions) -> DerivationReport {
    let mut proved: BTreeMap<String, (InequalityStatement, bool)> = BTreeMap::new();
    let mut steps = Vec::new();
    for step in &d.steps {
        let (report, parsed) = run_step(step, &proved, options);
        let ok = matches!(report.status, StepStatus::Proved { .. });
        if let Some(s) = parsed {
            proved.insert(step.name.clone(), (s, ok));
        }
        steps.push(report);
    }
    DerivationReport { steps }
}

fn run_step(
    step: &DerivationStep,
    proved: &BTreeMap<String, (InequalityStatement, bool)>,
    options: &ElaborateOptions,
) -> (StepReport, Option<InequalityStatement>) {
    let fail = |status: StepStatus, elaborated: String| StepReport {
        name: step.name.clone(),
        elaborated,
        status,
        proof: None,
    };
    let base = match parse_statement(&step.statement) {
        Ok(s) => s,
        Err(e) => {
            let st = StepStatus::Error { detail: e.to_string() };
            return (fail(st, step.statement.clone()), None);
        }
    };
    let mut host = base.clone();
    for u in &step.uses {
        let Some((source, ok)) = proved.get(&u.source) else {
            let st = StepStatus::Error { detail: format!("unknown source step `{}`", u.source) };
            return (fail(st, step.statement.clone()), Some(base));
        };
        if !ok {
            let st = StepStatus::Unjustified { source: u.source.clone() };
            return (fail(st, step.statement.clone()), Some(base));
        }
        let checked = parse_map(u).and_then(|map| {
            check_use(&base, source, &map).map(|_| instantiate(&conclusion_of(source), &map))
        });
        match checked {
            Ok(h) => host.hypotheses.push(h),
            Err(detail) => {
                let st = StepStatus::InvalidUse { detail: format!("{}: {detail}", u.source) };
                return (fail(st, step.statement.clone()), Some(base));
            }
        }
    }
    let elaborated = host.to_string();
    let report = match prove_statement(&host, options) {
        Ok(proof) => {
            let status = match (&proof.outcome, proof.is_proved()) {
                (ProofOutcome::Proved { .. }, true) => StepStatus::Proved {
                    certificate_entries: proof.outcome.certificate().map_or(0, |c| c.len())
                        + proof
                            .reverse
                            .as_ref()
                            .and_then(|r| r.1.certificate())
                            .map_or(0, |c| c.len()),
                },
                _ => StepStatus::NotShannonProvable,
            };
            StepReport {
                name: step.name.clone(),
                elaborated,
                status,
                proof: Some(proof),
            }
        }
        Err(e) => fail(StepStatus::Error { detail: e.to_string() }, elaborated),
    };
    (report, Some(base))
}
