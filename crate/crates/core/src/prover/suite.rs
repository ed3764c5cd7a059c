//! The standard library of sum-product entropy statements, each run through
//! the prover with certificates re-verified.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    prove_statement, run_derivation, Certificate, Derivation, DerivationReport, DerivationStep,
    ElaborateOptions, LemmaUse, ProofOutcome, StepStatus,
};
use crate::expr::parse_statement;

#[derive(Debug, Clone)]
pub enum Route {
    /// One LP over the statement's own ground set.
    Direct(String),
    /// A chain of LP steps composed through checked lemma uses.
    Derived(Derivation),
}

#[derive(Debug, Clone)]
pub struct SuiteItem {
    pub key: &'static str,
    pub title: &'static str,
    pub route: Route,
    /// Independent second derivation, reported alongside the main route.
    pub alternate: Option<Derivation>,
}

impl SuiteItem {
    /// The statement this item establishes.
    pub fn statement(&self) -> &str {
        match &self.route {
            Route::Direct(s) => s,
            Route::Derived(d) => d.conclusion(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Proved,
    NotShannonProvable,
    Error,
}

impl ItemStatus {
    fn label(self) -> &'static str {
        match self {
            ItemStatus::Proved => "proved",
            ItemStatus::NotShannonProvable => "not-shannon-provable",
            ItemStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemReport {
    pub key: String,
    pub title: String,
    pub statement: String,
    pub status: ItemStatus,
    /// Every certificate involved passed the independent recombination check.
    pub verified: bool,
    pub ground_size: Option<usize>,
    pub certificate_entries: usize,
    pub seconds: f64,
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate: Option<DerivationReport>,
}

impl ItemReport {
    pub fn is_proved(&self) -> bool {
        self.status == ItemStatus::Proved && self.verified
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub items: Vec<ItemReport>,
    pub proved: usize,
    pub total: usize,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn all_proved(&self) -> bool {
        self.proved == self.total
    }

    pub fn item(&self, key: &str) -> Option<&ItemReport> {
        self.items.iter().find(|i| i.key == key)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:<21} {:>8} {:>7} {:>8}  alternate",
            "item", "status", "verified", "entries", "seconds"
        );
        for i in &self.items {
            let alt = match &i.alternate {
                None => "-".to_string(),
                Some(d) if d.is_proved() => "proved".to_string(),
                Some(d) => match d.first_failure() {
                    Some(f) => format!("failed at {}", f.name),
                    None => "failed".to_string(),
                },
            };
            let _ = writeln!(
                out,
                "{:<22} {:<21} {:>8} {:>7} {:>8.2}  {}",
                i.key,
                i.status.label(),
                if i.verified { "yes" } else { "no" },
                i.certificate_entries,
                i.seconds,
                alt
            );
        }
        let _ = writeln!(out, "{}/{} proved in {:.1}s", self.proved, self.total, self.seconds);
        out
    }
}

fn step(name: &str, statement: &str, uses: Vec<LemmaUse>) -> DerivationStep {
    DerivationStep::new(name, statement, uses)
}

fn lemma(source: &str, substitution: &[(&str, &str)]) -> LemmaUse {
    LemmaUse::new(source, substitution)
}

fn direct(key: &'static str, title: &'static str, statement: &str) -> SuiteItem {
    SuiteItem {
        key,
        title,
        route: Route::Direct(statement.to_string()),
        alternate: None,
    }
}

const RING_PLUS: &str = "H(A*B+C*D) <= 5 H(A*B) + 3 H(A+B) - 7 H(A) where A, B, C, D iid nonzero \
     using C*D, A*(B-D), (A+C)*D, B-D, A+C, A*D, A+D";

/// Three-variable products with `m = 3` factors and `n = 2` summands, built
/// from independent-variable lemmas instantiated at products.
fn ring_general_derivation() -> Derivation {
    Derivation {
        steps: vec![
            step(
                "ring-first-step",
                "H(A*B-C*D) + H(C) + H(D) <= H(C*D) + H(A*(B+D)) + H((A+C)*D) \
                 where A, B, C, D indep nonzero using A*B",
                vec![],
            ),
            step(
                "distributive",
                "H(A*(B+C)) + H(B) + H(C) <= H(B+C) + H(A*B, A*C) where A, B, C indep nonzero",
                vec![],
            ),
            step(
                "product-triangle",
                "H(A*B*C) + H(B) <= H(A*B) + H(B*C) where A, B, C indep nonzero",
                vec![],
            ),
            step("ring-plus", RING_PLUS, vec![]),
            step(
                "triple-product",
                "H(A1*A2*A3) <= H(A1) + 2 log L where A1, A2, A3 iid nonzero \
                 assuming H(A1*A2) <= H(A1) + log L",
                vec![lemma("product-triangle", &[("A", "A1"), ("B", "A2"), ("C", "A3")])],
            ),
            step(
                "left-factor",
                "H(A1*A2*(A3+B3)) + 2 H(A1) <= H(A1+A2) + 2 H(A1*A2*A3) \
                 where A1, A2, A3, B3 iid nonzero",
                vec![lemma("distributive", &[("A", "A1*A2"), ("B", "A3"), ("C", "B3")])],
            ),
            step(
                "right-factor",
                "H((A1*A2+B1*B2)*B3) + 2 H(A1*A2) <= H(A1*A2+B1*B2) + 2 H(A1*A2*A3) \
                 where A1, A2, A3, B1, B2, B3 iid nonzero",
                vec![lemma("distributive", &[("A", "B3"), ("B", "A1*A2"), ("C", "B1*B2")])],
            ),
            step(
                "conclusion",
                "H(A1*A2*A3 - B1*B2*B3) <= H(A1) + 11 log L + 4 log K \
                 where A1, A2, A3, B1, B2, B3 iid nonzero \
                 assuming H(A1+A2) <= H(A1) + log K assuming H(A1*A2) <= H(A1) + log L",
                vec![
                    lemma(
                        "ring-first-step",
                        &[("A", "A1*A2"), ("B", "A3"), ("C", "B1*B2"), ("D", "B3")],
                    ),
                    lemma("left-factor", &[]),
                    lemma("right-factor", &[]),
                    lemma("triple-product", &[]),
                    lemma("ring-plus", &[("A", "A1"), ("B", "A2"), ("C", "B1"), ("D", "B2")]),
                ],
            ),
        ],
    }
}

/// The split of a slope bound into a multiplicative triangle inequality and
/// two distributive steps. `sign` is `"-"` or `"+"`.
fn slope_product_split(sign: &str, conclusion: &str) -> Derivation {
    let e = format!("A{sign}B");
    let f = format!("C{sign}D");
    Derivation {
        steps: vec![
            step(
                "multiplicative-triangle",
                "H(E/F) + H(X, E, F) <= H(E, F) + H(E*X, F*X) where E, F, X nonzero",
                vec![],
            ),
            step(
                "distributive",
                &format!(
                    "H(X*(A{sign}B)) + H(X, A, B) <= H(X, A{sign}B) + H(A*X, B*X) where A, B; X nonzero"
                ),
                vec![],
            ),
            step(
                "conclusion",
                conclusion,
                vec![
                    lemma("multiplicative-triangle", &[("E", &e), ("F", &f), ("X", "X")]),
                    lemma("distributive", &[("A", "A"), ("B", "B"), ("X", "X")]),
                    lemma("distributive", &[("A", "C"), ("B", "D"), ("X", "X")]),
                ],
            ),
        ],
    }
}

/// The quotient analogue: triangle inequality through division by `A` and
/// a distributive step for `(C ± D)/A`.
fn slope_quotient_split(sign: &str, conclusion: &str) -> Derivation {
    let e = format!("A{sign}B");
    let f = format!("C{sign}D");
    Derivation {
        steps: vec![
            step(
                "quotient-triangle",
                "H(E/F) + H(A, E, F) <= H(E, F) + H(E/A, F/A) where E, F, A nonzero",
                vec![],
            ),
            step(
                "distributive",
                &format!(
                    "H((C{sign}D)/A) + H(A, C, D) <= H(A, C{sign}D) + H(C/A, D/A) where C, D; A nonzero"
                ),
                vec![],
            ),
            step(
                "conclusion",
                conclusion,
                vec![
                    lemma("quotient-triangle", &[("E", &e), ("F", &f), ("A", "A")]),
                    lemma("distributive", &[("A", "A"), ("C", "C"), ("D", "D")]),
                ],
            ),
        ],
    }
}

fn slope_product_bound(sign: &str) -> String {
    format!(
        "H((A{sign}B)/(C{sign}D)) + 5 H(A) <= 4 H(A*B) + 2 H(A{sign}B) where A, B, C, D, X iid nonzero \
         using A*X, B*X, C*X, D*X, C{sign}D \
         identity (A*X{sign}B*X)/(C*X{sign}D*X) = (A{sign}B)/(C{sign}D)"
    )
}

fn slope_quotient_bound(sign: &str) -> String {
    format!(
        "H((A{sign}B)/(C{sign}D)) + 4 H(A) <= 3 H(A/B) + 2 H(A{sign}B) where A, B, C, D iid nonzero \
         using B/A, C/A, D/A, C{sign}D \
         identity (1{sign}B/A)/(C/A{sign}D/A) = (A{sign}B)/(C{sign}D)"
    )
}

/// The twenty statements of the library, in a fixed order.
pub fn suite_items() -> Vec<SuiteItem> {
    let mut items = vec![
        direct(
            "triangle",
            "difference triangle inequality",
            "H(A-B) + H(X, A, B) <= H(A+X, B+X) + H(A, B) where A, B, X",
        ),
        direct(
            "triangle-indep",
            "difference triangle inequality, independent",
            "H(A-B) + H(X) <= H(A+X) + H(B+X) where A, B, X indep",
        ),
        direct(
            "triangle-iid",
            "difference triangle inequality, iid",
            "H(A-B) + H(A) <= 2 H(A+B) where A, B, X iid using A+X, B+X",
        ),
        direct(
            "sum-triple",
            "three-fold sum inequality",
            "H(A+B+C) + H(A, B, C) <= H(A+B, C) + H(A, B+C) where A, B, C",
        ),
        direct(
            "sum-triple-indep",
            "three-fold sum inequality, independent",
            "H(A+B+C) + H(B) <= H(A+B) + H(B+C) where A, B, C indep",
        ),
        direct(
            "sum-triple-iid",
            "three-fold sum inequality, iid",
            "H(A+B+C) + H(A) <= 2 H(A+B) where A, B, C iid using B+C",
        ),
        direct(
            "sum-iterated",
            "iterated sum bound, three summands",
            "H(X+Y1+Y2+Y3) <= H(X) + log K1 + log K2 + log K3 where X, Y1, Y2, Y3 indep \
             using X+Y1+Y2, X+Y1, Y1+Y2 \
             assuming H(X+Y1) <= H(X) + log K1 assuming H(X+Y2) <= H(X) + log K2 \
             assuming H(X+Y3) <= H(X) + log K3",
        ),
        direct(
            "distributive-plus",
            "sum inside a product",
            "H(A*(B+C)) <= 2 H(A*B) + H(A+B) - 2 H(A) where A, B, C iid nonzero using B+C, A*C",
        ),
        direct(
            "distributive-minus",
            "difference inside a product",
            "H(A*(B-C)) <= 2 H(A*B) + H(A-B) - 2 H(A) where A, B, C iid nonzero using B-C, A*C",
        ),
        direct(
            "ring-minus",
            "difference of two products",
            "H(A*B-C*D) <= 5 H(A*B) + 2 H(A+B) - 6 H(A) where A, B, C, D iid nonzero \
             using C*D, A*(B+D), (A+C)*D, B+D, A+C, A*D",
        ),
        direct("ring-plus", "sum of two products", RING_PLUS),
        SuiteItem {
            key: "ring-general-3x2",
            title: "difference of two triple products",
            route: Route::Derived(ring_general_derivation()),
            alternate: None,
        },
        direct(
            "slope-lemma-1",
            "slope through a common factor, difference",
            "H((A-B)/(C-D)) + H(X, A, B, C, D) <= H(A-B, C-D) + H(A*X, B*X, C*X, D*X) \
             where A, B, C, D; X nonzero given C-D != 0 \
             identity (A*X-B*X)/(C*X-D*X) = (A-B)/(C-D)",
        ),
        direct(
            "slope-lemma-2",
            "slope through a common factor, sum",
            "H((A+B)/(C+D)) + H(X, A, B, C, D) <= H(A+B, C+D) + H(A*X, B*X, C*X, D*X) \
             where A, B, C, D; X nonzero given C+D != 0 \
             identity (A*X+B*X)/(C*X+D*X) = (A+B)/(C+D)",
        ),
        direct(
            "slope-lemma-3",
            "slope through ratios, difference",
            "H((A-B)/(C-D)) + H(A, B, C, D) <= H(A-B, C-D) + H(B/A, C/A, D/A) \
             where A nonzero; B, C, D given C-D != 0 \
             identity (1-B/A)/(C/A-D/A) = (A-B)/(C-D)",
        ),
        direct(
            "slope-lemma-4",
            "slope through ratios, sum",
            "H((A+B)/(C+D)) + H(A, B, C, D) <= H(A+B, C+D) + H(B/A, C/A, D/A) \
             where A nonzero; B, C, D given C+D != 0 \
             identity (1+B/A)/(C/A+D/A) = (A+B)/(C+D)",
        ),
    ];
    for (key, title, sign, product) in [
        ("slope-bound-1", "iid slope bound by products, difference", "-", true),
        ("slope-bound-2", "iid slope bound by products, sum", "+", true),
        ("slope-bound-3", "iid slope bound by ratios, difference", "-", false),
        ("slope-bound-4", "iid slope bound by ratios, sum", "+", false),
    ] {
        let statement = if product {
            slope_product_bound(sign)
        } else {
            slope_quotient_bound(sign)
        };
        let alternate = if product {
            slope_product_split(sign, &statement)
        } else {
            slope_quotient_split(sign, &statement)
        };
        items.push(SuiteItem {
            key,
            title,
            route: Route::Direct(statement),
            alternate: Some(alternate),
        });
    }
    items
}

fn run_direct(text: &str, options: &ElaborateOptions) -> (ItemStatus, bool, Option<usize>, usize, Option<Certificate>, Option<String>) {
    let s = match parse_statement(text) {
        Ok(s) => s,
        Err(e) => return (ItemStatus::Error, false, None, 0, None, Some(e.to_string())),
    };
    match prove_statement(&s, options) {
        Ok(proof) => {
            let n = Some(proof.instance.n());
            if proof.is_proved() {
                let cert = proof.outcome.certificate().cloned();
                let entries = cert.as_ref().map_or(0, |c| c.len());
                (ItemStatus::Proved, proof.verify(), n, entries, cert, None)
            } else {
                let detail = match &proof.outcome {
                    ProofOutcome::NotShannonProvable { witness } => Some(format!(
                        "polymatroid witness with objective {}",
                        witness.objective
                    )),
                    _ => Some("reverse direction not provable".into()),
                };
                (ItemStatus::NotShannonProvable, false, n, 0, None, detail)
            }
        }
        Err(e) => (ItemStatus::Error, false, None, 0, None, Some(e.to_string())),
    }
}

fn derivation_status(d: &DerivationReport) -> (ItemStatus, Option<String>) {
    if d.is_proved() {
        return (ItemStatus::Proved, None);
    }
    let Some(f) = d.first_failure() else {
        return (ItemStatus::Error, Some("empty derivation".into()));
    };
    match &f.status {
        StepStatus::NotShannonProvable => (
            ItemStatus::NotShannonProvable,
            Some(format!("step {} is not Shannon-provable", f.name)),
        ),
        StepStatus::InvalidUse { detail } => {
            (ItemStatus::Error, Some(format!("step {}: {detail}", f.name)))
        }
        StepStatus::Unjustified { source } => (
            ItemStatus::Error,
            Some(format!("step {} relies on unproved {source}", f.name)),
        ),
        StepStatus::Error { detail } => (ItemStatus::Error, Some(format!("step {}: {detail}", f.name))),
        StepStatus::Proved { .. } => unreachable!("first failure is not proved"),
    }
}

pub fn run_item(item: &SuiteItem, options: &ElaborateOptions) -> ItemReport {
    let start = Instant::now();
    let mut report = ItemReport {
        key: item.key.to_string(),
        title: item.title.to_string(),
        statement: item.statement().to_string(),
        status: ItemStatus::Error,
        verified: false,
        ground_size: None,
        certificate_entries: 0,
        seconds: 0.0,
        detail: None,
        certificate: None,
        derivation: None,
        alternate: None,
    };
    match &item.route {
        Route::Direct(text) => {
            let (status, verified, n, entries, cert, detail) = run_direct(text, options);
            report.status = status;
            report.verified = verified;
            report.ground_size = n;
            report.certificate_entries = entries;
            report.certificate = cert;
            report.detail = detail;
        }
        Route::Derived(d) => {
            let dr = run_derivation(d, options);
            let (status, detail) = derivation_status(&dr);
            report.status = status;
            report.verified = dr.verify();
            report.ground_size = dr
                .steps
                .iter()
                .filter_map(|s| s.proof.as_ref().map(|p| p.instance.n()))
                .max();
            report.certificate_entries = dr.certificate_entries();
            report.detail = detail;
            report.derivation = Some(dr);
        }
    }
    if let Some(alt) = &item.alternate {
        report.alternate = Some(run_derivation(alt, options));
    }
    report.seconds = start.elapsed().as_secs_f64();
    report
}

/// Run every item (in parallel) and re-verify each certificate.
pub fn run_suite(options: &ElaborateOptions) -> SuiteReport {
    let start = Instant::now();
    let items: Vec<ItemReport> = suite_items().par_iter().map(|i| run_item(i, options)).collect();
    let proved = items.iter().filter(|i| i.is_proved()).count();
    SuiteReport {
        total: items.len(),
        proved,
        items,
        seconds: start.elapsed().as_secs_f64(),
    }
}
