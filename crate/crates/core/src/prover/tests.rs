use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::dist::{falsify, FalsifyOptions};
use crate::expr::{parse_expression, parse_statement, FieldExpr, InequalityStatement};
use crate::Rational;

fn st(s: &str) -> InequalityStatement {
    parse_statement(s).unwrap()
}

fn ex(s: &str) -> FieldExpr {
    parse_expression(s).unwrap()
}

fn instance(s: &str) -> ProblemInstance {
    elaborate(&st(s)).unwrap()
}

fn proved(s: &str) -> (ProblemInstance, Certificate) {
    let pi = instance(s);
    match prove(&pi).unwrap() {
        ProofOutcome::Proved { certificate } => (pi, certificate),
        other => panic!("{s}: {other:?}"),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn elemental_counts() {
    assert_eq!(elemental_inequalities(2, DEFAULT_CAP).unwrap().len(), 3);
    assert_eq!(elemental_inequalities(3, DEFAULT_CAP).unwrap().len(), 9);
    for n in 2..10 {
        let expected = n + binomial(n, 2) * (1 << (n - 2));
        assert_eq!(elemental_inequalities(n, DEFAULT_CAP).unwrap().len(), expected, "n={n}");
    }
}

#[test]
fn sixteen_variables_refused() {
    assert_eq!(
        elemental_inequalities(16, DEFAULT_CAP),
        Err(ProverError::TooManyVariables { count: 16, cap: 16 })
    );
    assert!(elemental_inequalities(15, DEFAULT_CAP).is_ok());
    let names: Vec<String> = (0..16).map(|i| format!("V{i}")).collect();
    let s = format!("H({}) >= 0 where {}", names.join(", "), names.join(", "));
    assert!(matches!(elaborate(&st(&s)), Err(ProverError::TooManyVariables { .. })));
}

#[test]
fn submodularity_has_unit_certificate() {
    let (pi, cert) = proved("H(A, B, C) + H(C) <= H(A, C) + H(B, C) where A, B, C");
    assert_eq!(cert.len(), 1);
    let (id, m) = &cert.entries[0];
    assert!(matches!(id, ConstraintId::Submodularity { .. }));
    assert!(m.is_one());
    assert!(check_certificate(&cert, &pi));
}

#[test]
fn perturbed_or_negated_certificates_fail() {
    let (pi, cert) = proved("H(A-B) + H(A) <= 2 H(A+B) where A, B, X iid using A+X, B+X");
    assert!(check_certificate(&cert, &pi));
    let tiny = Rational::new(1.into(), 1_000_000.into());
    for k in 0..cert.len() {
        let mut bumped = cert.clone();
        bumped.entries[k].1 += &tiny;
        assert!(!check_certificate(&bumped, &pi), "entry {k} perturbed");
    }
    let k = cert
        .entries
        .iter()
        .position(|(id, m)| !id.is_equality(&pi) && !m.is_zero())
        .expect("an inequality multiplier");
    let mut negated = cert.clone();
    negated.entries[k].1 = -negated.entries[k].1.clone();
    assert!(!check_certificate(&negated, &pi));
}

#[test]
fn certificate_round_trips_through_json() {
    let (pi, cert) = proved("H(A+B+C) + H(B) <= H(A+B) + H(B+C) where A, B, C indep");
    let text = serde_json::to_string(&cert).unwrap();
    assert!(text.contains("\"multiplier\""));
    let back: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert!(check_certificate(&back, &pi));
}

#[test]
fn false_statement_gets_polymatroid_witness() {
    let s = "2 H(A+B) <= H(A) + H(B) where A, B iid";
    let pi = instance(s);
    match prove(&pi).unwrap() {
        ProofOutcome::NotShannonProvable { witness } => {
            assert!(witness.satisfies(&pi));
            assert!(witness.objective < Rational::zero());
        }
        other => panic!("{other:?}"),
    }
    let opts = FalsifyOptions { trials: 500, seed: 1, ..FalsifyOptions::default() };
    assert!(falsify(&st(s), &opts).unwrap().is_some());
}

#[test]
fn trivial_statement_without_proof() {
    let pi = instance("H(A) <= 0 where A");
    assert!(!prove(&pi).unwrap().is_proved());
}

#[test]
fn triangle_ground_set_and_determinations() {
    let pi = instance("H(A-B) + H(A) <= 2 H(A+B) where A, B, X iid using A+X, B+X");
    let g = &pi.ground;
    let mut shown: Vec<String> = g.vars.iter().map(|v| v.expr.to_string()).collect();
    shown.sort();
    let mut expected: Vec<String> =
        ["A", "B", "X", "A+B", "A+X", "B+X", "A-B"].iter().map(|e| ex(e).canonical().to_string()).collect();
    expected.sort();
    assert_eq!(shown, expected);
    let target = g.index_of(&ex("A-B")).unwrap();
    let parents = |names: &[&str]| -> Vec<usize> {
        let mut v: Vec<usize> = names.iter().map(|n| g.index_of(&ex(n)).unwrap()).collect();
        v.sort_unstable();
        v
    };
    let has = |ps: Vec<usize>| g.determinations.iter().any(|d| d.target == target && d.parents == ps);
    assert!(has(parents(&["A+X", "B+X"])));
    assert!(has(parents(&["A", "B"])));
}

#[test]
fn ring_determination_is_found() {
    let pi = instance(
        "H(A*B-C*D) + H(C) + H(D) <= H(C*D) + H(A*(B+D)) + H((A+C)*D) \
         where A, B, C, D indep nonzero using A*B",
    );
    let g = &pi.ground;
    let target = g.index_of(&ex("A*B-C*D")).unwrap();
    let mut ps = vec![g.index_of(&ex("A*(B+D)")).unwrap(), g.index_of(&ex("(A+C)*D")).unwrap()];
    ps.sort_unstable();
    assert!(g.determinations.iter().any(|d| d.target == target && d.parents == ps));
}

#[test]
fn base_only_statement_has_no_derived_variables() {
    let pi = instance("H(A, B) <= H(A) + H(B) where A, B");
    assert_eq!(pi.ground.len(), 2);
    assert_eq!(pi.ground.base_count, 2);
}

#[test]
fn equality_statements_need_both_directions() {
    let p = prove_statement(&st("H(A, A+B) = H(A, B) where A, B"), &ElaborateOptions::default()).unwrap();
    assert!(p.is_proved());
    assert!(p.reverse.is_some());
    assert!(p.verify());
    let q = prove_statement(&st("H(A+B) = H(A, B) where A, B"), &ElaborateOptions::default()).unwrap();
    assert!(!q.is_proved());
}

#[test]
fn symbolic_slack_hypotheses() {
    let (pi, cert) = proved(
        "H(A+B+C) <= H(A) + log K + log L where A, B, C indep \
         assuming H(A+B) <= H(A) + log K assuming H(A+C) <= H(A) + log L",
    );
    assert!(cert.entries.iter().any(|(id, _)| matches!(id, ConstraintId::Hypothesis { .. })));
    assert!(check_certificate(&cert, &pi));
    let weaker = instance(
        "H(A+B+C) <= H(A) + log K where A, B, C indep \
         assuming H(A+B) <= H(A) + log K assuming H(A+C) <= H(A) + log L",
    );
    assert!(!prove(&weaker).unwrap().is_proved());
}

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, FieldExpr> {
    pairs.iter().map(|(v, e)| (v.to_string(), ex(e))).collect()
}

#[test]
fn lemma_use_rejections() {
    let source = st("H(A*B) + H(B) <= H(A) + 2 H(B) where A, B indep nonzero");
    let host = st("H(A) <= H(B) where A, B, C indep nonzero");
    assert!(check_use(&host, &source, &map(&[("A", "A*C"), ("B", "B")])).is_ok());
    let err = check_use(&host, &source, &map(&[("A", "A-B"), ("B", "C")])).unwrap_err();
    assert!(err.contains("nonzero"), "{err}");
    let err = check_use(&host, &source, &map(&[("A", "A*B"), ("B", "B")])).unwrap_err();
    assert!(err.contains("shares"), "{err}");
    let err = check_use(&host, &source, &map(&[("A", "Z"), ("B", "B")])).unwrap_err();
    assert!(err.contains("undeclared"), "{err}");

    let iid_source = st("H(A+B) >= H(A) where A, B iid");
    let iid_host = st("H(A) <= H(B) where A, B, C iid");
    assert!(check_use(&iid_host, &iid_source, &map(&[("A", "A*B"), ("B", "C*B")])).is_err());
    assert!(check_use(&iid_host, &iid_source, &map(&[("A", "A"), ("B", "C")])).is_ok());
    let split = st("H(A) <= H(B) where A, B indep; C");
    let err = check_use(&split, &iid_source, &map(&[("A", "A"), ("B", "C")])).unwrap_err();
    assert!(err.contains("independent family"), "{err}");

    let assumed = st("H(A+B) <= H(A) + log K where A, B iid assuming H(A+B) <= H(A) + log K");
    let bare = st("H(A) <= H(B) where A, B iid");
    assert!(check_use(&bare, &assumed, &BTreeMap::new()).unwrap_err().contains("assumption"));
    assert!(check_use(&assumed, &assumed, &BTreeMap::new()).is_ok());
}

#[test]
fn derivation_chains_lemmas() {
    let d = Derivation {
        steps: vec![
            DerivationStep::new(
                "pr",
                "H(A+B+C) + H(A) <= 2 H(A+B) where A, B, C iid using B+C",
                vec![],
            ),
            DerivationStep::new(
                "pr-scaled",
                "H(A+B+C) <= H(A) + 2 log K where A, B, C iid \
                 assuming H(A+B) <= H(A) + log K",
                vec![LemmaUse::new("pr", &[])],
            ),
        ],
    };
    let report = run_derivation(&d, &ElaborateOptions::default());
    assert!(report.is_proved(), "{:?}", report.first_failure());
    assert!(report.verify());

    let bad = Derivation {
        steps: vec![
            DerivationStep::new("inv", "H(1/A) <= H(A) where A nonzero", vec![]),
            DerivationStep::new(
                "use",
                "H(1/(A-B)) <= H(A-B) where A, B",
                vec![LemmaUse::new("inv", &[("A", "A-B")])],
            ),
        ],
    };
    let report = run_derivation(&bad, &ElaborateOptions::default());
    assert!(matches!(report.steps[1].status, StepStatus::InvalidUse { .. }));
}

#[test]
fn suite_has_twenty_distinct_items() {
    let items = suite_items();
    assert_eq!(items.len(), 20);
    let mut keys: Vec<&str> = items.iter().map(|i| i.key).collect();
    keys.sort_unstable();
    keys.dedup();
    assert_eq!(keys.len(), 20);
    for i in &items {
        assert!(parse_statement(i.statement()).is_ok(), "{}", i.key);
    }
}

#[test]
fn proved_statements_survive_falsification() {
    let statements = [
        "H(A-B) + H(X) <= H(A+X) + H(B+X) where A, B, X indep",
        "H(A+B+C) + H(A) <= 2 H(A+B) where A, B, C iid using B+C",
        "H(A*(B+C)) + H(B) + H(C) <= H(B+C) + H(A*B, A*C) where A, B, C indep nonzero",
    ];
    for s in statements {
        let (_, _) = proved(s);
        let opts = FalsifyOptions { trials: 2000, seed: 9, ..FalsifyOptions::default() };
        assert!(falsify(&st(s), &opts).unwrap().is_none(), "{s}");
    }
}

const EXTRAS: [&str; 6] = ["A*B", "A-X", "B*X", "A+B+X", "X-A", "A*A"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unused_ground_variables_keep_proofs(k in 0..EXTRAS.len(), j in 0..EXTRAS.len()) {
        let base = "H(A-B) + H(X) <= H(A+X) + H(B+X) where A, B, X indep";
        let extended = format!("{base} using {}, {}", EXTRAS[k], EXTRAS[j]);
        prop_assert!(prove(&instance(base)).unwrap().is_proved());
        let pi = instance(&extended);
        let out = prove(&pi).unwrap();
        prop_assert!(out.is_proved());
        prop_assert!(check_certificate(out.certificate().unwrap(), &pi));
    }

    #[test]
    fn certificates_verify_for_scaled_submodularity(c in 1i64..20, d in 1i64..20) {
        let s = format!("{c}/{d} H(A, B) + {c}/{d} H(B, C) >= {c}/{d} H(A, B, C) + {c}/{d} H(B) where A, B, C");
        let (pi, cert) = proved(&s);
        prop_assert!(check_certificate(&cert, &pi));
        prop_assert_eq!(cert.len(), 1);
        prop_assert_eq!(&cert.entries[0].1, &Rational::new(c.into(), d.into()));
    }
}
