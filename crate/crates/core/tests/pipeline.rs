use sumprod_core::dist::{evaluate_statement, falsify, FalsifyOptions, FiniteFieldSpec, JointFile};
use sumprod_core::expr::parse_statement;
use sumprod_core::lab::*;
use sumprod_core::prover::{check_certificate, prove_statement, run_item, suite_items, ElaborateOptions, ProofOutcome};

#[test]
fn proved_statements_survive_falsification() {
    for text in [
        "H(A+B) <= H(A,B) where A, B",
        "H(A-C) + H(B) <= H(A-B) + H(B-C) where A, B, C indep",
        "H(A+B+C) + H(A) <= 2 H(A+B) where A, B, C iid",
    ] {
        let s = parse_statement(text).unwrap();
        let proof = prove_statement(&s, &ElaborateOptions::default()).unwrap();
        assert!(proof.is_proved() && proof.verify(), "{text}");
        let options = FalsifyOptions { trials: 300, ..Default::default() };
        assert!(falsify(&s, &options).unwrap().is_none(), "{text}");
    }
}

#[test]
fn certificates_survive_json() {
    let s = parse_statement("H(A,B) + H(B,C) >= H(A,B,C) + H(B) where A, B, C").unwrap();
    let proof = prove_statement(&s, &ElaborateOptions::default()).unwrap();
    let ProofOutcome::Proved { certificate } = &proof.outcome else { panic!("not proved") };
    let text = serde_json::to_string(certificate).unwrap();
    let back = serde_json::from_str(&text).unwrap();
    assert!(check_certificate(&back, &proof.instance));
}

#[test]
fn counterexamples_reload_and_still_violate() {
    let s = parse_statement("H(A+B) <= H(A) where A, B iid").unwrap();
    let cx = falsify(&s, &FalsifyOptions { trials: 200, fields: vec![7], seed: 9, ..Default::default() })
        .unwrap()
        .expect("planted statement is false");
    let file: JointFile = serde_json::from_str(&serde_json::to_string(&cx).unwrap()).unwrap();
    let joint = file.to_joint().unwrap();
    let ev = evaluate_statement(&s, &joint, FiniteFieldSpec::new(7).unwrap()).unwrap();
    assert!(ev.is_violation());
    assert!((ev.slack - cx.slack).abs() < 1e-12);
}

#[test]
fn a_suite_item_runs_standalone() {
    let item = suite_items().into_iter().find(|i| i.key == "triangle").unwrap();
    let report = run_item(&item, &ElaborateOptions::default());
    assert!(report.is_proved() && report.verified);
}

#[test]
fn lab_pipeline_from_file_to_report() {
    let a = random_frostman_set(0.6, 12, 7).unwrap();
    let a = GridSet::from_json(&a.to_json(true)).unwrap();
    assert!(sigma_report(&a, 0.6).pass);
    let row = scale_row(&a, &ExperimentOptions { slope: true, ..Default::default() }).unwrap();
    assert_eq!(row.size, a.len());
    assert!(row.n_sum >= 2 * a.len() - 1);
    assert!(row.implied_log_k.is_some_and(|k| k.is_finite() && k <= 10.0));
    let mu = uniform_measure(&a).unwrap();
    assert!((row.h_mu - (a.len() as f64).log2()).abs() < 1e-12);
    assert!(row.h_sum >= row.h_mu - 1.0 && mu.total_mass() > 0.999_999);
}

#[test]
fn covering_counts_bound_entropies() {
    // H_n of a pushforward never exceeds log of the covering count of its support.
    for fam in [SetFamily::Digit { sigma: 0.5 }, SetFamily::Cantor, SetFamily::Full] {
        let row = scale_row(&fam.generate(10).unwrap(), &ExperimentOptions::default()).unwrap();
        let lg = |x: usize| (x as f64).log2();
        assert!(row.h_sum <= lg(row.n_sum) + 1e-9);
        assert!(row.h_diff <= lg(row.n_diff) + 1e-9);
        // guard-bit products may straddle the rounding of the cover by one cell
        assert!(row.h_prod <= lg(row.n_prod) + 1.0);
        assert!(row.h_quot <= lg(row.n_quot) + 1.0);
    }
}
