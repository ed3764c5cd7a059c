use serde::Serialize;
use serde_json::json;
use sumprod_core::dist::{
    evaluate_statement, falsify as run_falsify, tuple_entropy, FalsifyOptions, FiniteFieldSpec, JointFile,
};
use sumprod_core::expr::{parse_expression, parse_statement, InequalityStatement};
use sumprod_core::prover::{prove_statement, run_suite, ElaborateOptions, ProofOutcome};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{resolve_output, write_file};
use crate::{EntropyArgs, FalsifyArgs, ProveArgs};

pub const EXIT_NOT_PROVABLE: u8 = 2;
pub const EXIT_COUNTEREXAMPLE: u8 = 3;

fn parse(text: &str) -> Result<InequalityStatement, CliError> {
    parse_statement(text).map_err(|error| CliError::Parse { text: text.into(), error })
}

/// Pretty JSON to `out` (resolved against the output root) or stdout.
pub fn emit<T: Serialize>(value: &T, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(value).map_err(|e| CliError::json("output", e))? + "\n";
    match out {
        Some(p) => write_file(&resolve_output(p), body.as_bytes()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn prove(mut a: ProveArgs, config: &Config) -> Result<u8, CliError> {
    let section = config.section("prove", &["cap", "seed"])?;
    section.fill(&mut a.cap, "cap")?;
    section.fill(&mut a.seed, "seed")?;
    let defaults = ElaborateOptions::default();
    let options = ElaborateOptions { cap: a.cap.unwrap_or(defaults.cap), seed: a.seed.unwrap_or(defaults.seed) };

    if let Some(name) = &a.suite {
        if name != "standard" {
            return Err(CliError::Usage(format!("unknown suite `{name}` (available: standard)")));
        }
        if a.statement.is_some() || a.file.is_some() {
            return Err(CliError::Usage("--suite takes no statement".into()));
        }
        let report = run_suite(&options);
        eprint!("{}", report.to_table());
        emit(&report, a.out.as_deref())?;
        let errors = report.items.iter().any(|i| i.status == sumprod_core::prover::ItemStatus::Error);
        return Ok(if errors { 1 } else if report.all_proved() { 0 } else { EXIT_NOT_PROVABLE });
    }

    let text = match (&a.statement, &a.file) {
        (Some(s), None) => s.clone(),
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?.trim().to_string(),
        _ => return Err(CliError::Usage("give exactly one of a statement, --file or --suite".into())),
    };
    let statement = parse(&text)?;
    let proof = prove_statement(&statement, &options)?;
    let half = |o: &ProofOutcome| match o {
        ProofOutcome::Proved { certificate } => json!({"status": "proved", "certificate": certificate}),
        ProofOutcome::NotShannonProvable { witness } => json!({"status": "not-shannon-provable", "witness": witness}),
    };
    let proved = proof.is_proved();
    let verified = proved && proof.verify();
    let result = json!({
        "statement": statement.to_string(),
        "status": if proved { "proved" } else { "not-shannon-provable" },
        "verified": verified,
        "forward": half(&proof.outcome),
        "reverse": proof.reverse.as_ref().map(|r| half(&r.1)),
    });
    emit(&result, a.out.as_deref())?;
    if proved && !verified {
        return Err(CliError::Usage("certificate failed independent verification".into()));
    }
    Ok(if proved { 0 } else { EXIT_NOT_PROVABLE })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("bad {what} `{s}`"))))
        .collect()
}

pub fn falsify(mut a: FalsifyArgs, config: &Config) -> Result<u8, CliError> {
    let section = config.section("falsify", &["trials", "fields", "seed"])?;
    section.fill(&mut a.trials, "trials")?;
    section.fill(&mut a.fields, "fields")?;
    section.fill(&mut a.seed, "seed")?;
    let statement = parse(&a.statement)?;
    let defaults = FalsifyOptions::default();
    let options = FalsifyOptions {
        trials: a.trials.unwrap_or(defaults.trials),
        fields: match &a.fields {
            Some(f) => parse_list(f, "field")?,
            None => defaults.fields.clone(),
        },
        seed: a.seed.unwrap_or(defaults.seed),
        limits: defaults.limits,
    };
    match run_falsify(&statement, &options)? {
        Some(cx) => {
            emit(&cx, a.out.as_deref())?;
            Ok(EXIT_COUNTEREXAMPLE)
        }
        None => {
            match &a.out {
                Some(p) => write_file(&resolve_output(p), b"none\n")?,
                None => println!("none"),
            }
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct EntropyLine {
    expr: String,
    bits: f64,
    error_bound: f64,
}

pub fn entropy(a: EntropyArgs) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(&a.joint).map_err(|e| CliError::io(&a.joint, e))?;
    let file: JointFile = serde_json::from_str(&text).map_err(|e| CliError::json(a.joint.display().to_string(), e))?;
    let p = a.field.or(file.field).ok_or_else(|| CliError::Usage("no field: pass --field".into()))?;
    let field = FiniteFieldSpec::new(p)?;
    let joint = file.to_joint()?;
    let mut lines = Vec::new();
    for tuple in &a.exprs {
        let exprs = tuple
            .split(',')
            .map(|e| parse_expression(e).map_err(|error| CliError::Parse { text: e.into(), error }))
            .collect::<Result<Vec<_>, _>>()?;
        let v = tuple_entropy(&joint, &exprs, field)?;
        lines.push(EntropyLine { expr: tuple.clone(), bits: v.bits, error_bound: v.error_bound });
    }
    let statement = match &a.statement {
        Some(s) => {
            let st = parse(s)?;
            let ev = evaluate_statement(&st, &joint, field)?;
            Some(json!({
                "statement": st.to_string(),
                "slack": ev.slack,
                "error_bound": ev.error_bound,
                "hypotheses_hold": ev.hypotheses_hold,
                "violated": ev.is_violation(),
            }))
        }
        None => None,
    };
    emit(&json!({"field": p, "entropies": lines, "statement": statement}), None)?;
    Ok(0)
}
