use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use sumprod_core::lab::{
    ap_gp_intersection_with, cantor_set, check_discretised_slope_inequality, digit_restricted_set,
    discretise, free_positions, random_frostman_set, scale_row, sigma_report, theorem_a_experiment,
    ExperimentOptions, GridSet, SetFamily, DEFAULT_GUARD,
};

use crate::config::Config;
use crate::error::CliError;
use crate::logic_cmds::emit;
use crate::manifest::{render_summary, resolve_output, summarize, write_file, Run};
use crate::{ReportArgs, SetgenArgs, SlopeArgs, SumproductArgs};

const APGP_BLOCK: u32 = 4;

fn need<T: Copy>(v: Option<T>, flag: &str, generator: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{generator} needs --{flag}")))
}

fn read_set(path: &Path) -> Result<GridSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(GridSet::from_json(&text)?)
}

pub fn setgen(mut a: SetgenArgs, config: &Config) -> Result<u8, CliError> {
    let s = config.section("setgen", &["n", "sigma", "free", "depth", "t", "seed", "block"])?;
    s.fill(&mut a.n, "n")?;
    s.fill(&mut a.sigma, "sigma")?;
    s.fill(&mut a.free, "free")?;
    s.fill(&mut a.depth, "depth")?;
    s.fill(&mut a.t, "t")?;
    s.fill(&mut a.seed, "seed")?;
    s.fill(&mut a.block, "block")?;
    let g = a.generator.as_str();
    // target dimension for the accompanying Frostman report
    let (set, target) = match g {
        "full" => (GridSet::full(need(a.n, "n", g)?)?, 1.0),
        "digit" => {
            let n = need(a.n, "n", g)?;
            let free: Vec<u32> = match (&a.free, a.sigma) {
                (Some(f), _) => f
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse().map_err(|_| CliError::Usage(format!("bad position `{x}`"))))
                    .collect::<Result<_, _>>()?,
                (None, Some(sigma)) => free_positions(n, sigma)?,
                (None, None) => return Err(CliError::Usage("digit needs --sigma or --free".into())),
            };
            let dim = free.len() as f64 / n as f64;
            (digit_restricted_set(n, &free)?, dim)
        }
        "cantor" => {
            let n = need(a.n, "n", g)?;
            (cantor_set(a.depth.unwrap_or(n), n)?, 2f64.ln() / 3f64.ln())
        }
        "random" => {
            let sigma = need(a.sigma, "sigma", g)?;
            (random_frostman_set(sigma, need(a.n, "n", g)?, a.seed.unwrap_or(0))?, sigma)
        }
        "apgp" => {
            let t = need(a.t, "t", g)?;
            let (set, _) = ap_gp_intersection_with(t, need(a.n, "n", g)?, a.seed.unwrap_or(0), a.block.unwrap_or(APGP_BLOCK))?;
            (set, 2.0 * t - 1.0)
        }
        "discretise" => {
            let path = a.points.as_ref().ok_or_else(|| CliError::Usage("discretise needs --points".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let pts: Vec<f64> = serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))?;
            let set = discretise(&pts, need(a.n, "n", g)?)?;
            let dim = if set.n() == 0 { 0.0 } else { (set.len() as f64).log2() / set.n() as f64 };
            (set, dim)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown generator `{other}` (full, digit, cantor, random, apgp, discretise)"
            )))
        }
    };
    let report = sigma_report(&set, target);
    match &a.out {
        Some(p) => {
            let path = resolve_output(p);
            write_file(&path, (set.to_json(a.rle) + "\n").as_bytes())?;
            emit(&json!({"file": path.display().to_string(), "cells": set.len(), "sigma_report": report}), None)?;
        }
        None => emit(&json!({"set": set.to_file(a.rle), "sigma_report": report}), None)?,
    }
    Ok(0)
}

fn parse_scales(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("bad scale list `{text}`"));
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    let mut v: Vec<u32> = if let Some((lo, hi)) = text.split_once("..=") {
        (num(lo)?..=num(hi)?).collect()
    } else if let Some((lo, hi)) = text.split_once("..") {
        // both ends included: `8..14` reads as scales 8 through 14
        (num(lo)?..=num(hi)?).collect()
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?
    };
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

fn family(a: &SumproductArgs, name: &str) -> Result<SetFamily, CliError> {
    let need_f = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("family {name} needs --{flag}")));
    Ok(match name {
        "full" => SetFamily::Full,
        "digit" => SetFamily::Digit { sigma: need_f(a.sigma, "sigma")? },
        "cantor" => SetFamily::Cantor,
        "random" => SetFamily::RandomFrostman { sigma: need_f(a.sigma, "sigma")?, seed: a.seed.unwrap_or(0) },
        "apgp" => SetFamily::ApGp { t: need_f(a.t, "t")?, seed: a.seed.unwrap_or(0) },
        other => return Err(CliError::Usage(format!("unknown family `{other}` (full, digit, cantor, random, apgp)"))),
    })
}

pub fn sumproduct(mut a: SumproductArgs, config: &Config) -> Result<u8, CliError> {
    let s = config.section("sumproduct", &["family", "sigma", "t", "seed", "scales", "c", "guard", "slope"])?;
    s.fill(&mut a.family, "family")?;
    s.fill(&mut a.sigma, "sigma")?;
    s.fill(&mut a.t, "t")?;
    s.fill(&mut a.seed, "seed")?;
    s.fill(&mut a.scales, "scales")?;
    s.fill(&mut a.c, "c")?;
    s.fill(&mut a.guard, "guard")?;
    s.fill(&mut a.slope, "slope")?;
    let options = ExperimentOptions {
        guard: a.guard.unwrap_or(DEFAULT_GUARD),
        c: a.c.unwrap_or(ExperimentOptions::default().c),
        slope: a.slope.unwrap_or(false),
    };
    let (source, rows) = match (&a.set, &a.family) {
        (Some(p), None) => (json!({"set": p.display().to_string()}), vec![scale_row(&read_set(p)?, &options)?]),
        (None, Some(name)) => {
            let fam = family(&a, name)?;
            let scales = parse_scales(a.scales.as_deref().unwrap_or("8..14"))?;
            let rows = theorem_a_experiment(&fam, &scales, &options)?;
            (json!({"family": fam, "scales": scales}), rows)
        }
        _ => return Err(CliError::Usage("give exactly one of --set or --family".into())),
    };
    let mut csv = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        csv.serialize(r)?;
    }
    let body = csv.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    let dir = resolve_output(&a.out.clone().unwrap_or_else(|| PathBuf::from("sumproduct")));
    let config_snapshot = json!({"source": source, "options": options});
    let mut run = Run::start(dir.clone(), "sumproduct", config_snapshot, a.seed.into_iter().collect())?;
    run.write("report.csv", &body)?;
    run.finish()?;
    let mut out = std::io::stdout().lock();
    for r in &rows {
        let _ = writeln!(
            out,
            "n={:<3} |A|={:<6} N+={:<7} N-={:<7} N*={:<7} N/={:<7} c_hat={:>7.4} c_hat'={:>7.4} theorem_b={}{}",
            r.n,
            r.size,
            r.n_sum,
            r.n_diff,
            r.n_prod,
            r.n_quot,
            r.c_hat,
            r.c_hat_quotient,
            if r.theorem_b_pass { "pass" } else { "fail" },
            if r.degenerate { " (degenerate)" } else { "" }
        );
    }
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(0)
}

pub fn slope(mut a: SlopeArgs, config: &Config) -> Result<u8, CliError> {
    let s = config.section("slope", &["variant", "guard"])?;
    s.fill(&mut a.variant, "variant")?;
    s.fill(&mut a.guard, "guard")?;
    let set = read_set(&a.set)?;
    let check = check_discretised_slope_inequality(&set, a.variant.unwrap_or(2), a.guard.unwrap_or(DEFAULT_GUARD))?;
    emit(&check, a.out.as_deref())?;
    Ok(0)
}

pub fn report(a: ReportArgs) -> Result<u8, CliError> {
    let summary = summarize(&a.dir)?;
    match a.format.as_str() {
        "table" => print!("{}", render_summary(&summary)),
        "json" => emit(&summary, None)?,
        other => return Err(CliError::Usage(format!("unknown format `{other}` (table, json)"))),
    }
    Ok(if summary.all_ok { 0 } else { 1 })
}
