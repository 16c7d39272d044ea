//! `renyi`: command-line access to divergences, limit constants, studies
//! and large-deviation bounds.

mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use renyi_core::families::builtin_examples;
use renyi_core::harness::{
    lemma_study, s_grid, uniformity_study, write_report, ConvergenceReport, StudyConfig, StudyError,
};
use renyi_core::{
    alpha1_bar, alpha2_bar, convergence_study, emit_report, endpoint_limit_constant, endpoint_scaling, limit_constant,
    renyi_divergence, scaling_regime, ArgS, BoundResult, Error, QuadratureConfig, RenyiOrder, Support,
};
use serde_json::{json, Value};

use args::{Cli, Command, ReportArgs};
use output::fmt_num;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Family(_) => EXIT_USAGE,
        Error::NonConvergence { .. } | Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io { .. } | Error::Json(_) => EXIT_IO,
    }
}

fn quadrature(tol: f64) -> Result<QuadratureConfig, Error> {
    QuadratureConfig::new(1e-30, tol, 14)
}

fn study_config(tol: f64) -> Result<StudyConfig, Error> {
    Ok(StudyConfig { quadrature: quadrature(tol)?, ..StudyConfig::default() })
}

fn arg_json(arg: ArgS) -> Value {
    match arg {
        ArgS::Interior(s) => json!(s),
        ArgS::LowerBoundary => json!("0+"),
        ArgS::UpperBoundary => json!("1-"),
    }
}

fn arg_text(arg: ArgS) -> String {
    match arg {
        ArgS::Interior(s) => fmt_num(s),
        ArgS::LowerBoundary => "0+ (boundary)".into(),
        ArgS::UpperBoundary => "1- (boundary)".into(),
    }
}

fn bound_json(b: &BoundResult) -> Value {
    json!({ "value": b.value, "arg_s": arg_json(b.arg_s), "mode": b.mode })
}

fn print_json(value: &Value) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Write a study report to `--out` (printing a summary) or to stdout.
fn deliver(report: &ConvergenceReport, out: &ReportArgs, json_flag: bool) -> Result<(), Error> {
    let format = out.resolve_format(json_flag);
    match &out.out {
        Some(path) => {
            emit_report(report, format, path)?;
            let status = if report.converged { "converged" } else { "not converged" };
            println!(
                "extrapolated = {}\nclosed_form = {}\nstatus = {status}{}\nreport = {}",
                fmt_num(report.extrapolated),
                fmt_num(report.closed_form),
                if report.noise_limited { " (noise-limited)" } else { "" },
                path.display()
            );
        }
        None => write_report(report, format, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Interval midpoint, or one unit into a half-line.
fn default_split(family: &renyi_core::FamilySpec) -> f64 {
    match family.support() {
        Support::Interval { a, b } => 0.5 * (a + b),
        Support::HalfLine { a } => a + 1.0,
    }
}

fn study_result(r: Result<ConvergenceReport, StudyError>) -> Result<ConvergenceReport, Error> {
    r.map_err(|e| {
        eprintln!("renyi: {} row(s) completed before the failure", e.partial.rows.len());
        e.into_inner()
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let json_flag = cli.json;
    match cli.command {
        Command::Divergence { family, s, eps, tol } => {
            let r = renyi_divergence(&family, 0.0, eps, RenyiOrder::new(s)?, &quadrature(tol)?)?;
            if json_flag {
                print_json(&json!({
                    "family": family.to_string(), "s": s, "eps": eps,
                    "value": r.value, "err_estimate": r.err_estimate, "evaluations": r.evaluations,
                }))
            } else {
                println!("{}", fmt_num(r.value));
                Ok(())
            }
        }
        Command::Limit { family, s, side: Some(side), c } => {
            let c = c.unwrap_or_else(|| default_split(&family));
            let value = endpoint_limit_constant(&family, side, s, c)?;
            let regime = endpoint_scaling(&family, side)?;
            if json_flag {
                print_json(&json!({
                    "family": family.to_string(), "s": s, "side": side, "c": c, "value": value, "regime": regime,
                }))
            } else {
                println!("value = {}\nregime = {regime}", fmt_num(value));
                Ok(())
            }
        }
        Command::Limit { family, s, side: None, .. } => {
            let c = limit_constant(&family, s)?;
            if json_flag {
                print_json(&json!({
                    "family": family.to_string(), "s": s, "value": c.value, "regime": c.regime,
                    "left_term": c.left_term, "right_term": c.right_term,
                }))
            } else {
                println!("value = {}\nregime = {}", fmt_num(c.value), c.regime);
                Ok(())
            }
        }
        Command::Converge { family, s, sweep, report, tol } => {
            let r = study_result(convergence_study(&family, s, &sweep.sweep()?, &study_config(tol)?))?;
            deliver(&r, &report, json_flag)
        }
        Command::Lemma { family, side, c, s, sweep, report, tol } => {
            let r = study_result(lemma_study(&family, side, c, s, &sweep.sweep()?, &study_config(tol)?))?;
            deliver(&r, &report, json_flag)
        }
        Command::Uniformity { family, s_grid: n, sweep, report, tol } => {
            let eps = sweep.sweep()?.points();
            let r = uniformity_study(&family, &s_grid(n), &eps, &study_config(tol)?)?;
            let format = report.resolve_format(json_flag);
            match &report.out {
                Some(path) => {
                    emit_report(&r, format, path)?;
                    println!("monotone = {}\nreport = {}", r.monotone_flag, path.display());
                    Ok(())
                }
                None => write_report(&r, format, std::io::stdout().lock()),
            }
        }
        Command::Bounds { family } => {
            let a1 = alpha1_bar(&family)?;
            let a2 = alpha2_bar(&family)?;
            if json_flag {
                print_json(&json!({
                    "family": family.to_string(), "regime": scaling_regime(&family)?,
                    "alpha1": bound_json(&a1), "alpha2": bound_json(&a2),
                }))
            } else {
                println!(
                    "alpha1 = {} (s* = {})\nalpha2 = {} (s* = {})",
                    fmt_num(a1.value),
                    arg_text(a1.arg_s),
                    fmt_num(a2.value),
                    arg_text(a2.arg_s)
                );
                Ok(())
            }
        }
        Command::Families => {
            let rows: Vec<Value> = builtin_examples()
                .iter()
                .map(|f| {
                    let (l, r) = f.endpoint_behavior();
                    json!({
                        "family": f.to_string(),
                        "support": f.support(),
                        "left": l,
                        "right": r,
                        "regime": scaling_regime(f).ok(),
                    })
                })
                .collect();
            if json_flag {
                return print_json(&Value::Array(rows));
            }
            let mut out = std::io::stdout().lock();
            for f in builtin_examples() {
                let regime = scaling_regime(&f).map_or_else(|e| e.to_string(), |r| r.to_string());
                let (l, r) = f.endpoint_behavior();
                let right =
                    r.map_or_else(|| "-".to_string(), |r| format!("κ={} A={}", fmt_num(r.kappa), fmt_num(r.amplitude)));
                let _ = writeln!(
                    out,
                    "{:<16} left κ={} A={:<16} right {right:<24} {regime}",
                    f.to_string(),
                    fmt_num(l.kappa),
                    fmt_num(l.amplitude)
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("renyi: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
