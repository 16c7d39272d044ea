use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use renyi_core::harness::{OutputFormat, Sweep};
use renyi_core::{Error, FamilySpec, Side};

#[derive(Debug, Parser)]
#[command(name = "renyi", version, about = "Relative Rényi entropy between shifted non-regular densities")]
pub struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// I^s(f_θ ‖ f_{θ+ε}) by quadrature.
    Divergence {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        /// Shift; negative values give the reverse direction.
        #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
        eps: f64,
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tol: f64,
    },
    /// Closed-form small-shift limit; with --side, the endpoint limit.
    Limit {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        #[arg(long, value_parser = parse_side)]
        side: Option<Side>,
        /// Split point for the endpoint pieces (default: interval midpoint,
        /// or a + 1 on a half-line).
        #[arg(long, requires = "side", allow_negative_numbers = true, value_parser = parse_finite)]
        c: Option<f64>,
    },
    /// ε-sweep of I^s/g(ε) against the limit.
    Converge {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tol: f64,
    },
    /// sup over an s-grid of |I^s/g(ε) − C(s)| along an ε-sweep.
    Uniformity {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
        /// Number of orders, evenly spaced over [0.05, 0.95].
        #[arg(long = "s-grid", default_value_t = 19, value_parser = parse_grid)]
        s_grid: usize,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tol: f64,
    },
    /// Large-deviation bounds ᾱ₁ and ᾱ₂.
    Bounds {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
    },
    /// ε-sweep of one endpoint piece I±/g(ε) against its limit.
    Lemma {
        #[arg(long, value_parser = parse_family)]
        family: FamilySpec,
        #[arg(long, value_parser = parse_side)]
        side: Side,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
        c: f64,
        #[arg(long, value_parser = parse_order)]
        s: f64,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
        tol: f64,
    },
    /// List the built-in example families.
    Families,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub eps0: f64,
    #[arg(long, default_value_t = 2.0, value_parser = parse_factor)]
    pub factor: f64,
    #[arg(long, default_value_t = 14, value_parser = parse_steps)]
    pub steps: usize,
}

impl SweepArgs {
    pub fn sweep(&self) -> Result<Sweep, Error> {
        Sweep::new(self.eps0, self.factor, self.steps)
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json; defaults to the --out extension, else csv.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
}

impl ReportArgs {
    pub fn resolve_format(&self, json_flag: bool) -> OutputFormat {
        if let Some(f) = self.format {
            return f;
        }
        if json_flag {
            return OutputFormat::Json;
        }
        match self.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

fn parse_float(text: &str) -> Result<f64, String> {
    text.trim().parse::<f64>().map_err(|e| format!("`{text}` is not a number: {e}"))
}

fn parse_finite(text: &str) -> Result<f64, String> {
    let x = parse_float(text)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} is not finite"))
    }
}

fn parse_positive(text: &str) -> Result<f64, String> {
    let x = parse_float(text)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} must be positive and finite"))
    }
}

fn parse_factor(text: &str) -> Result<f64, String> {
    let x = parse_float(text)?;
    if x.is_finite() && x > 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} must exceed 1"))
    }
}

fn parse_order(text: &str) -> Result<f64, String> {
    let s = parse_float(text)?;
    if s > 0.0 && s < 1.0 {
        Ok(s)
    } else {
        Err(format!("{s} is outside (0, 1)"))
    }
}

fn parse_count(text: &str, min: usize) -> Result<usize, String> {
    let n: usize = text.trim().parse().map_err(|e| format!("`{text}` is not a count: {e}"))?;
    if n >= min {
        Ok(n)
    } else {
        Err(format!("{n} is below the minimum {min}"))
    }
}

fn parse_steps(text: &str) -> Result<usize, String> {
    parse_count(text, 4)
}

fn parse_grid(text: &str) -> Result<usize, String> {
    parse_count(text, 1)
}

fn parse_side(text: &str) -> Result<Side, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(text: &str) -> Result<OutputFormat, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

/// `name:p1,p2`, or a JSON family file given as `@path` or `*.json`.
fn parse_family(text: &str) -> Result<FamilySpec, String> {
    let path = text.strip_prefix('@').or_else(|| text.ends_with(".json").then_some(text));
    match path {
        Some(path) => {
            let body = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            FamilySpec::from_json(&body).map_err(|e| format!("{path}: {e}"))
        }
        None => text.parse().map_err(|e: Error| e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_examples() {
        let cli =
            Cli::try_parse_from(["renyi", "divergence", "--family", "exp:1", "--s", "0.4", "--eps", "0.01"]).unwrap();
        assert!(matches!(cli.command, Command::Divergence { s, eps, .. } if s == 0.4 && eps == 0.01));
        let cli = Cli::try_parse_from(["renyi", "limit", "--family", "beta:0.5,0.5", "--s", "0.5"]).unwrap();
        assert!(matches!(cli.command, Command::Limit { side: None, .. }));
        let neg = Cli::try_parse_from(["renyi", "divergence", "--family", "uniform", "--s", "0.3", "--eps", "-0.1"]);
        assert!(neg.is_ok());
    }

    #[test]
    fn rejects_bad_values_naming_the_flag() {
        let err = Cli::try_parse_from(["renyi", "divergence", "--family", "exp:1", "--s", "1.5", "--eps", "0.1"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--s"), "{err}");
        for bad in [
            vec!["renyi", "converge", "--family", "exp:1", "--s", "0.5", "--steps", "3"],
            vec!["renyi", "converge", "--family", "exp:1", "--s", "0.5", "--factor", "1"],
            vec!["renyi", "bounds", "--family", "beta:-1,2"],
            vec!["renyi", "lemma", "--family", "uniform", "--side", "up", "--c", "0.5", "--s", "0.5"],
            vec!["renyi", "converge", "--family", "uniform", "--s", "0.5", "--format", "xml"],
            vec!["renyi", "limit", "--family", "uniform", "--s", "0.5", "--c", "0.2"],
        ] {
            assert!(Cli::try_parse_from(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn format_resolution() {
        let r = ReportArgs { out: Some("a/b.JSON".into()), format: None };
        assert_eq!(r.resolve_format(false), OutputFormat::Json);
        let r = ReportArgs { out: Some("b.csv".into()), format: None };
        assert_eq!(r.resolve_format(true), OutputFormat::Json);
        assert_eq!(r.resolve_format(false), OutputFormat::Csv);
    }
}
