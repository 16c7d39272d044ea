//! ε-sweeps that compare I^s/g(ε) (or the endpoint pieces I±/g(ε)) with
//! their closed-form limits, plus report serialization.
//!
//! Grid points are computed on a rayon pool and reassembled in input order,
//! so results never depend on scheduling.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{endpoint_limit_constant, endpoint_scaling, LimitCurve, RegimeKind, ScalingRegime};
use crate::divergence::{endpoint_contribution, renyi_divergence, RenyiOrder};
use crate::error::{Error, Result};
use crate::families::{FamilySpec, Side};
use crate::quadrature::QuadratureConfig;

/// Environment variable capping the worker count of study pools.
pub const THREADS_ENV: &str = "RENYI_THREADS";

/// Fraction of |I| above which a quadrature error estimate stops a sweep.
pub const NOISE_FRACTION: f64 = 0.01;

/// Geometric ε-sweep ε_k = ε₀·factor^(−k), k = 0..steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub eps0: f64,
    pub factor: f64,
    pub steps: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { eps0: 0.05, factor: 2.0, steps: 14 }
    }
}

impl Sweep {
    pub fn new(eps0: f64, factor: f64, steps: usize) -> Result<Self> {
        let sweep = Sweep { eps0, factor, steps };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            return Err(Error::domain(format!("ε₀ must be positive, got {}", self.eps0)));
        }
        if !(self.factor.is_finite() && self.factor > 1.0) {
            return Err(Error::domain(format!("factor must exceed 1, got {}", self.factor)));
        }
        if self.steps < 4 {
            return Err(Error::domain(format!("a sweep needs at least 4 steps, got {}", self.steps)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.eps0 / self.factor.powi(k as i32)).collect()
    }
}

/// Settings shared by all studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub quadrature: QuadratureConfig,
    /// `converged` means |extrapolated − closed_form| ≤ tolerance·|closed_form|.
    pub tolerance: f64,
    /// Stop a sweep once the quadrature error estimate exceeds
    /// `NOISE_FRACTION` of the computed value.
    pub noise_guard: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            // The signal shrinks like ε² for smooth endpoints, so the absolute
            // tolerance must not be the binding one.
            quadrature: QuadratureConfig { abs_tol: 1e-30, rel_tol: 1e-11, max_levels: 14 },
            tolerance: 1e-2,
            noise_guard: true,
        }
    }
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::domain(format!("tolerance must be non-negative, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    #[serde(rename = "I_s")]
    pub i_s: f64,
    pub g_eps: f64,
    pub ratio: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

/// Endpoint piece examined by a lemma study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaTarget {
    pub side: Side,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub s: f64,
    pub regime: ScalingRegime,
    pub rows: Vec<ConvergenceRow>,
    pub extrapolated: f64,
    pub closed_form: f64,
    pub converged: bool,
    #[serde(default)]
    pub noise_limited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<LemmaTarget>,
}

/// A sweep that failed part-way; `partial` holds the rows computed before
/// the failing ε.
#[derive(Debug, thiserror::Error)]
#[error("study failed at ε = {eps:e}: {source}")]
pub struct StudyError {
    pub eps: f64,
    pub partial: Box<ConvergenceReport>,
    #[source]
    pub source: Error,
}

impl StudyError {
    pub fn into_inner(self) -> Error {
        self.source
    }
}

impl From<StudyError> for Error {
    fn from(e: StudyError) -> Self {
        e.source
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub family: String,
    pub s_grid: Vec<f64>,
    pub eps: Vec<f64>,
    /// sup over the grid of |ratio(s, ε) − C(s)|, one entry per ε.
    pub sup_abs_dev: Vec<f64>,
    /// The sup sequence is non-increasing over the last three ε.
    pub monotone_flag: bool,
}

/// Number of worker threads: `RENYI_THREADS` when set to a positive
/// integer, otherwise the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run `op` on a pool sized by [`thread_count`].
pub fn with_study_pool<R, F>(op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(op))
}

/// Limit of a ratio sequence. Power regimes use Aitken Δ² on the last
/// three ratios; κ = 2 extrapolates linearly in τ = 1/ln(1/ε) through the
/// last two rows.
pub fn extrapolate(regime: &ScalingRegime, rows: &[ConvergenceRow]) -> f64 {
    let n = rows.len();
    match n {
        0 => return f64::NAN,
        1 => return rows[0].ratio,
        _ => {}
    }
    if regime.kind == RegimeKind::EpsSqLog {
        let (p, q) = (&rows[n - 2], &rows[n - 1]);
        let tp = -1.0 / p.eps.ln();
        let tq = -1.0 / q.eps.ln();
        return q.ratio - tq * (q.ratio - p.ratio) / (tq - tp);
    }
    if n < 3 {
        return rows[n - 1].ratio;
    }
    aitken(rows[n - 3].ratio, rows[n - 2].ratio, rows[n - 1].ratio)
}

/// Aitken Δ² with a fallback to the last term when the denominator is tiny
/// or the differences are not contracting (the sequence is then at noise
/// level and Δ² would amplify it).
fn aitken(r0: f64, r1: f64, r2: f64) -> f64 {
    let d1 = r1 - r0;
    let d2 = r2 - r1;
    let num = d2 * d2;
    let den = d2 - d1;
    if den == 0.0 || den.abs() < 1e-14 * num.abs() || d2.abs() >= d1.abs() {
        return r2;
    }
    r2 - num / den
}

fn rel_err(ratio: f64, closed_form: f64) -> f64 {
    let dev = (ratio - closed_form).abs();
    if closed_form == 0.0 {
        dev
    } else {
        dev / closed_form.abs()
    }
}

struct Sample {
    value: f64,
    err: f64,
}

/// Shared sweep driver; `sample` returns I and its error estimate at ε.
fn run_sweep<F>(
    header: ConvergenceReport,
    sweep: &Sweep,
    cfg: &StudyConfig,
    sample: F,
) -> std::result::Result<ConvergenceReport, StudyError>
where
    F: Fn(f64) -> Result<Sample> + Sync,
{
    let fail =
        |eps: f64, source: Error, report: ConvergenceReport| StudyError { eps, partial: Box::new(report), source };
    if let Err(e) = sweep.validate().and_then(|_| cfg.validate()) {
        return Err(fail(sweep.eps0, e, header));
    }
    let eps = sweep.points();
    let samples: Vec<Result<Sample>> = match with_study_pool(|| eps.par_iter().map(|&e| sample(e)).collect()) {
        Ok(v) => v,
        Err(e) => return Err(fail(sweep.eps0, e, header)),
    };

    let mut report = header;
    let closed = report.closed_form;
    for (&e, sample) in eps.iter().zip(samples) {
        let g = match report.regime.g(e) {
            Ok(g) => g,
            Err(err) => return Err(fail(e, err, report)),
        };
        let Sample { value, err } = match sample {
            Ok(s) => s,
            Err(err) => return Err(fail(e, err, report)),
        };
        if cfg.noise_guard && err > NOISE_FRACTION * value.abs() {
            report.noise_limited = true;
            break;
        }
        let ratio = value / g;
        report.rows.push(ConvergenceRow {
            eps: e,
            i_s: value,
            g_eps: g,
            ratio,
            closed_form: closed,
            rel_err: rel_err(ratio, closed),
        });
    }
    report.extrapolated = extrapolate(&report.regime, &report.rows);
    report.converged =
        report.extrapolated.is_finite() && (report.extrapolated - closed).abs() <= cfg.tolerance * closed.abs();
    Ok(report)
}

fn header(family: &FamilySpec, s: f64, regime: ScalingRegime, closed_form: f64) -> ConvergenceReport {
    ConvergenceReport {
        family: family.to_string(),
        s,
        regime,
        rows: Vec::new(),
        extrapolated: f64::NAN,
        closed_form,
        converged: false,
        noise_limited: false,
        lemma: None,
    }
}

/// Sweep I^s(f_θ ‖ f_{θ+ε})/g(ε) against the closed-form limit.
pub fn convergence_study(
    family: &FamilySpec,
    s: f64,
    sweep: &Sweep,
    cfg: &StudyConfig,
) -> std::result::Result<ConvergenceReport, StudyError> {
    let early = |source: Error| StudyError {
        eps: sweep.eps0,
        partial: Box::new(header(
            family,
            s,
            ScalingRegime { kind: RegimeKind::EpsSq, kappa: family.kappa() },
            f64::NAN,
        )),
        source,
    };
    let order = RenyiOrder::new(s).map_err(early)?;
    let curve = LimitCurve::new(family).map_err(early)?;
    let closed = curve.at(s).map_err(early)?.value;
    let head = header(family, s, curve.regime(), closed);
    run_sweep(head, sweep, cfg, |eps| {
        let r = renyi_divergence(family, 0.0, eps, order, &cfg.quadrature)?;
        Ok(Sample { value: r.value, err: r.err_estimate })
    })
}

/// Sweep I⁻_s(c, f, ε)/g(ε) or I⁺_s(c, f, ε)/g(ε) against the endpoint limit.
pub fn lemma_study(
    family: &FamilySpec,
    side: Side,
    c: f64,
    s: f64,
    sweep: &Sweep,
    cfg: &StudyConfig,
) -> std::result::Result<ConvergenceReport, StudyError> {
    let early = |source: Error| StudyError {
        eps: sweep.eps0,
        partial: Box::new(header(
            family,
            s,
            ScalingRegime { kind: RegimeKind::EpsSq, kappa: family.kappa() },
            f64::NAN,
        )),
        source,
    };
    let order = RenyiOrder::new(s).map_err(early)?;
    let regime = endpoint_scaling(family, side).map_err(early)?;
    let closed = endpoint_limit_constant(family, side, s, c).map_err(early)?;
    let mut head = header(family, s, regime, closed);
    head.lemma = Some(LemmaTarget { side, c });
    // endpoint_contribution reports no error estimate; a second evaluation
    // at a tenfold looser tolerance stands in for one.
    let loose = QuadratureConfig {
        abs_tol: cfg.quadrature.abs_tol * 10.0,
        rel_tol: cfg.quadrature.rel_tol * 10.0,
        ..cfg.quadrature
    };
    run_sweep(head, sweep, cfg, |eps| {
        let value = endpoint_contribution(family, side, c, order, eps, &cfg.quadrature)?;
        let rough = endpoint_contribution(family, side, c, order, eps, &loose)?;
        Ok(Sample { value, err: (value - rough).abs() })
    })
}

/// Decades 1e-2, 1e-3, …, 1e-6.
pub fn default_uniformity_eps() -> Vec<f64> {
    (2..=6).map(|k| 10f64.powi(-k)).collect()
}

/// `n` evenly spaced orders covering [0.05, 0.95].
pub fn s_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|i| 0.05 + 0.9 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// sup_s |I^s/g(ε) − C(s)| over `s_grid` for each ε.
pub fn uniformity_study(
    family: &FamilySpec,
    s_grid: &[f64],
    eps: &[f64],
    cfg: &StudyConfig,
) -> Result<UniformityReport> {
    cfg.validate()?;
    if s_grid.is_empty() || eps.is_empty() {
        return Err(Error::domain("uniformity study needs a non-empty s grid and ε list"));
    }
    if let Some(s) = s_grid.iter().find(|s| !(0.01..=0.99).contains(*s)) {
        return Err(Error::domain(format!("grid order {s} is outside [0.01, 0.99]")));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("s grid must be strictly increasing"));
    }
    let curve = LimitCurve::new(family)?;
    let regime = curve.regime();
    let jobs: Vec<(usize, f64)> = (0..eps.len()).flat_map(|i| s_grid.iter().map(move |&s| (i, s))).collect();
    let devs: Vec<Result<f64>> = with_study_pool(|| {
        jobs.par_iter()
            .map(|&(i, s)| {
                let e = eps[i];
                let value = renyi_divergence(family, 0.0, e, RenyiOrder::new(s)?, &cfg.quadrature)?.value;
                Ok((value / regime.g(e)? - curve.at(s)?.value).abs())
            })
            .collect()
    })?;
    let mut sup = vec![0.0f64; eps.len()];
    for ((i, _), d) in jobs.iter().zip(devs) {
        sup[*i] = sup[*i].max(d?);
    }
    let tail = &sup[sup.len().saturating_sub(3)..];
    let monotone_flag = tail.windows(2).all(|w| w[1] <= w[0]);
    Ok(UniformityReport {
        family: family.to_string(),
        s_grid: s_grid.to_vec(),
        eps: eps.to_vec(),
        sup_abs_dev: sup,
        monotone_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::domain(format!("unknown report format `{other}` (expected csv or json)"))),
        }
    }
}

/// Anything the harness can write as CSV or JSON.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;

    fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => {
                let mut text = serde_json::to_string_pretty(self)?;
                text.push('\n');
                Ok(text)
            }
        }
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report for ConvergenceReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("eps,I_s,g_eps,ratio,closed_form,rel_err\n");
        for r in &self.rows {
            let fields = [r.eps, r.i_s, r.g_eps, r.ratio, r.closed_form, r.rel_err].map(num);
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

impl Report for UniformityReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("eps,sup_abs_dev\n");
        for (e, d) in self.eps.iter().zip(&self.sup_abs_dev) {
            let _ = writeln!(out, "{},{}", num(*e), num(*d));
        }
        out
    }
}

/// Write `report` to `path`; I/O failures carry the path.
pub fn emit_report<R: Report>(report: &R, format: OutputFormat, path: &Path) -> Result<()> {
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Write `report` to an arbitrary sink.
pub fn write_report<R: Report, W: Write>(report: &R, format: OutputFormat, mut sink: W) -> Result<()> {
    let text = report.render(format)?;
    sink.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stream>".into(), source })
}
