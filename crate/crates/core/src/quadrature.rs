//! Double-exponential quadrature.
//!
//! tanh-sinh on finite intervals and exp-sinh on half-lines. Both refine by
//! halving the step in the transformed variable; the level-to-level
//! difference is the error estimate. Integrands receive the abscissa
//! together with its distances to the panel endpoints, computed without
//! cancellation, so densities with power-law endpoint singularities can be
//! evaluated accurately arbitrarily close to the boundary.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest refinement level the node tables support.
pub const MAX_SUPPORTED_LEVEL: usize = 16;
const MIN_LEVEL: usize = 3;
const TANH_SINH_TMAX: f64 = 6.0;
const EXP_SINH_TMAX: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_levels: 12 }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_levels: usize) -> Result<Self> {
        let cfg = QuadratureConfig { abs_tol, rel_tol, max_levels };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(4..=MAX_SUPPORTED_LEVEL).contains(&self.max_levels) {
            return Err(Error::domain(format!(
                "max_levels must lie in 4..={MAX_SUPPORTED_LEVEL}, got {}",
                self.max_levels
            )));
        }
        Ok(())
    }

    /// Same relative tolerance, absolute tolerance divided among `parts`.
    pub(crate) fn split(&self, parts: usize) -> QuadratureConfig {
        QuadratureConfig { abs_tol: self.abs_tol / parts.max(1) as f64, ..*self }
    }
}

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    HalfLine(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;

    fn add(self, rhs: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + rhs.value,
            err_estimate: self.err_estimate + rhs.err_estimate,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

impl std::iter::Sum for QuadResult {
    fn sum<I: Iterator<Item = QuadResult>>(iter: I) -> QuadResult {
        iter.fold(QuadResult::default(), |a, b| a + b)
    }
}

/// Integrate a plain function of `x` over `domain`.
pub fn integrate_singular<F>(f: F, domain: Domain, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    match domain {
        Domain::Finite(lo, hi) => tanh_sinh(|x, _, _| f(x), lo, hi, cfg),
        Domain::HalfLine(lo) => exp_sinh(|x, _| f(x), lo, cfg),
    }
}

/// A single transformed node: `c` is the distance to the nearer endpoint
/// in units of the half-width (tanh-sinh) or the offset from the finite end
/// (exp-sinh); `w` is the transformation weight.
#[derive(Debug, Clone, Copy)]
struct Node {
    c: f64,
    w: f64,
}

fn tanh_sinh_level(level: usize) -> &'static [Node] {
    static TABLES: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_SUPPORTED_LEVEL)
            .map(|k| {
                let h = (0.5f64).powi(k as i32);
                level_offsets(k, TANH_SINH_TMAX)
                    .filter(|&j| j > 0)
                    .map(|j| {
                        let t = j as f64 * h;
                        let v = FRAC_PI_2 * t.sinh();
                        let e = (-2.0 * v).exp();
                        // 1 - tanh(v) and the derivative of tanh(pi/2 sinh t).
                        let c = 2.0 * e / (1.0 + e);
                        let sech = 2.0 * (-v).exp() / (1.0 + e);
                        Node { c, w: FRAC_PI_2 * t.cosh() * sech * sech }
                    })
                    .filter(|n| n.c > 0.0 && n.w > 0.0)
                    .collect()
            })
            .collect()
    });
    &tables[level]
}

fn exp_sinh_level(level: usize) -> &'static [Node] {
    static TABLES: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_SUPPORTED_LEVEL)
            .map(|k| {
                let h = (0.5f64).powi(k as i32);
                level_offsets(k, EXP_SINH_TMAX)
                    .flat_map(|j| if j == 0 { vec![0] } else { vec![j, -j] })
                    .map(|j| {
                        let t = j as f64 * h;
                        let c = (FRAC_PI_2 * t.sinh()).exp();
                        Node { c, w: FRAC_PI_2 * t.cosh() * c }
                    })
                    .filter(|n| n.c > 0.0 && n.c.is_finite() && n.w.is_finite())
                    .collect()
            })
            .collect()
    });
    &tables[level]
}

/// Non-negative step multiples first introduced at `level`.
fn level_offsets(level: usize, tmax: f64) -> impl Iterator<Item = i64> {
    let scale = 1i64 << level;
    let jmax = (tmax * scale as f64).floor() as i64;
    let step = if level == 0 { 1 } else { 2 };
    let start = if level == 0 { 0 } else { 1 };
    (start..=jmax).step_by(step)
}

fn check(value: f64, x: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical(format!("integrand is {value} at x = {x:e}")))
    }
}

/// Shared refinement loop. `level_sum(k)` returns the weighted sum of the
/// nodes new at level `k` and how many evaluations it used.
fn refine<L>(scale: f64, cfg: &QuadratureConfig, mut level_sum: L) -> Result<QuadResult>
where
    L: FnMut(usize) -> Result<(f64, usize)>,
{
    let (s0, n0) = level_sum(0)?;
    let mut sum = s0;
    let mut evaluations = n0;
    let mut estimate = scale * sum;
    let mut previous = f64::NAN;
    for level in 1..=cfg.max_levels {
        let (s, n) = level_sum(level)?;
        evaluations += n;
        sum += s;
        let h = (0.5f64).powi(level as i32);
        previous = estimate;
        estimate = scale * h * sum;
        let diff = (estimate - previous).abs();
        if level >= MIN_LEVEL && diff <= cfg.abs_tol.max(cfg.rel_tol * estimate.abs()) {
            return Ok(QuadResult { value: estimate, err_estimate: diff, evaluations });
        }
    }
    Err(Error::NonConvergence { levels: cfg.max_levels, last: estimate, previous })
}

/// tanh-sinh over `[lo, hi]`. The integrand is called as
/// `f(x, x - lo, hi - x)`.
pub(crate) fn tanh_sinh<F>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(QuadResult::default());
    }
    let half = 0.5 * (hi - lo);
    let mid = lo + half;
    refine(half, cfg, |level| {
        let mut sum = 0.0;
        let mut n = 0;
        if level == 0 {
            sum += FRAC_PI_2 * check(f(mid, half, half), mid)?;
            n += 1;
        }
        for node in tanh_sinh_level(level) {
            let d = half * node.c;
            if d <= 0.0 {
                continue;
            }
            let far = half * (2.0 - node.c);
            let x_hi = hi - d;
            let x_lo = lo + d;
            let v = check(f(x_hi, far, d), x_hi)? + check(f(x_lo, d, far), x_lo)?;
            sum += node.w * v;
            n += 2;
        }
        Ok((sum, n))
    })
}

/// exp-sinh over `[lo, ∞)`. The integrand is called as `f(x, x - lo)`.
pub(crate) fn exp_sinh<F>(f: F, lo: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64,
{
    if !lo.is_finite() {
        return Err(Error::domain(format!("invalid half-line start {lo}")));
    }
    refine(1.0, cfg, |level| {
        let mut sum = 0.0;
        let mut n = 0;
        for node in exp_sinh_level(level) {
            let x = lo + node.c;
            let v = check(f(x, node.c), x)?;
            sum += node.w * v;
            n += 1;
        }
        Ok((sum, n))
    })
}
