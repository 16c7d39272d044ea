//! Relative Rényi entropy between shifted copies of a family member.
//!
//! All quantities are built from the overlap deficit
//!
//! ```text
//! δ = 1 − ∫ f^(1−s)(x) f^s(x + ε) dx
//!   = −∫ [f^(1−s)(x) f^s(x + ε) − f(x)] dx + ∫_{b−ε}^{b} f(x) dx
//! ```
//!
//! integrated in difference form so that the O(ε^κ) signal is not lost
//! against the unit mass. The integrand `f(x)·expm1(s·[ln f(x+ε) − ln f(x)])`
//! uses the family's term-by-term log ratio. The overlap is cut into panels
//! graded geometrically away from both singular ends (ε, 2ε, 4ε, …), so each
//! panel sees features on its own length scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, Point, Side, Support};
use crate::quadrature::{exp_sinh, tanh_sinh, QuadResult, QuadratureConfig};

pub use crate::quadrature::{integrate_singular, Domain};

/// Smallest distance from 0 or 1 an order may take.
pub const ORDER_MARGIN: f64 = 1e-6;

/// Rényi order s, restricted to [1e-6, 1 − 1e-6].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && (ORDER_MARGIN..=1.0 - ORDER_MARGIN).contains(&s) {
            Ok(RenyiOrder(s))
        } else {
            Err(Error::domain(format!("Rényi order must lie in [{ORDER_MARGIN:e}, 1 - {ORDER_MARGIN:e}], got {s}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// 1 − s.
    pub fn complement(self) -> RenyiOrder {
        RenyiOrder(1.0 - self.0)
    }
}

impl TryFrom<f64> for RenyiOrder {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        RenyiOrder::new(s)
    }
}

/// A divergence value with the quadrature's error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

impl DivergenceResult {
    fn zero() -> Self {
        DivergenceResult { value: 0.0, err_estimate: 0.0, evaluations: 0 }
    }
}

/// How panel coordinates map to points of the density.
#[derive(Debug, Clone, Copy)]
enum Coord {
    /// v = x − a.
    FromLeft,
    /// v = (b − ε) − x.
    FromShiftedRight,
}

/// Breakpoints 0, ε, 2ε, 4ε, … below `len`, then `len`.
fn graded(len: f64, eps: f64) -> Vec<f64> {
    let mut points = vec![0.0];
    let mut d = eps;
    while d < len {
        points.push(d);
        d *= 2.0;
    }
    points.push(len);
    points
}

struct Overlap<'a> {
    family: &'a FamilySpec,
    eps: f64,
    width: f64,
}

impl<'a> Overlap<'a> {
    fn new(family: &'a FamilySpec, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::domain(format!("shift must be positive and finite, got {eps}")));
        }
        let width = family.support().width();
        if eps >= width {
            return Err(Error::domain(format!(
                "shift {eps} is at least the support width {width}: distributions mutually singular"
            )));
        }
        Ok(Overlap { family, eps, width })
    }

    /// (x, x + ε) for panel coordinate `v`.
    fn points(&self, coord: Coord, v: f64) -> (Point, Point) {
        let (w, e) = (self.width, self.eps);
        match coord {
            Coord::FromLeft => (Point { left: v, right: w - v }, Point { left: v + e, right: w - v - e }),
            Coord::FromShiftedRight => (Point { left: w - e - v, right: v + e }, Point { left: w - v, right: v }),
        }
    }

    /// Integrate `g(x, x+ε)` over consecutive panels given by `breaks`.
    fn panels<G>(&self, coord: Coord, breaks: &[f64], g: &G, cfg: &QuadratureConfig) -> Result<QuadResult>
    where
        G: Fn(Point, Point) -> f64,
    {
        let cfg = cfg.split(breaks.len().saturating_sub(1));
        breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (v0, v1) = (w[0], w[1]);
                tanh_sinh(
                    |_, dlo, dhi| {
                        let v = if dlo <= dhi { v0 + dlo } else { v1 - dhi };
                        let (from, to) = self.points(coord, v);
                        g(from, to)
                    },
                    v0,
                    v1,
                    &cfg,
                )
            })
            .sum()
    }

    /// Half-line tail `[v0, ∞)` in left coordinates.
    fn tail<G>(&self, v0: f64, g: &G, cfg: &QuadratureConfig) -> Result<QuadResult>
    where
        G: Fn(Point, Point) -> f64,
    {
        exp_sinh(
            |_, d| {
                let (from, to) = self.points(Coord::FromLeft, v0 + d);
                g(from, to)
            },
            v0,
            cfg,
        )
    }

    /// ∫ g over left coordinates [u0, ∞) on a half-line: graded head near u0
    /// when `graded_head` is set, then an exp-sinh tail.
    fn half_line<G>(&self, u0: f64, graded_head: bool, g: &G, cfg: &QuadratureConfig) -> Result<QuadResult>
    where
        G: Fn(Point, Point) -> f64,
    {
        let len = self.family.scale().max(2.0 * self.eps);
        let breaks: Vec<f64> =
            if graded_head { graded(len, self.eps).into_iter().map(|b| u0 + b).collect() } else { vec![u0, u0 + len] };
        let cfg = cfg.split(2);
        Ok(self.panels(Coord::FromLeft, &breaks, g, &cfg)? + self.tail(u0 + len, g, &cfg)?)
    }

    /// f^(1−s)(x) f^s(x+ε) − f(x).
    fn difference(&self, s: f64) -> impl Fn(Point, Point) -> f64 + '_ {
        move |from, to| {
            let lf = self.family.ln_density_at(from);
            if lf == f64::NEG_INFINITY {
                return 0.0;
            }
            let r = s * self.family.ln_shift_ratio(from, to, self.eps);
            if r > 1.0 {
                (lf + r).exp() - lf.exp()
            } else {
                lf.exp() * r.exp_m1()
            }
        }
    }

    /// Mass ∫_{b−ε}^{b} f lost off the right end of the overlap.
    fn lost_tail(&self, cfg: &QuadratureConfig) -> Result<QuadResult> {
        if self.width.is_infinite() {
            return Ok(QuadResult::default());
        }
        self.family.integrate_u(|p| self.family.ln_density_at(p).exp(), self.width - self.eps, self.width, cfg)
    }

    /// ∫ over the whole overlap of (f^(1−s) f^s(·+ε) − f).
    fn overlap_difference(&self, s: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
        let g = self.difference(s);
        if self.width.is_infinite() {
            return self.half_line(0.0, true, &g, cfg);
        }
        let half = 0.5 * (self.width - self.eps);
        let breaks = graded(half, self.eps);
        let cfg = cfg.split(2);
        Ok(self.panels(Coord::FromLeft, &breaks, &g, &cfg)?
            + self.panels(Coord::FromShiftedRight, &breaks, &g, &cfg)?)
    }

    fn deficit(&self, s: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
        let cfg = cfg.split(2);
        let diff = self.overlap_difference(s, &cfg)?;
        let tail = self.lost_tail(&cfg)?;
        Ok(QuadResult {
            value: tail.value - diff.value,
            err_estimate: tail.err_estimate + diff.err_estimate,
            evaluations: tail.evaluations + diff.evaluations,
        })
    }
}

/// δ = 1 − ∫ f^(1−s)(x) f^s(x+ε) dx for ε > 0, with its error estimate.
pub fn overlap_deficit(family: &FamilySpec, eps: f64, s: RenyiOrder, cfg: &QuadratureConfig) -> Result<QuadResult> {
    cfg.validate()?;
    let r = Overlap::new(family, eps)?.deficit(s.get(), cfg)?;
    Ok(QuadResult { value: r.value.max(0.0), ..r })
}

/// 1 − ∫ f^(1−s)(x) f^s(x+ε) dx.
pub fn affinity_deficiency(family: &FamilySpec, eps: f64, s: RenyiOrder, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(overlap_deficit(family, eps, s, cfg)?.value)
}

/// I^s(f_θ ‖ f_{θ+ε}). The value does not depend on θ. Negative shifts use
/// I^s(f_θ ‖ f_{θ−|ε|}) = I^(1−s)(f_{θ−|ε|} ‖ f_θ).
pub fn renyi_divergence(
    family: &FamilySpec,
    theta: f64,
    eps: f64,
    s: RenyiOrder,
    cfg: &QuadratureConfig,
) -> Result<DivergenceResult> {
    if !theta.is_finite() || !eps.is_finite() {
        return Err(Error::domain(format!("θ and ε must be finite, got θ={theta}, ε={eps}")));
    }
    cfg.validate()?;
    if eps == 0.0 {
        return Ok(DivergenceResult::zero());
    }
    let (shift, order) = if eps > 0.0 { (eps, s) } else { (-eps, s.complement()) };
    let d = overlap_deficit(family, shift, order, cfg)?;
    let survive = 1.0 - d.value;
    Ok(DivergenceResult {
        value: -(-d.value).ln_1p(),
        err_estimate: d.err_estimate / survive,
        evaluations: d.evaluations,
    })
}

/// D(f_{θ+ε} ‖ f_θ) = ∫ f(y)[ln f(y) − ln f(y+ε)] dy for half-line families.
/// Reported as infinite when the quadrature detects a non-integrable
/// singularity at the endpoint.
pub fn kl_divergence(family: &FamilySpec, eps: f64, cfg: &QuadratureConfig) -> Result<DivergenceResult> {
    if let Support::Interval { .. } = family.support() {
        return Err(Error::domain(
            "support overhang makes the Kullback-Leibler divergence infinite for interval families",
        ));
    }
    cfg.validate()?;
    if eps == 0.0 {
        return Ok(DivergenceResult::zero());
    }
    let overlap = Overlap::new(family, eps)?;
    let g = |from: Point, to: Point| {
        let lf = family.ln_density_at(from);
        if lf == f64::NEG_INFINITY {
            return 0.0;
        }
        -lf.exp() * family.ln_shift_ratio(from, to, eps)
    };
    match overlap.half_line(0.0, true, &g, cfg) {
        Ok(r) => Ok(DivergenceResult { value: r.value, err_estimate: r.err_estimate, evaluations: r.evaluations }),
        Err(Error::NonConvergence { last, .. }) if last.abs() > 1.0 / cfg.rel_tol => {
            Ok(DivergenceResult { value: f64::INFINITY, err_estimate: f64::INFINITY, evaluations: 0 })
        }
        Err(e) => Err(e),
    }
}

/// Squared Hellinger distance 2(1 − ∫ √(f_θ f_{θ+ε})).
pub fn hellinger_sq(family: &FamilySpec, eps: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !eps.is_finite() {
        return Err(Error::domain(format!("shift must be finite, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let half = RenyiOrder::new(0.5)?;
    Ok(2.0 * affinity_deficiency(family, eps.abs(), half, cfg)?)
}

/// Endpoint contribution I⁻_s(c, f, ε) (left) or I⁺_s(c, f, ε) (right):
///
/// ```text
/// I⁻ = ∫_a^c f^(1−s)(x) f^s(x+ε) dx − ∫_a^c f − f(c)sε − (s/2) f′(c) ε²
/// I⁺ = ∫_c^(b−ε) f^(1−s)(x) f^s(x+ε) dx − ∫_c^b f + f(c)sε + (s/2) f′(c) ε²
/// ```
///
/// with b = ∞ on a half-line. I⁻ + I⁺ = −δ.
pub fn endpoint_contribution(
    family: &FamilySpec,
    side: Side,
    c: f64,
    s: RenyiOrder,
    eps: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let overlap = Overlap::new(family, eps)?;
    let uc = c - family.support().left();
    let fc = family.log_density(c)?.exp();
    let fpc = family.density_prime(c)?;
    if uc >= overlap.width - eps {
        return Err(Error::domain(format!("split point c = {c} must lie below the shifted right end (b − ε)")));
    }
    let s = s.get();
    let correction = fc * s * eps + 0.5 * s * fpc * eps * eps;
    let g = overlap.difference(s);
    match side {
        Side::Left => {
            let breaks = graded(uc, eps);
            let body = overlap.panels(Coord::FromLeft, &breaks, &g, cfg)?;
            Ok(body.value - correction)
        }
        Side::Right if overlap.width.is_infinite() => {
            let body = overlap.half_line(uc, false, &g, cfg)?;
            Ok(body.value + correction)
        }
        Side::Right => {
            let cfg = cfg.split(2);
            let breaks = graded(overlap.width - eps - uc, eps);
            let body = overlap.panels(Coord::FromShiftedRight, &breaks, &g, &cfg)?;
            let tail = overlap.lost_tail(&cfg)?;
            Ok(body.value - tail.value + correction)
        }
    }
}
