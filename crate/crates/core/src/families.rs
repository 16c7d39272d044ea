//! Built-in generator densities with moving support.
//!
//! Each family is evaluated through [`Point`], which carries the distances
//! to both support endpoints instead of the raw abscissa. Quadrature nodes
//! supply these distances exactly, which keeps `f`, `log f` and the score
//! `f'/f` accurate right up to a boundary singularity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exp_sinh, tanh_sinh, QuadResult, QuadratureConfig};
use crate::specfun::{ln_gamma_pos, log_beta_pos};

/// Support of a generator density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// Open interval (a, b) with a < b.
    Interval { a: f64, b: f64 },
    /// Open half-line (a, ∞).
    HalfLine { a: f64 },
}

impl Support {
    pub fn left(&self) -> f64 {
        match *self {
            Support::Interval { a, .. } | Support::HalfLine { a } => a,
        }
    }

    /// b − a, or infinity for a half-line.
    pub fn width(&self) -> f64 {
        match *self {
            Support::Interval { a, b } => b - a,
            Support::HalfLine { .. } => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Interval { a, b } => x > a && x < b,
            Support::HalfLine { a } => x > a && x < f64::INFINITY,
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, Support::Interval { .. })
    }
}

/// Power-law behaviour `f ≈ A·x^(κ−1)` at distance `x` from an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointBehavior {
    pub kappa: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" | "-" => Ok(Side::Left),
            "right" | "r" | "+" => Ok(Side::Right),
            other => Err(Error::Family(format!("unknown side `{other}`"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Named family with its parameters as given by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// Beta(α, β) on (0, 1).
    Beta { alpha: f64, beta: f64 },
    /// Gamma with shape α and rate β on (0, ∞).
    Gamma { alpha: f64, beta: f64 },
    /// Weibull density αβ x^(α−1) exp(−β x^α) on (0, ∞).
    Weibull { alpha: f64, beta: f64 },
    /// Beta(1, 1).
    Uniform,
    /// Exponential with rate β.
    Exponential { beta: f64 },
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Beta { .. } => "beta",
            FamilyKind::Gamma { .. } => "gamma",
            FamilyKind::Weibull { .. } => "weibull",
            FamilyKind::Uniform => "uniform",
            FamilyKind::Exponential { .. } => "exp",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            FamilyKind::Beta { alpha, beta }
            | FamilyKind::Gamma { alpha, beta }
            | FamilyKind::Weibull { alpha, beta } => vec![alpha, beta],
            FamilyKind::Uniform => vec![],
            FamilyKind::Exponential { beta } => vec![beta],
        }
    }

    fn from_parts(name: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::Family(format!("`{name}` takes {n} parameter(s), got {}", params.len())))
            }
        };
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "beta" => {
                want(2)?;
                FamilyKind::Beta { alpha: params[0], beta: params[1] }
            }
            "gamma" => {
                want(2)?;
                FamilyKind::Gamma { alpha: params[0], beta: params[1] }
            }
            "weibull" => {
                want(2)?;
                FamilyKind::Weibull { alpha: params[0], beta: params[1] }
            }
            "uniform" => {
                want(0)?;
                FamilyKind::Uniform
            }
            "exp" | "exponential" => {
                want(1)?;
                FamilyKind::Exponential { beta: params[0] }
            }
            other => return Err(Error::Family(format!("unknown family `{other}`"))),
        };
        Ok(kind)
    }
}

/// Underlying analytic shape; the named kinds reduce to one of these.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Beta { alpha: f64, beta: f64 },
    Gamma { alpha: f64, rate: f64 },
    Weibull { alpha: f64, rate: f64 },
}

/// Location of an abscissa by its distances to the support endpoints.
/// `right` is infinite on a half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Point {
    pub left: f64,
    pub right: f64,
}

/// On-disk / JSON form of a family: `{"name": "beta", "params": [0.5, 0.5]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// A validated generator density.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    kind: FamilyKind,
    shape: Shape,
    support: Support,
    left: EndpointBehavior,
    right: Option<EndpointBehavior>,
    ln_norm: f64,
}

/// Tolerance on the numerical normalization check at construction.
pub const NORMALIZATION_TOL: f64 = 1e-10;

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        for p in kind.params() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Family(format!("{} parameters must be finite and positive, got {p}", kind.name())));
            }
        }
        let shape = match kind {
            FamilyKind::Beta { alpha, beta } => Shape::Beta { alpha, beta },
            FamilyKind::Uniform => Shape::Beta { alpha: 1.0, beta: 1.0 },
            FamilyKind::Gamma { alpha, beta } => Shape::Gamma { alpha, rate: beta },
            FamilyKind::Exponential { beta } => Shape::Gamma { alpha: 1.0, rate: beta },
            FamilyKind::Weibull { alpha, beta } => Shape::Weibull { alpha, rate: beta },
        };
        let (support, ln_norm, left, right) = match shape {
            Shape::Beta { alpha, beta } => {
                let ln_norm = -log_beta_pos(alpha, beta);
                let amp = ln_norm.exp();
                (
                    Support::Interval { a: 0.0, b: 1.0 },
                    ln_norm,
                    EndpointBehavior { kappa: alpha, amplitude: amp },
                    Some(EndpointBehavior { kappa: beta, amplitude: amp }),
                )
            }
            Shape::Gamma { alpha, rate } => {
                let ln_norm = alpha * rate.ln() - ln_gamma_pos(alpha);
                (
                    Support::HalfLine { a: 0.0 },
                    ln_norm,
                    EndpointBehavior { kappa: alpha, amplitude: ln_norm.exp() },
                    None,
                )
            }
            Shape::Weibull { alpha, rate } => {
                let ln_norm = (alpha * rate).ln();
                (
                    Support::HalfLine { a: 0.0 },
                    ln_norm,
                    EndpointBehavior { kappa: alpha, amplitude: alpha * rate },
                    None,
                )
            }
        };
        if !ln_norm.is_finite() {
            return Err(Error::Family(format!("normalizing constant of {} is not representable", kind.name())));
        }
        let spec = FamilySpec { kind, shape, support, left, right, ln_norm };
        spec.check_normalization()?;
        Ok(spec)
    }

    fn check_normalization(&self) -> Result<()> {
        let cfg = QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_levels: 14 };
        let mass = self
            .integrate_u(|p| self.ln_density_at(p).exp(), 0.0, self.support.width(), &cfg)
            .map_err(|e| Error::Family(format!("{self}: normalization check did not converge ({e})")))?;
        if (mass.value - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Family(format!(
                "{self}: density integrates to {} (parameters outside the supported range)",
                mass.value
            )));
        }
        Ok(())
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(FamilyKind::Beta { alpha, beta })
    }

    pub fn gamma(alpha: f64, rate: f64) -> Result<Self> {
        Self::new(FamilyKind::Gamma { alpha, beta: rate })
    }

    pub fn weibull(alpha: f64, rate: f64) -> Result<Self> {
        Self::new(FamilyKind::Weibull { alpha, beta: rate })
    }

    pub fn uniform() -> Self {
        Self::new(FamilyKind::Uniform).expect("uniform is always valid")
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(FamilyKind::Exponential { beta: rate })
    }

    /// Parse a JSON family file body.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        Self::new(FamilyKind::from_parts(&file.name, &file.params)?)
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile { name: self.kind.name().to_string(), params: self.kind.params() }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn left(&self) -> EndpointBehavior {
        self.left
    }

    pub fn right(&self) -> Option<EndpointBehavior> {
        self.right
    }

    pub fn endpoint_behavior(&self) -> (EndpointBehavior, Option<EndpointBehavior>) {
        (self.left, self.right)
    }

    /// The governing exponent: the smaller of the endpoint exponents.
    pub fn kappa(&self) -> f64 {
        match self.right {
            Some(r) => self.left.kappa.min(r.kappa),
            None => self.left.kappa,
        }
    }

    /// Behaviour at `side`, if that endpoint exists.
    pub fn endpoint(&self, side: Side) -> Option<EndpointBehavior> {
        match side {
            Side::Left => Some(self.left),
            Side::Right => self.right,
        }
    }

    /// Characteristic length used to place the half-line quadrature split.
    pub(crate) fn scale(&self) -> f64 {
        match self.shape {
            Shape::Beta { .. } => 1.0,
            Shape::Gamma { alpha, rate } => alpha.max(1.0) / rate,
            Shape::Weibull { alpha, rate } => rate.powf(-1.0 / alpha),
        }
    }

    fn point_of(&self, x: f64) -> Option<Point> {
        if !self.support.contains(x) {
            return None;
        }
        let a = self.support.left();
        Some(match self.support {
            Support::Interval { b, .. } => Point { left: x - a, right: b - x },
            Support::HalfLine { .. } => Point { left: x - a, right: f64::INFINITY },
        })
    }

    fn require_point(&self, x: f64) -> Result<Point> {
        self.point_of(x).ok_or_else(|| Error::domain(format!("x = {x} is outside the open support of {self}")))
    }

    /// f(x); exactly zero outside the open support.
    pub fn density(&self, x: f64) -> f64 {
        match self.point_of(x) {
            Some(p) => self.ln_density_at(p).exp(),
            None => 0.0,
        }
    }

    /// ln f(x) for x in the open support.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        Ok(self.ln_density_at(self.require_point(x)?))
    }

    /// f′(x) for x in the open support.
    pub fn density_prime(&self, x: f64) -> Result<f64> {
        let p = self.require_point(x)?;
        Ok(self.ln_density_at(p).exp() * self.score_at(p))
    }

    pub(crate) fn ln_density_at(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Beta { alpha, beta } => self.ln_norm + power_term(alpha, p.left) + power_term(beta, p.right),
            Shape::Gamma { alpha, rate } => self.ln_norm + power_term(alpha, p.left) - rate * p.left,
            Shape::Weibull { alpha, rate } => self.ln_norm + power_term(alpha, p.left) - rate * p.left.powf(alpha),
        }
    }

    /// The score f′/f.
    pub(crate) fn score_at(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Beta { alpha, beta } => (alpha - 1.0) / p.left - (beta - 1.0) / p.right,
            Shape::Gamma { alpha, rate } => (alpha - 1.0) / p.left - rate,
            Shape::Weibull { alpha, rate } => (alpha - 1.0) / p.left - alpha * rate * p.left.powf(alpha - 1.0),
        }
    }

    /// ln f(x + ε) − ln f(x), where `from` locates x and `to` locates x + ε.
    /// Evaluated term by term so no O(1) logarithms are subtracted.
    pub(crate) fn ln_shift_ratio(&self, from: Point, to: Point, eps: f64) -> f64 {
        let left = |k: f64| {
            if k == 1.0 {
                0.0
            } else {
                (k - 1.0) * (eps / from.left).ln_1p()
            }
        };
        match self.shape {
            Shape::Beta { alpha, beta } => {
                let right = if beta == 1.0 {
                    0.0
                } else if eps <= 0.5 * from.right {
                    (beta - 1.0) * (-eps / from.right).ln_1p()
                } else {
                    (beta - 1.0) * (to.right.ln() - from.right.ln())
                };
                left(alpha) + right
            }
            Shape::Gamma { alpha, rate } => left(alpha) - rate * eps,
            Shape::Weibull { alpha, rate } => {
                let growth = alpha * (eps / from.left).ln_1p();
                let diff = if growth < 1.0 {
                    from.left.powf(alpha) * growth.exp_m1()
                } else {
                    to.left.powf(alpha) - from.left.powf(alpha)
                };
                left(alpha) - rate * diff
            }
        }
    }

    /// Integrate `g` over left-offsets `u ∈ [u0, u1]` (u = x − a); `u1` may be
    /// infinite on a half-line. Points are built from the node's exact
    /// distances to whichever panel end is nearer.
    pub(crate) fn integrate_u<G>(&self, g: G, u0: f64, u1: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
    where
        G: Fn(Point) -> f64,
    {
        if u1.is_infinite() {
            let split = u0 + self.scale();
            let cfg = cfg.split(2);
            let head = self.integrate_u_finite(&g, u0, split, &cfg)?;
            let tail = exp_sinh(|_, d| g(Point { left: split + d, right: f64::INFINITY }), split, &cfg)?;
            return Ok(head + tail);
        }
        self.integrate_u_finite(g, u0, u1, cfg)
    }

    fn integrate_u_finite<G>(&self, g: G, u0: f64, u1: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
    where
        G: Fn(Point) -> f64,
    {
        let width = self.support.width();
        tanh_sinh(
            |_, dlo, dhi| {
                let (left, right) = if dlo <= dhi {
                    let left = u0 + dlo;
                    (left, width - left)
                } else {
                    (u1 - dhi, (width - u1) + dhi)
                };
                g(Point { left, right })
            },
            u0,
            u1,
            cfg,
        )
    }

    /// Whether ∫ f⁻¹ f′² converges at an endpoint with exponent κ: the
    /// integrand behaves like x^(κ−3) unless κ = 1, where f′/f stays bounded.
    fn fisher_endpoint_finite(kappa: f64) -> bool {
        kappa > 2.0 || kappa == 1.0
    }

    fn fisher_cfg(tol: f64) -> Result<QuadratureConfig> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
        }
        Ok(QuadratureConfig { abs_tol: f64::MIN_POSITIVE, rel_tol: tol, max_levels: 14 })
    }

    fn fisher_over(&self, u0: f64, u1: f64, tol: f64) -> Result<f64> {
        let cfg = Self::fisher_cfg(tol)?;
        let r = self.integrate_u(
            |p| {
                let f = self.ln_density_at(p).exp();
                if f == 0.0 {
                    return 0.0;
                }
                let score = self.score_at(p);
                f * score * score
            },
            u0,
            u1,
            &cfg,
        )?;
        Ok(r.value)
    }

    /// J_f = ∫ f⁻¹ (f′)² over the support; `f64::INFINITY` when an endpoint
    /// exponent makes the integrand non-integrable.
    pub fn fisher_integral(&self, tol: f64) -> Result<f64> {
        Self::fisher_cfg(tol)?;
        let finite = Self::fisher_endpoint_finite(self.left.kappa)
            && self.right.is_none_or(|r| Self::fisher_endpoint_finite(r.kappa));
        if !finite {
            return Ok(f64::INFINITY);
        }
        match self.support {
            Support::Interval { a, b } => {
                // Split at the midpoint so each half sees one endpoint.
                let m = 0.5 * (b - a);
                Ok(self.fisher_over(0.0, m, tol)? + self.fisher_over(m, b - a, tol)?)
            }
            Support::HalfLine { .. } => self.fisher_over(0.0, f64::INFINITY, tol),
        }
    }

    /// One-sided Fisher integral J⁻_{f,c} (left) or J⁺_{f,c} (right).
    pub fn fisher_integral_tail(&self, c: f64, side: Side, tol: f64) -> Result<f64> {
        Self::fisher_cfg(tol)?;
        let p = self.require_point(c)?;
        match side {
            Side::Left => {
                if !Self::fisher_endpoint_finite(self.left.kappa) {
                    return Ok(f64::INFINITY);
                }
                self.fisher_over(0.0, p.left, tol)
            }
            Side::Right => {
                if let Some(r) = self.right {
                    if !Self::fisher_endpoint_finite(r.kappa) {
                        return Ok(f64::INFINITY);
                    }
                }
                self.fisher_over(p.left, self.support.width(), tol)
            }
        }
    }
}

/// (k − 1)·ln d, dropping the term when k = 1.
#[inline]
fn power_term(k: f64, d: f64) -> f64 {
    if k == 1.0 {
        0.0
    } else {
        (k - 1.0) * d.ln()
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.kind.params();
        if params.is_empty() {
            write!(f, "{}", self.kind.name())
        } else {
            let joined: Vec<String> = params.iter().map(|p| p.to_string()).collect();
            write!(f, "{}:{}", self.kind.name(), joined.join(","))
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// `beta:α,β`, `gamma:α,β`, `weibull:α,β`, `uniform`, `exp:β`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        let params = match rest {
            None => Vec::new(),
            Some(r) => r
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Family(format!("`{t}` is not a number in `{s}`"))))
                .collect::<Result<Vec<_>>>()?,
        };
        Self::new(FamilyKind::from_parts(name, &params)?)
    }
}

impl Serialize for FamilySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A member f_θ(x) = f(x − θ) of the location family generated by `family`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationShift {
    pub family: FamilySpec,
    pub theta: f64,
}

impl LocationShift {
    pub fn new(family: FamilySpec, theta: f64) -> Self {
        LocationShift { family, theta }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.family.density(x - self.theta)
    }
}

/// One representative of every built-in family, used by catalog listings.
pub fn builtin_examples() -> Vec<FamilySpec> {
    vec![
        FamilySpec::uniform(),
        FamilySpec::exponential(1.0).unwrap(),
        FamilySpec::beta(0.5, 0.5).unwrap(),
        FamilySpec::beta(2.0, 2.0).unwrap(),
        FamilySpec::beta(3.0, 3.0).unwrap(),
        FamilySpec::gamma(2.5, 1.0).unwrap(),
        FamilySpec::weibull(1.5, 1.0).unwrap(),
    ]
}
