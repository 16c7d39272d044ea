//! Small-shift limits of I^s(f_θ ‖ f_{θ+ε}) / g(ε).
//!
//! The governing exponent is κ = min(κ₁, κ₂). Endpoints whose exponent
//! exceeds κ contribute o(g(ε)) and have their amplitude zeroed. Each
//! endpoint then contributes one closed-form term; the limit is their sum,
//! and the endpoint-diagnostic limits are the same terms negated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, Side, Support};
use crate::specfun::log_beta_pos;

/// Relative tolerance for the Fisher integrals behind the κ > 2 constants.
pub const FISHER_TOL: f64 = 1e-13;

/// Exponents this close to 1 or 2 (but not equal) are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// g(ε) = ε^κ, 0 < κ < 2.
    PowerKappa,
    /// g(ε) = −ε² ln ε, κ = 2.
    EpsSqLog,
    /// g(ε) = ε², κ > 2.
    EpsSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub kind: RegimeKind,
    pub kappa: f64,
}

impl fmt::Display for ScalingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RegimeKind::PowerKappa => write!(f, "PowerKappa({})", self.kappa),
            RegimeKind::EpsSqLog => f.write_str("EpsSqLog"),
            RegimeKind::EpsSq => f.write_str("EpsSq"),
        }
    }
}

impl ScalingRegime {
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::domain(format!("endpoint exponent must be positive, got {kappa}")));
        }
        for edge in [1.0, 2.0] {
            if kappa != edge && (kappa - edge).abs() < BOUNDARY_GUARD {
                return Err(Error::domain(format!(
                    "κ = {kappa} is within {BOUNDARY_GUARD:e} of the regime boundary {edge}; \
                     pass the boundary value exactly"
                )));
            }
        }
        let kind = if kappa < 2.0 {
            RegimeKind::PowerKappa
        } else if kappa == 2.0 {
            RegimeKind::EpsSqLog
        } else {
            RegimeKind::EpsSq
        };
        Ok(ScalingRegime { kind, kappa })
    }

    /// g(ε).
    pub fn g(&self, eps: f64) -> Result<f64> {
        g_of(self, eps)
    }
}

/// Scaling regime keyed on the family's governing exponent.
pub fn scaling_regime(family: &FamilySpec) -> Result<ScalingRegime> {
    ScalingRegime::from_kappa(family.kappa())
}

/// The normalization g(ε) of the regime.
pub fn g_of(regime: &ScalingRegime, eps: f64) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!("ε must be positive, got {eps}")));
    }
    match regime.kind {
        RegimeKind::PowerKappa => Ok(eps.powf(regime.kappa)),
        RegimeKind::EpsSqLog => {
            if eps >= 1.0 {
                return Err(Error::domain(format!("−ε² ln ε needs ε < 1, got {eps}")));
            }
            Ok(-eps * eps * eps.ln())
        }
        RegimeKind::EpsSq => Ok(eps * eps),
    }
}

/// Closed-form limit with its per-endpoint assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstant {
    pub value: f64,
    pub regime: ScalingRegime,
    pub left_term: f64,
    pub right_term: f64,
}

/// Contribution of one endpoint with exponent κ < 2 (or = 2) and
/// amplitude A; `sigma` is s for the left end and 1 − s for the right.
fn endpoint_term(kappa: f64, amplitude: f64, sigma: f64) -> f64 {
    if amplitude == 0.0 || sigma == 0.0 {
        return 0.0;
    }
    let first = sigma + kappa * (1.0 - sigma);
    if kappa < 1.0 {
        (1.0 - kappa) / kappa * amplitude * sigma * log_beta_pos(first, 1.0 - kappa).exp()
    } else if kappa == 1.0 {
        amplitude * sigma
    } else if kappa < 2.0 {
        amplitude * sigma * (1.0 - sigma * (kappa - 1.0)) * log_beta_pos(first, 2.0 - kappa).exp() / kappa
    } else {
        amplitude * sigma * (1.0 - sigma) / 2.0
    }
}

fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("s must lie in (0, 1), got {s}")))
    }
}

/// The limit as a function of s for one family, with the family-dependent
/// pieces (amplitudes after zeroing, Fisher integrals) computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCurve {
    regime: ScalingRegime,
    left_amplitude: f64,
    right_amplitude: f64,
    /// J⁻ and J⁺ at the reference split, κ > 2 only.
    fisher_split: Option<(f64, f64)>,
}

impl LimitCurve {
    pub fn new(family: &FamilySpec) -> Result<Self> {
        let regime = scaling_regime(family)?;
        let kappa = regime.kappa;
        let (left, right) = family.endpoint_behavior();
        let left_amplitude = if left.kappa == kappa { left.amplitude } else { 0.0 };
        let right_amplitude = match right {
            Some(r) if r.kappa == kappa => r.amplitude,
            _ => 0.0,
        };
        let fisher_split = if regime.kind == RegimeKind::EpsSq {
            let c = reference_split(family);
            let lo = family.fisher_integral_tail(c, Side::Left, FISHER_TOL)?;
            let hi = family.fisher_integral_tail(c, Side::Right, FISHER_TOL)?;
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::Numerical(format!("{family}: Fisher integral is not finite")));
            }
            Some((lo, hi))
        } else {
            None
        };
        Ok(LimitCurve { regime, left_amplitude, right_amplitude, fisher_split })
    }

    pub fn regime(&self) -> ScalingRegime {
        self.regime
    }

    /// J_f, for κ > 2.
    pub fn fisher(&self) -> Option<f64> {
        self.fisher_split.map(|(lo, hi)| lo + hi)
    }

    /// Evaluate on the closed interval [0, 1]; the formulas extend
    /// continuously to the ends.
    pub(crate) fn terms(&self, s: f64) -> (f64, f64) {
        match self.fisher_split {
            Some((lo, hi)) => {
                let w = s * (1.0 - s) / 2.0;
                (w * lo, w * hi)
            }
            None => {
                let k = self.regime.kappa;
                (endpoint_term(k, self.left_amplitude, s), endpoint_term(k, self.right_amplitude, 1.0 - s))
            }
        }
    }

    pub(crate) fn value_closed(&self, s: f64) -> f64 {
        let (l, r) = self.terms(s);
        l + r
    }

    pub fn at(&self, s: f64) -> Result<LimitConstant> {
        check_order(s)?;
        let (left_term, right_term) = self.terms(s);
        Ok(LimitConstant { value: left_term + right_term, regime: self.regime, left_term, right_term })
    }
}

/// Split point for the reference J⁻/J⁺ decomposition: the interval
/// midpoint, or the family scale on a half-line.
fn reference_split(family: &FamilySpec) -> f64 {
    match family.support() {
        Support::Interval { a, b } => 0.5 * (a + b),
        Support::HalfLine { a } => a + family.scale(),
    }
}

/// lim I^s(f_θ ‖ f_{θ+ε}) / g(ε) as ε → +0.
pub fn limit_constant(family: &FamilySpec, s: f64) -> Result<LimitConstant> {
    check_order(s)?;
    LimitCurve::new(family)?.at(s)
}

/// Normalization under which the endpoint piece on `side` has a finite
/// limit. Interval endpoints share the family regime. The tail of a
/// half-line is smooth and always scales like ε².
pub fn endpoint_scaling(family: &FamilySpec, side: Side) -> Result<ScalingRegime> {
    let regime = scaling_regime(family)?;
    Ok(match (family.support(), side) {
        (Support::HalfLine { .. }, Side::Right) => ScalingRegime { kind: RegimeKind::EpsSq, ..regime },
        _ => regime,
    })
}

/// lim I^±_s(c, f, ε) / g(ε), with g from [`endpoint_scaling`]. The split
/// point `c` only matters where the limit involves J^∓_{f,c}.
pub fn endpoint_limit_constant(family: &FamilySpec, side: Side, s: f64, c: f64) -> Result<f64> {
    check_order(s)?;
    if !family.support().contains(c) {
        return Err(Error::domain(format!("split point {c} is outside the support of {family}")));
    }
    if endpoint_scaling(family, side)?.kind == RegimeKind::EpsSq {
        let j = family.fisher_integral_tail(c, side, FISHER_TOL)?;
        if !j.is_finite() {
            return Err(Error::Numerical(format!("{family}: one-sided Fisher integral is not finite")));
        }
        return Ok(-s * (1.0 - s) / 2.0 * j);
    }
    let (l, r) = LimitCurve::new(family)?.terms(s);
    Ok(match side {
        Side::Left => -l,
        Side::Right => -r,
    })
}

/// −(I⁻ + I⁺) limits recombined in the family's own normalization. A
/// half-line tail only enters when it scales like the whole divergence.
pub fn assembled_limit(family: &FamilySpec, s: f64, c: f64) -> Result<f64> {
    let regime = scaling_regime(family)?;
    let mut total = 0.0;
    for side in [Side::Left, Side::Right] {
        if endpoint_scaling(family, side)?.kind == regime.kind {
            total -= endpoint_limit_constant(family, side, s, c)?;
        }
    }
    Ok(total)
}

/// Minkowski metric F = (2·C_{1/2})^(1/κ), reading H in its definition as
/// the squared Hellinger distance (H² ≈ 2 I^{1/2}).
pub fn finsler_metric(family: &FamilySpec) -> Result<f64> {
    let curve = LimitCurve::new(family)?;
    let regime = curve.regime();
    if regime.kind != RegimeKind::PowerKappa {
        return Err(Error::domain(format!(
            "the Minkowski metric is defined for κ < 2; {family} has κ = {}",
            regime.kappa
        )));
    }
    Ok((2.0 * curve.at(0.5)?.value).powf(1.0 / regime.kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fam(s: &str) -> FamilySpec {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn regimes() {
        let r = scaling_regime(&fam("beta:0.5,0.5")).unwrap();
        assert_eq!((r.kind, r.kappa), (RegimeKind::PowerKappa, 0.5));
        assert_eq!(scaling_regime(&fam("beta:2,2")).unwrap().kind, RegimeKind::EpsSqLog);
        assert_eq!(scaling_regime(&fam("gamma:2.5,1")).unwrap().kind, RegimeKind::EpsSq);
        assert_eq!(scaling_regime(&fam("beta:1.5,3")).unwrap().kappa, 1.5);
        assert_eq!(scaling_regime(&fam("uniform")).unwrap().to_string(), "PowerKappa(1)");
        assert!(scaling_regime(&fam("beta:1.0000000001,3")).is_err());
        assert!(scaling_regime(&fam("gamma:2.0000000001,1")).is_err());
    }

    #[test]
    fn g_values() {
        let p = ScalingRegime::from_kappa(0.5).unwrap();
        assert!(close(g_of(&p, 1e-4).unwrap(), 1e-2, 1e-15));
        let l = ScalingRegime::from_kappa(2.0).unwrap();
        assert!(close(g_of(&l, 1e-3).unwrap(), 1e-6 * 1000f64.ln(), 1e-15));
        assert!(g_of(&l, 1.0).is_err());
        let q = ScalingRegime::from_kappa(3.0).unwrap();
        assert!(close(g_of(&q, 1e-3).unwrap(), 1e-6, 1e-15));
        assert!(g_of(&q, 0.0).is_err());
    }

    #[test]
    fn limit_examples() {
        for s in [0.1, 0.5, 0.7] {
            assert!(close(limit_constant(&fam("uniform"), s).unwrap().value, 1.0, 1e-15));
            assert!(close(limit_constant(&fam("exp:2.5"), s).unwrap().value, 2.5 * s, 1e-15));
        }
        assert!(close(limit_constant(&fam("beta:3,3"), 0.5).unwrap().value, 5.0, 1e-12));
        let b = limit_constant(&fam("beta:0.5,0.5"), 0.5).unwrap().value;
        let want = log_beta_pos(0.75, 0.5).exp() / PI;
        assert!(close(b, want, 1e-14));
        assert!(limit_constant(&fam("uniform"), 0.0).is_err());
        assert!(limit_constant(&fam("uniform"), 1.0).is_err());
    }

    #[test]
    fn subdominant_endpoint_is_zeroed() {
        // κ₁ < κ₂ and the mirrored κ₂ < κ₁ both keep only the smaller end.
        let lc = limit_constant(&fam("beta:0.5,1.5"), 0.3).unwrap();
        assert_eq!(lc.right_term, 0.0);
        assert!(lc.left_term > 0.0);
        let rc = limit_constant(&fam("beta:1.5,0.5"), 0.7).unwrap();
        assert_eq!(rc.left_term, 0.0);
        assert!(close(rc.right_term, lc.left_term, 1e-14));
    }

    #[test]
    fn endpoint_limit_examples() {
        for s in [0.2, 0.6] {
            let u = endpoint_limit_constant(&fam("uniform"), Side::Left, s, 0.5).unwrap();
            assert!(close(u, -s, 1e-15));
        }
        let r = endpoint_limit_constant(&fam("beta:3,3"), Side::Right, 0.5, 0.5).unwrap();
        assert!(close(r, -2.5, 1e-12));
        let e = endpoint_limit_constant(&fam("exp:1"), Side::Right, 0.3, 1.0).unwrap();
        assert!(close(e, -0.105 * (-1.0f64).exp(), 1e-12));
    }

    #[test]
    fn assembly_identity_on_all_regimes() {
        let specs = [
            "uniform",
            "exp:2",
            "beta:0.5,0.5",
            "beta:0.3,0.8",
            "beta:1.5,0.7",
            "beta:1,3",
            "beta:1.5,1.5",
            "beta:2,2",
            "beta:2,4",
            "beta:3,3",
            "beta:2.5,4",
            "gamma:0.5,1",
            "gamma:1.5,2",
            "gamma:2,1",
            "gamma:2.5,1",
            "weibull:0.8,1",
            "weibull:1.5,1",
            "weibull:3,2",
        ];
        for spec in specs {
            let f = fam(spec);
            let c = reference_split(&f);
            for s in [0.1, 0.37, 0.5, 0.9] {
                let whole = limit_constant(&f, s).unwrap().value;
                let pieces = assembled_limit(&f, s, c).unwrap();
                assert!((whole - pieces).abs() <= 1e-12 * whole.abs(), "{spec} s={s}: {whole} vs {pieces}");
            }
        }
    }

    #[test]
    fn symmetric_beta_is_symmetric_in_s() {
        for a in [0.4, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let f = FamilySpec::beta(a, a).unwrap();
            for s in [0.05, 0.2, 0.45] {
                let x = limit_constant(&f, s).unwrap().value;
                let y = limit_constant(&f, 1.0 - s).unwrap().value;
                assert!((x - y).abs() <= 1e-12 * x, "α={a} s={s}");
            }
        }
    }

    #[test]
    fn flat_above_two_and_positive_everywhere() {
        for spec in ["beta:3,3", "gamma:2.5,1", "weibull:3,2"] {
            let curve = LimitCurve::new(&fam(spec)).unwrap();
            let j = curve.fisher().unwrap();
            for i in 1..100 {
                let s = i as f64 / 100.0;
                let v = curve.at(s).unwrap().value / (s * (1.0 - s));
                assert!((v - j / 2.0).abs() <= 1e-12 * j, "{spec} s={s}");
            }
        }
        for f in crate::families::builtin_examples() {
            let curve = LimitCurve::new(&f).unwrap();
            let values: Vec<f64> = (1..1000).map(|i| curve.at(i as f64 / 1000.0).unwrap().value).collect();
            assert!(values.iter().all(|&v| v > 0.0 && v.is_finite()), "{f}");
            // Continuity: no jump dwarfs the neighbouring slope.
            for w in values.windows(3) {
                let local = (w[1] - w[0]).abs().max((w[2] - w[1]).abs());
                let typical = 0.5 * ((w[1] - w[0]).abs() + (w[2] - w[1]).abs());
                assert!(local <= 10.0 * typical.max(1e-12 * w[1]), "{f}");
            }
        }
    }

    #[test]
    fn half_line_tail_scales_like_eps_squared() {
        let f = fam("exp:1");
        assert_eq!(endpoint_scaling(&f, Side::Right).unwrap().kind, RegimeKind::EpsSq);
        assert_eq!(endpoint_scaling(&f, Side::Left).unwrap().kind, RegimeKind::PowerKappa);
        assert_eq!(endpoint_scaling(&fam("beta:0.5,2"), Side::Right).unwrap().kind, RegimeKind::PowerKappa);
    }

    #[test]
    fn finsler_examples() {
        assert!(close(finsler_metric(&fam("uniform")).unwrap(), 2.0, 1e-15));
        assert!(close(finsler_metric(&fam("exp:1.7")).unwrap(), 1.7, 1e-15));
        let b = finsler_metric(&fam("beta:0.5,0.5")).unwrap();
        let c = log_beta_pos(0.75, 0.5).exp() / PI;
        assert!(close(b, (2.0 * c).powi(2), 1e-14));
        assert!(finsler_metric(&fam("beta:2,2")).is_err());
        assert!(finsler_metric(&fam("gamma:3,1")).is_err());
    }
}
