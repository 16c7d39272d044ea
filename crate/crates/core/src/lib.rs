//! Relative Rényi entropy between shifted densities with non-regular
//! endpoints: numerical evaluation, small-shift limit constants and the
//! large-deviation bounds built from them.

pub mod asymptotics;
pub mod divergence;
pub mod error;
pub mod families;
pub mod harness;
pub mod ldp_bounds;
pub mod quadrature;
pub mod specfun;

pub use asymptotics::{
    assembled_limit, endpoint_limit_constant, endpoint_scaling, finsler_metric, g_of, limit_constant, scaling_regime,
    LimitConstant, LimitCurve, RegimeKind, ScalingRegime,
};
pub use divergence::{
    affinity_deficiency, endpoint_contribution, hellinger_sq, kl_divergence, overlap_deficit, renyi_divergence,
    DivergenceResult, RenyiOrder,
};
pub use error::{Error, Result};
pub use families::{EndpointBehavior, FamilyKind, FamilySpec, LocationShift, Side, Support};
pub use harness::{
    convergence_study, emit_report, lemma_study, uniformity_study, ConvergenceReport, ConvergenceRow, OutputFormat,
    Report, StudyConfig, StudyError, Sweep, UniformityReport,
};
pub use ldp_bounds::{alpha1_bar, alpha2_bar, optimize_over_s, ArgS, BoundResult, Mode};
pub use quadrature::{integrate_singular, Domain, QuadResult, QuadratureConfig};
pub use specfun::{beta_fn, ln_gamma, log_beta, PositiveReal};
