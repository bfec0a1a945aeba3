//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parameter validation, analysis, and integration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter set violates its structural invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The trade-off conditions required by the scaled model do not hold.
    #[error("trade-off condition violated: {0}")]
    TradeOffViolated(String),
    /// The state/time scale factor of the nondimensionalization is not positive.
    #[error("degenerate scaling: {0}")]
    ScaleDegenerate(String),
    /// A reduced-system state lies outside the invariant manifold X+Y+Z <= C.
    #[error("state off the invariant manifold: X+Y+Z = {sum} exceeds C = {c}")]
    ManifoldViolation { sum: f64, c: f64 },
    /// A saturation denominator of the scaled system is nonpositive.
    #[error("denominator vanishes in scaled system: {0}")]
    DenominatorVanishes(String),
    /// f1(x*) <= f2(x*): the local grazing trade-off fails, so the
    /// coexistence formulas are undefined.
    #[error("local grazing condition violated: f1(x*) = {f1} <= f2(x*) = {f2}")]
    LocalConditionViolated { f1: f64, f2: f64 },
    /// The quadratic for the competition equilibria degenerates to a line.
    #[error("competition equilibrium equation is linear (b2 = 0)")]
    DegenerateQuadratic,
    /// No band with two competition equilibria exists for these parameters.
    #[error("a2* is undefined: a2+ = {a2_plus} does not exceed (1-c)/c = {hat_a2}")]
    StarAbsent { a2_plus: f64, hat_a2: f64 },
    /// A point handed to the classifier is not an equilibrium.
    #[error("not an equilibrium: rhs residual {residual} exceeds {tolerance}")]
    NotAnEquilibrium { residual: f64, tolerance: f64 },
    /// No coexistence equilibrium exists for these parameters.
    #[error("no coexistence equilibrium exists")]
    NoCoexistence,
    /// The eigenvalue solve did not reach its residual bound.
    #[error("ill-conditioned eigenvalue computation: residual {residual} exceeds bound {bound}")]
    IllConditioned { residual: f64, bound: f64 },
    /// The adaptive integrator could not take a step above the size floor.
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    /// A state coordinate went negative beyond the roundoff clamp tolerance.
    #[error("state coordinate {index} = {value} negative beyond tolerance at t = {t}")]
    NegativeStateBeyondTolerance { index: usize, value: f64, t: f64 },
    /// A region-defining inequality is within the marginality tolerance.
    #[error("on a region boundary: {0}")]
    OnBoundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;
