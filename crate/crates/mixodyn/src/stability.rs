//! Stability classification: the trace/determinant/minor criterion for 3x3
//! matrices, a closed-form cubic eigenvalue solver used as its oracle, the
//! per-equilibrium classification, and the qualitative regime of each
//! invariant plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    eval_structural_derivatives, eval_structural_functions, Jacobian3,
};
use crate::equilibria::{competition_roots, EquilibriumKind, EquilibriumRecord};
use crate::error::{Error, Result};
use crate::model::ScaledParams;

const MARGIN_EPS: f64 = 1e-9;

/// Verdict of the three-part stability criterion on a 3x3 matrix: all
/// eigenvalues have negative real parts iff (i) `Tr A < 0`, (ii) `det A < 0`,
/// and (iii) `Tr A * (sum of principal 2x2 minors) - det A < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhVerdict {
    pub trace_neg: bool,
    pub det_neg: bool,
    pub third_neg: bool,
    pub stable: bool,
    /// Set when criterion (ii) or (iii) sits within tolerance of zero, where
    /// eigenvalues may have vanishing real part.
    pub marginal: bool,
}

impl RhVerdict {
    /// Index (1-based) of the first failing criterion, if any.
    pub fn failing_criterion(&self) -> Option<u8> {
        if !self.trace_neg {
            Some(1)
        } else if !self.det_neg {
            Some(2)
        } else if !self.third_neg {
            Some(3)
        } else {
            None
        }
    }
}

/// Evaluates the matrix-form stability criterion.
pub fn routh_hurwitz(a: &Jacobian3) -> RhVerdict {
    let trace = a.trace();
    let det = a.det();
    let minors = a.minor_sum();
    let third = trace * minors - det;
    let n = a.norm_inf().max(1.0);
    let det_tol = MARGIN_EPS * n * n * n;
    let third_tol = MARGIN_EPS * n * n * n * n;
    let trace_neg = trace < 0.0;
    let det_neg = det < 0.0;
    let third_neg = third < 0.0;
    RhVerdict {
        trace_neg,
        det_neg,
        third_neg,
        stable: trace_neg && det_neg && third_neg,
        marginal: det.abs() <= det_tol || third.abs() <= third_tol,
    }
}

/// Eigenvalues of a 3x3 matrix from the closed-form solution of its
/// characteristic cubic, polished with complex Newton steps.
pub fn eigenvalue_oracle(a: &Jacobian3) -> Result<[Complex64; 3]> {
    // Characteristic polynomial: l^3 - Tr l^2 + (minor sum) l - det.
    let c2 = -a.trace();
    let c1 = a.minor_sum();
    let c0 = -a.det();
    let mut roots = cubic_roots(c2, c1, c0);

    let p = |l: Complex64| ((l + c2) * l + c1) * l + c0;
    let dp = |l: Complex64| (3.0 * l + 2.0 * c2) * l + c1;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = dp(*r);
            if d.norm() > 0.0 {
                *r -= p(*r) / d;
            }
        }
    }

    let n = a.norm_inf();
    let bound = 1e-8 * (1.0 + n * n * n);
    let worst = roots.iter().map(|r| p(*r).norm()).fold(0.0, f64::max);
    if worst > bound {
        return Err(Error::IllConditioned {
            residual: worst,
            bound,
        });
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    Ok(roots)
}

/// Roots of `l^3 + c2 l^2 + c1 l + c0`.
fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Depressed form t^3 + p t + q with l = t - c2/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc > 0.0 {
        // One real root, one conjugate pair.
        let s = disc.sqrt();
        let u = (-half_q + s).cbrt();
        let v = (-half_q - s).cbrt();
        let t_real = u + v;
        let re = -t_real / 2.0;
        let im = (u - v) * (3.0f64).sqrt() / 2.0;
        [
            Complex64::new(t_real - shift, 0.0),
            Complex64::new(re - shift, im),
            Complex64::new(re - shift, -im),
        ]
    } else if p == 0.0 {
        // Triple root.
        let t = (-q).cbrt();
        [Complex64::new(t - shift, 0.0); 3]
    } else {
        // Three real roots via the trigonometric form.
        let r = (-third_p).sqrt();
        let arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let angle = theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            *slot = Complex64::new(2.0 * r * angle.cos() - shift, 0.0);
        }
        out
    }
}

/// Coarse stability category of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverallStability {
    Stable,
    Saddle,
    Unstable,
    HopfBoundary,
}

/// Stability within a 2D invariant plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanarVerdict {
    Stable,
    Saddle,
    Unstable,
}

/// Full classification of one equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumClassification {
    pub kind: EquilibriumKind,
    /// Verdict within the invariant plane the equilibrium lives in, when one
    /// applies.
    pub planar_stability: Option<PlanarVerdict>,
    /// Invasion eigenvalue of the missing species, for boundary equilibria.
    pub transversal_eigenvalue: Option<f64>,
    pub overall: OverallStability,
}

/// Classifies an equilibrium using the block structure of its isocline-form
/// Jacobian: diagonal at washout, triangular at the carrying capacities,
/// block-diagonal at the predator-prey point, corner blocks at competition
/// points, and the full three-part criterion at coexistence.
pub fn classify_equilibrium(
    e: &EquilibriumRecord,
    sp: &ScaledParams,
) -> Result<EquilibriumClassification> {
    sp.require_saturated()?;
    let residual = e.residual(sp);
    if residual > 1e-6 {
        return Err(Error::NotAnEquilibrium {
            residual,
            tolerance: 1e-6,
        });
    }
    let v_star = eval_structural_functions(sp.x_star, sp);
    let classification = match e.kind {
        EquilibriumKind::Washout => EquilibriumClassification {
            kind: e.kind,
            planar_stability: None,
            // Eigenvalues 1/k > 0, psi(0) < 0, c > 0: always a saddle.
            transversal_eigenvalue: None,
            overall: OverallStability::Saddle,
        },
        EquilibriumKind::CarryingCapacity => {
            let v1 = eval_structural_functions(1.0, sp);
            // In the predator-prey plane (1, 0) is a saddle herbivores always
            // invade (psi(1) > 0 since x* < 1); the mixotroph invasion
            // eigenvalue G(1) changes sign at a2 = k(1-c).
            EquilibriumClassification {
                kind: e.kind,
                planar_stability: Some(PlanarVerdict::Saddle),
                transversal_eigenvalue: Some(v1.g),
                overall: OverallStability::Saddle,
            }
        }
        EquilibriumKind::MixotrophCC => {
            let lead = (1.0 - (1.0 + sp.a2) * sp.c) / sp.k;
            let planar = if lead < 0.0 {
                PlanarVerdict::Stable
            } else {
                PlanarVerdict::Saddle
            };
            EquilibriumClassification {
                kind: e.kind,
                planar_stability: Some(planar),
                // Herbivores never invade: psi(0) < 0.
                transversal_eigenvalue: Some(
                    -sp.a1 * sp.x_star / (sp.k * (1.0 + sp.b1 * sp.x_star)),
                ),
                overall: if lead < 0.0 {
                    OverallStability::Stable
                } else {
                    OverallStability::Saddle
                },
            }
        }
        EquilibriumKind::PredatorPrey => {
            let d = eval_structural_derivatives(sp.x_star, sp);
            let planar = if d.big_f1 < 0.0 {
                PlanarVerdict::Stable
            } else {
                PlanarVerdict::Unstable
            };
            let transversal = v_star.g - v_star.big_f1;
            let overall = match (planar, transversal > 0.0) {
                (PlanarVerdict::Stable, false) => OverallStability::Stable,
                (PlanarVerdict::Stable, true) => OverallStability::Saddle,
                (_, false) => OverallStability::Saddle,
                (_, true) => OverallStability::Unstable,
            };
            EquilibriumClassification {
                kind: e.kind,
                planar_stability: Some(planar),
                transversal_eigenvalue: Some(transversal),
                overall,
            }
        }
        EquilibriumKind::CompetitionMinus | EquilibriumKind::CompetitionPlus => {
            let x = e.point.x;
            let v = eval_structural_functions(x, sp);
            let d = eval_structural_derivatives(x, sp);
            // Corner 2x2 block of the Jacobian: det = f2*G*(G' - F2'),
            // trace = f2*F2' - G (using F2 = G at the point).
            let det = v.f2 * v.g * (d.g - d.big_f2);
            let trace = v.f2 * d.big_f2 - v.g;
            let planar = if det < 0.0 {
                PlanarVerdict::Saddle
            } else if trace < 0.0 {
                PlanarVerdict::Stable
            } else {
                PlanarVerdict::Unstable
            };
            let transversal = v.psi;
            let overall = match (planar, transversal > 0.0) {
                (PlanarVerdict::Stable, false) => OverallStability::Stable,
                (PlanarVerdict::Stable, true) => OverallStability::Saddle,
                (PlanarVerdict::Unstable, true) => OverallStability::Unstable,
                _ => OverallStability::Saddle,
            };
            EquilibriumClassification {
                kind: e.kind,
                planar_stability: Some(planar),
                transversal_eigenvalue: Some(transversal),
                overall,
            }
        }
        EquilibriumKind::Coexistence => {
            let verdict = routh_hurwitz(&e.jacobian);
            let overall = if verdict.marginal {
                OverallStability::HopfBoundary
            } else if verdict.stable {
                OverallStability::Stable
            } else {
                // det < 0 rules out zero eigenvalues; count unstable
                // directions from the oracle.
                let eigs = eigenvalue_oracle(&e.jacobian)?;
                let unstable = eigs.iter().filter(|l| l.re > 0.0).count();
                if unstable == 3 {
                    OverallStability::Unstable
                } else {
                    OverallStability::Saddle
                }
            };
            EquilibriumClassification {
                kind: e.kind,
                planar_stability: None,
                transversal_eigenvalue: None,
                overall,
            }
        }
    };
    Ok(classification)
}

/// Theorem-based sufficient check for coexistence stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SufficiencyVerdict {
    /// All three sufficient criteria hold: F1'(x*) < 0, G'(x*) > 0, and
    /// f1 f2' - f1' f2 > 0 at x*.
    StableByTheorem,
    Inconclusive,
}

/// Evaluates the sufficient stability criteria for the coexistence
/// equilibrium; `StableByTheorem` must imply a stable three-part verdict.
pub fn coexistence_sufficient_stability(sp: &ScaledParams) -> Result<SufficiencyVerdict> {
    let e = crate::equilibria::coexistence_equilibrium(sp)?.ok_or(Error::NoCoexistence)?;
    let _ = e;
    let v = eval_structural_functions(sp.x_star, sp);
    let d = eval_structural_derivatives(sp.x_star, sp);
    let wronskian = v.f1 * d.f2 - d.f1 * v.f2;
    if d.big_f1 < 0.0 && d.g > 0.0 && wronskian > 0.0 {
        Ok(SufficiencyVerdict::StableByTheorem)
    } else {
        Ok(SufficiencyVerdict::Inconclusive)
    }
}

/// Which invariant plane a regime report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    PredatorPrey,
    Competition,
}

/// Qualitative regime of a 2D invariant plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneRegimeKind {
    /// Every positive solution in the plane converges to an equilibrium.
    GloballyStableEq,
    /// The plane possesses a unique stable limit cycle.
    UniqueLimitCycle,
    /// All planar solutions converge to some equilibrium.
    ConvergesToEquilibrium,
    /// None of the no-cycle criteria applies; planar cycles may exist.
    CyclesPossible,
}

/// Why a competition-plane regime rules out cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoCycleReason {
    GDecreasing,
    F2Decreasing,
    NoInteriorEquilibria,
}

/// Regime of one invariant plane, with the scalar witnesses behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRegime {
    pub plane: Plane,
    pub regime: PlaneRegimeKind,
    pub reason: Option<NoCycleReason>,
    pub witnesses: Vec<(String, f64)>,
}

/// Regime of the predator-prey plane: a unique stable limit cycle for
/// `0 < x* < x_H`, a globally stable equilibrium otherwise, where `x_H` is
/// the positive critical point of F1.
pub fn predator_prey_regime(sp: &ScaledParams) -> PlaneRegime {
    let mut witnesses = Vec::new();
    let x_h = if sp.b1 > 1.0 + 1.0 / sp.a1 {
        let x = (-sp.a1 - 1.0 + (sp.a1 * sp.a1 + sp.a1 + sp.a1 * sp.b1).sqrt()) / sp.b1;
        witnesses.push(("x_H".to_string(), x));
        Some(x)
    } else {
        None
    };
    let regime = match x_h {
        Some(x_h) if sp.x_star < x_h => PlaneRegimeKind::UniqueLimitCycle,
        _ => PlaneRegimeKind::GloballyStableEq,
    };
    PlaneRegime {
        plane: Plane::PredatorPrey,
        regime,
        reason: None,
        witnesses,
    }
}

/// Regime of the competition plane: convergence to an equilibrium is
/// guaranteed when G decreases (`a2 < k`), when F2 decreases on the relevant
/// range, or when no interior equilibria exist; otherwise cycles are
/// possible. Also reports the planar-stability margin of `(x+, 0, G(x+))`.
pub fn competition_plane_regime(sp: &ScaledParams) -> PlaneRegime {
    let mut witnesses = Vec::new();
    witnesses.push(("g_slope".to_string(), -1.0 + sp.a2 / sp.k));

    let f2_crit = if sp.b2 > 1.0 + 1.0 / sp.a2 {
        let x = (-sp.a2 - 1.0 + (sp.a2 * sp.a2 + sp.a2 + sp.a2 * sp.b2).sqrt()) / sp.b2;
        witnesses.push(("f2_critical_point".to_string(), x));
        Some(x)
    } else {
        None
    };

    let roots = competition_roots(sp, sp.a2);
    witnesses.push(("n_comp_eq".to_string(), roots.len() as f64));
    if let Some(margin) = crate::equilibria::comp_plus_planar_margin(sp, sp.a2) {
        witnesses.push(("x_plus_planar_margin".to_string(), margin));
    }

    let reason = if sp.a2 < sp.k {
        Some(NoCycleReason::GDecreasing)
    } else if f2_crit.map_or(true, |x| x >= 1.0) {
        Some(NoCycleReason::F2Decreasing)
    } else if roots.is_empty() {
        Some(NoCycleReason::NoInteriorEquilibria)
    } else {
        None
    };
    PlaneRegime {
        plane: Plane::Competition,
        regime: if reason.is_some() {
            PlaneRegimeKind::ConvergesToEquilibrium
        } else {
            PlaneRegimeKind::CyclesPossible
        },
        reason,
        witnesses,
    }
}
