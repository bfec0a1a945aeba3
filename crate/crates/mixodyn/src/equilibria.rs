//! Equilibria of the saturated system and the `a2` thresholds that organize
//! the parameter plane.
//!
//! Four boundary equilibria always exist: washout `(0,0,0)`, the autotroph
//! carrying capacity `(1,0,0)`, the mixotroph carrying capacity `(0,0,c)`,
//! and the predator-prey point `(x*, F1(x*), 0)`. Up to two competition
//! equilibria `(x±, 0, G(x±))` solve a quadratic in the unit interval, and a
//! unique coexistence equilibrium exists exactly when
//! `F1(x*) < G(x*) < F2(x*)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    eval_structural_functions, jacobian_isocline, rhs_saturated, Jacobian3, State3,
};
use crate::error::{Error, Result};
use crate::model::ScaledParams;

/// Which equilibrium of the saturated system a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Washout,
    CarryingCapacity,
    MixotrophCC,
    PredatorPrey,
    CompetitionMinus,
    CompetitionPlus,
    Coexistence,
}

/// An equilibrium point with its isocline-form Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub point: State3,
    pub kind: EquilibriumKind,
    pub jacobian: Jacobian3,
}

impl EquilibriumRecord {
    fn at(point: State3, kind: EquilibriumKind, sp: &ScaledParams) -> Self {
        Self {
            point,
            kind,
            jacobian: jacobian_isocline(point, sp),
        }
    }

    /// Max-norm of the saturated right-hand side at the recorded point.
    pub fn residual(&self, sp: &ScaledParams) -> f64 {
        rhs_saturated(self.point, sp)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// The `a2` thresholds of the competition plane and the coexistence window.
///
/// `check_a2 = k(1-c)` and `hat_a2 = (1-c)/c` bound the one-equilibrium band;
/// `a2_star` (when present) closes the two-equilibria band above `hat_a2`;
/// `breve_a2 < a2 < tilde_a2` is the coexistence-existence window at the
/// given `x_star`; `hopf_comp_a2` is the numerically located loss of planar
/// stability of `(x+, 0, G(x+))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub check_a2: f64,
    pub hat_a2: f64,
    pub breve_a2: f64,
    pub tilde_a2: f64,
    pub underline_a2: f64,
    pub a2_plus: f64,
    pub a2_minus: f64,
    pub a2_star: Option<f64>,
    pub hopf_comp_a2: Option<f64>,
}

/// Coefficients (quadratic, linear, constant) of the competition-equilibrium
/// polynomial `q(x) = a2*b2*x^2 + (a2(a2+1-k) - b2*k(1-c))*x + k*c*a2 - k(1-c)`.
pub fn q_coefficients(sp: &ScaledParams, a2: f64) -> (f64, f64, f64) {
    (
        a2 * sp.b2,
        a2 * (a2 + 1.0 - sp.k) - sp.b2 * sp.k * (1.0 - sp.c),
        sp.k * sp.c * a2 - sp.k * (1.0 - sp.c),
    )
}

/// Evaluates `q(x)`; its sign equals the sign of `G(x) - F2(x)`.
pub fn q_eval(sp: &ScaledParams, a2: f64, x: f64) -> f64 {
    let (qa, qb, qc) = q_coefficients(sp, a2);
    (qa * x + qb) * x + qc
}

/// The minimum point of `q` when it is a genuine parabola.
pub fn q_min_point(sp: &ScaledParams, a2: f64) -> Option<f64> {
    if sp.b2 == 0.0 || a2 == 0.0 {
        return None;
    }
    Some((-a2 * a2 - a2 * (1.0 - sp.k) + sp.b2 * sp.k * (1.0 - sp.c)) / (2.0 * a2 * sp.b2))
}

/// The discriminant-style quartic `q*(a2) = 4 a2 b2 q(x̌)` whose root in
/// `[(1-c)/c, a2+]` closes the two-equilibria band.
pub fn q_star(sp: &ScaledParams, a2: f64) -> f64 {
    let (a2_plus, a2_minus) = a2_plus_minus(sp);
    let double_root_term = (a2 - a2_plus) * (a2 - a2_minus);
    4.0 * a2 * sp.b2 * sp.k * sp.c * (a2 - (1.0 - sp.c) / sp.c) - double_root_term * double_root_term
}

/// Roots of `-a2^2 - a2(1-k) + b2 k (1-c) = 0`, returned as (plus, minus).
pub fn a2_plus_minus(sp: &ScaledParams) -> (f64, f64) {
    let half_b = 0.5 * (1.0 - sp.k);
    let rad = (half_b * half_b + sp.b2 * sp.k * (1.0 - sp.c)).sqrt();
    (-half_b + rad, -half_b - rad)
}

/// Lower edge of the coexistence window: `a2` where `G(x*) = F1(x*)`.
pub fn breve_a2(sp: &ScaledParams) -> f64 {
    let q1 = 1.0 + sp.a1 / (1.0 + sp.b1 * sp.x_star);
    (sp.k * (1.0 - sp.x_star) - sp.k * (sp.c - sp.x_star) * q1) / (sp.x_star * q1)
}

/// Upper edge of the coexistence window: the positive root in `a2` of
/// `q(x*) = 0`.
pub fn tilde_a2(sp: &ScaledParams) -> f64 {
    let x = sp.x_star;
    // x*a2^2 + (k c + (1-k) x + b2 x^2) a2 - k(1-c)(1+b2 x) = 0; the constant
    // term is negative, so exactly one root is positive.
    let qa = x;
    let qb = sp.k * sp.c + (1.0 - sp.k) * x + sp.b2 * x * x;
    let qc = -sp.k * (1.0 - sp.c) * (1.0 + sp.b2 * x);
    let rad = (qb * qb - 4.0 * qa * qc).sqrt();
    // qb > 0, so the stable evaluation of the positive root divides by qb+rad.
    -2.0 * qc / (qb + rad)
}

/// Root of `q*` in `[(1-c)/c, a2+]` by bisection; absent when `a2+ <= (1-c)/c`,
/// in which case no band with two competition equilibria exists.
pub fn a2_star(sp: &ScaledParams) -> Result<f64> {
    let hat = (1.0 - sp.c) / sp.c;
    let (plus, _) = a2_plus_minus(sp);
    if plus <= hat {
        return Err(Error::StarAbsent {
            a2_plus: plus,
            hat_a2: hat,
        });
    }
    bisect(|a2| q_star(sp, a2), hat, plus, 1e-10).ok_or(Error::StarAbsent {
        a2_plus: plus,
        hat_a2: hat,
    })
}

/// Planar-stability margin of `(x+, 0, G(x+))`: negative means stable within
/// the competition plane.
pub fn comp_plus_planar_margin(sp: &ScaledParams, a2: f64) -> Option<f64> {
    let roots = competition_roots(sp, a2);
    let x_plus = roots.last().copied()?;
    let probe = sp.with_x_star_a2(sp.x_star, a2).ok()?;
    let v = eval_structural_functions(x_plus, &probe);
    let d = crate::dynamics::eval_structural_derivatives(x_plus, &probe);
    Some(v.f2 * d.big_f2 - v.big_f2)
}

/// The `a2` at which `(x+, 0, G(x+))` loses stability within the competition
/// plane, located by scanning and bisecting the planar-stability margin.
pub fn hopf_comp_a2(sp: &ScaledParams) -> Option<f64> {
    let check = sp.k * (1.0 - sp.c);
    let upper = match a2_star(sp) {
        Ok(star) => star,
        Err(_) => (1.0 - sp.c) / sp.c,
    };
    if upper <= check {
        return None;
    }
    let margin = |a2: f64| comp_plus_planar_margin(sp, a2);
    // Scan for a sign change, then bisect.
    let n = 400;
    let lo = check + 1e-9 * check.max(1.0);
    let hi = upper - 1e-9 * upper.max(1.0);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let a2 = lo + (hi - lo) * i as f64 / n as f64;
        let Some(m) = margin(a2) else { continue };
        if let Some((pa, pm)) = prev {
            if pm < 0.0 && m >= 0.0 {
                return bisect_opt(&margin, pa, a2, 1e-8);
            }
            if pm >= 0.0 && m < 0.0 {
                return bisect_opt(&margin, pa, a2, 1e-8);
            }
        }
        prev = Some((a2, m));
    }
    None
}

/// Computes all thresholds for one parameter set.
pub fn a2_thresholds(sp: &ScaledParams) -> Result<ThresholdSet> {
    sp.require_saturated()?;
    let (a2_plus, a2_minus) = a2_plus_minus(sp);
    let half_b = 0.5 * (1.0 - sp.k + sp.b2);
    let underline = -half_b + (half_b * half_b + sp.b2 * sp.k * (1.0 - sp.c)).sqrt();
    Ok(ThresholdSet {
        check_a2: sp.k * (1.0 - sp.c),
        hat_a2: (1.0 - sp.c) / sp.c,
        breve_a2: breve_a2(sp),
        tilde_a2: tilde_a2(sp),
        underline_a2: underline,
        a2_plus,
        a2_minus,
        a2_star: a2_star(sp).ok(),
        hopf_comp_a2: hopf_comp_a2(sp),
    })
}

/// The four equilibria that exist for every saturated parameter set.
pub fn boundary_equilibria(sp: &ScaledParams) -> Result<Vec<EquilibriumRecord>> {
    sp.require_saturated()?;
    let v = eval_structural_functions(sp.x_star, sp);
    Ok(vec![
        EquilibriumRecord::at(State3::new(0.0, 0.0, 0.0), EquilibriumKind::Washout, sp),
        EquilibriumRecord::at(
            State3::new(1.0, 0.0, 0.0),
            EquilibriumKind::CarryingCapacity,
            sp,
        ),
        EquilibriumRecord::at(State3::new(0.0, 0.0, sp.c), EquilibriumKind::MixotrophCC, sp),
        EquilibriumRecord::at(
            State3::new(sp.x_star, v.big_f1, 0.0),
            EquilibriumKind::PredatorPrey,
            sp,
        ),
    ])
}

/// Roots of `q` strictly inside the unit interval, ascending. Handles the
/// linear `b2 = 0` case, which has at most one root.
pub fn competition_roots(sp: &ScaledParams, a2: f64) -> Vec<f64> {
    let (qa, qb, qc) = q_coefficients(sp, a2);
    let mut roots = match solve_quadratic(qa, qb, qc) {
        Ok(r) => r,
        // Linear case: qb x + qc = 0.
        Err(Error::DegenerateQuadratic) => {
            if qb == 0.0 {
                Vec::new()
            } else {
                vec![-qc / qb]
            }
        }
        Err(_) => Vec::new(),
    };
    roots.retain(|x| x.is_finite() && *x > 1e-12 && *x < 1.0 - 1e-12);
    // Polish with a couple of Newton steps; q has a tiny constant term near
    // a2 = (1-c)/c and the stable formula still leaves a few ulps.
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = (qa * *x + qb) * *x + qc;
            let df = 2.0 * qa * *x + qb;
            if df != 0.0 {
                *x -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Competition equilibria `(x±, 0, G(x±))` with `x- < x+`.
pub fn competition_equilibria(sp: &ScaledParams) -> Result<Vec<EquilibriumRecord>> {
    sp.require_saturated()?;
    let roots = competition_roots(sp, sp.a2);
    let n = roots.len();
    Ok(roots
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let g = eval_structural_functions(x, sp).g;
            let kind = if n == 2 && i == 0 {
                EquilibriumKind::CompetitionMinus
            } else {
                EquilibriumKind::CompetitionPlus
            };
            EquilibriumRecord::at(State3::new(x, 0.0, g), kind, sp)
        })
        .collect())
}

/// Raw coexistence coordinates from the linear solve; positivity not checked.
pub fn coexistence_point(sp: &ScaledParams) -> Result<State3> {
    sp.require_saturated()?;
    let v = eval_structural_functions(sp.x_star, sp);
    let denom = v.f1 - v.f2;
    if denom <= 0.0 {
        return Err(Error::LocalConditionViolated { f1: v.f1, f2: v.f2 });
    }
    Ok(State3::new(
        sp.x_star,
        v.f2 * (v.big_f2 - v.g) / denom,
        v.f1 * (v.g - v.big_f1) / denom,
    ))
}

/// The interior equilibrium `(x*, y*, z*)`, present exactly when
/// `F1(x*) < G(x*) < F2(x*)`.
pub fn coexistence_equilibrium(sp: &ScaledParams) -> Result<Option<EquilibriumRecord>> {
    let p = coexistence_point(sp)?;
    if p.y > 0.0 && p.z > 0.0 {
        Ok(Some(EquilibriumRecord::at(p, EquilibriumKind::Coexistence, sp)))
    } else {
        Ok(None)
    }
}

/// Every equilibrium of the saturated system at these parameters.
pub fn all_equilibria(sp: &ScaledParams) -> Result<Vec<EquilibriumRecord>> {
    let mut out = boundary_equilibria(sp)?;
    out.extend(competition_equilibria(sp)?);
    // The coexistence formulas are undefined when the local grazing
    // trade-off fails; every other equilibrium still stands.
    if let Ok(Some(e)) = coexistence_equilibrium(sp) {
        out.push(e);
    }
    Ok(out)
}

/// Whether the coexistence window `(breve_a2, tilde_a2)` is nonempty,
/// via the inequality `k*s < x* a1 / (1 + b1 x*)`.
pub fn coexistence_window_nonempty(sp: &ScaledParams) -> bool {
    let x = sp.x_star;
    let q1 = 1.0 + sp.a1 / (1.0 + sp.b1 * x);
    let s = ((1.0 - x) - q1 * (sp.c - x)) / ((1.0 + sp.b2 * x) * q1);
    sp.k * s < x * sp.a1 / (1.0 + sp.b1 * x)
}

/// Number of competition equilibria predicted by the threshold bands alone.
pub fn predicted_competition_count(sp: &ScaledParams) -> u8 {
    let check = sp.k * (1.0 - sp.c);
    let hat = (1.0 - sp.c) / sp.c;
    if sp.a2 > check && sp.a2 < hat {
        1
    } else if sp.a2 > hat {
        match a2_star(sp) {
            Ok(star) if sp.a2 < star => 2,
            _ => 0,
        }
    } else {
        0
    }
}

/// Numerically stable real-root solve of `a x^2 + b x + c = 0`, ascending.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    if a == 0.0 {
        return Err(Error::DegenerateQuadratic);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    if disc == 0.0 {
        return Ok(vec![-b / (2.0 * a)]);
    }
    // Larger-magnitude root first, companion root via the product of roots.
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if b == 0.0 {
        let r = (-c / a).sqrt();
        (r, -r)
    } else {
        (q / a, c / q)
    };
    let mut roots = vec![r1, r2];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(roots)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn bisect_opt<F: Fn(f64) -> Option<f64>>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_params() -> ScaledParams {
        ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 4.5, 50.0, 55.0).unwrap()
    }

    #[test]
    fn boundary_set_is_the_expected_four() {
        let sp = fig_params();
        let eqs = boundary_equilibria(&sp).unwrap();
        assert_eq!(eqs.len(), 4);
        assert_eq!(eqs[2].point, State3::new(0.0, 0.0, 0.2));
        // F1(0.05) = (0.95 * 3.5) / 12.
        let pp = &eqs[3];
        assert_eq!(pp.kind, EquilibriumKind::PredatorPrey);
        assert!((pp.point.y - 0.95 * 3.5 / 12.0).abs() < 1e-12);
        for e in &eqs {
            assert!(e.residual(&sp) <= 1e-9, "{:?} residual {}", e.kind, e.residual(&sp));
        }
    }

    #[test]
    fn competition_pair_matches_quadratic_oracle() {
        let sp = fig_params();
        let eqs = competition_equilibria(&sp).unwrap();
        assert_eq!(eqs.len(), 2);
        // Direct quadratic formula, no cancellation tricks.
        let (qa, qb, qc) = q_coefficients(&sp, sp.a2);
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let lo = (-qb - disc) / (2.0 * qa);
        let hi = (-qb + disc) / (2.0 * qa);
        assert!((eqs[0].point.x - lo).abs() < 1e-10);
        assert!((eqs[1].point.x - hi).abs() < 1e-10);
        assert!((eqs[0].point.x - 0.00471).abs() < 5e-5);
        assert!((eqs[1].point.x - 0.08145).abs() < 5e-5);
        assert_eq!(eqs[0].kind, EquilibriumKind::CompetitionMinus);
        assert_eq!(eqs[1].kind, EquilibriumKind::CompetitionPlus);
        for e in &eqs {
            assert!(e.point.z > 0.0);
            assert!(e.residual(&sp) <= 1e-9);
        }
    }

    #[test]
    fn one_root_in_the_middle_band() {
        let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 2.0, 50.0, 55.0).unwrap();
        let t = a2_thresholds(&sp).unwrap();
        assert!(t.check_a2 < sp.a2 && sp.a2 < t.hat_a2);
        let eqs = competition_equilibria(&sp).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::CompetitionPlus);
    }

    #[test]
    fn q_vanishes_at_origin_on_hat_boundary() {
        let sp = fig_params();
        let hat = (1.0 - sp.c) / sp.c;
        assert!(q_eval(&sp, hat, 0.0).abs() < 1e-15);
        let at_hat = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, hat, 50.0, 55.0).unwrap();
        // The root at x = 0 is excluded from the open-interval count.
        let eqs = competition_equilibria(&at_hat).unwrap();
        assert!(eqs.iter().all(|e| e.point.x > 1e-12));
    }

    #[test]
    fn coexistence_exists_at_figure_parameters() {
        let sp = fig_params();
        let e = coexistence_equilibrium(&sp).unwrap().expect("coexistence");
        assert_eq!(e.point.x, sp.x_star);
        assert!(e.point.y > 0.0 && e.point.z > 0.0);
        assert!(e.residual(&sp) <= 1e-9);
        let v = eval_structural_functions(sp.x_star, &sp);
        assert!(v.big_f1 < v.g && v.g < v.big_f2);
    }

    #[test]
    fn coexistence_z_vanishes_on_lower_window_edge() {
        let base = fig_params();
        let breve = breve_a2(&base);
        let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, breve, 50.0, 55.0).unwrap();
        let p = coexistence_point(&sp).unwrap();
        assert!(p.z.abs() < 1e-12, "z* = {} at the window edge", p.z);
        // The degenerate point coincides with the predator-prey equilibrium.
        let v = eval_structural_functions(sp.x_star, &sp);
        assert!((p.y - v.big_f1).abs() < 1e-9);
    }

    #[test]
    fn coexistence_absent_outside_window() {
        let base = fig_params();
        let t = a2_thresholds(&base).unwrap();
        for a2 in [t.breve_a2 * 0.5, t.tilde_a2 * 1.05] {
            let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, a2, 50.0, 55.0).unwrap();
            assert!(coexistence_equilibrium(&sp).unwrap().is_none(), "a2 = {a2}");
        }
    }

    #[test]
    fn local_condition_violation_detected() {
        // a2 far above the efficiency bound makes f2(x*) exceed f1(x*).
        let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 12.0, 50.0, 55.0).unwrap();
        assert!(matches!(
            coexistence_point(&sp),
            Err(Error::LocalConditionViolated { .. })
        ));
    }

    #[test]
    fn threshold_values_at_base_parameters() {
        let sp = fig_params();
        let t = a2_thresholds(&sp).unwrap();
        assert_eq!(t.check_a2, 0.76);
        assert_eq!(t.hat_a2, 4.0);
        assert!((t.a2_plus - 6.44).abs() < 0.01);
        assert!(t.a2_minus < 0.0 && t.a2_plus > 0.0);
        let star = t.a2_star.expect("two-equilibria band exists");
        assert!((star - 5.1118).abs() < 0.01);
        assert!(t.check_a2 < t.hat_a2);
        assert!(t.underline_a2 < t.hat_a2);
    }

    #[test]
    fn window_limits_collapse_to_check_a2() {
        let sp = ScaledParams::saturated(0.2, 0.95, 1.0 - 1e-6, 8.5, 4.5, 50.0, 55.0).unwrap();
        let t = a2_thresholds(&sp).unwrap();
        assert!((t.breve_a2 - 0.76).abs() < 1e-4);
        assert!((t.tilde_a2 - 0.76).abs() < 1e-4);
    }

    #[test]
    fn tilde_below_hat_when_x_star_exceeds_c() {
        for x_star in [0.25, 0.4, 0.7, 0.95] {
            let sp = ScaledParams::saturated(0.2, 0.95, x_star, 8.5, 4.5, 50.0, 55.0).unwrap();
            let t = a2_thresholds(&sp).unwrap();
            assert!(t.tilde_a2 <= t.hat_a2 + 1e-12, "x* = {x_star}");
        }
    }

    #[test]
    fn window_nonempty_agrees_with_direct_comparison() {
        for (c, k, x_star, a1, b1, b2) in [
            (0.2, 0.95, 0.05, 8.5, 50.0, 55.0),
            (0.2, 0.95, 0.6, 8.5, 50.0, 55.0),
            (0.8, 0.75, 0.4, 8.5, 50.0, 20.0),
            (0.05, 0.9, 0.3, 2.0, 1.0, 3.0),
            (0.5, 0.3, 0.9, 1.5, 0.0, 0.0),
        ] {
            let sp = ScaledParams::saturated(c, k, x_star, a1, 1.0, b1, b2).unwrap();
            let direct = breve_a2(&sp) < tilde_a2(&sp);
            assert_eq!(
                coexistence_window_nonempty(&sp),
                direct,
                "({c}, {k}, {x_star}, {a1}, {b1}, {b2})"
            );
        }
    }

    #[test]
    fn window_nonempty_for_nonpositive_s() {
        // c >= x* + (1-x*)/q1 makes s <= 0; the window is then open for any k.
        let sp = ScaledParams::saturated(0.9, 0.5, 0.3, 8.5, 1.0, 55.0, 0.0).unwrap();
        let x = sp.x_star;
        let q1 = 1.0 + sp.a1 / (1.0 + sp.b1 * x);
        let s = ((1.0 - x) - q1 * (sp.c - x)) / ((1.0 + sp.b2 * x) * q1);
        assert!(s <= 0.0, "test setup: s = {s}");
        assert!(coexistence_window_nonempty(&sp));
    }

    #[test]
    fn predicted_count_matches_solver_at_band_samples() {
        let base = fig_params();
        for a2 in [0.3, 0.76 + 0.1, 2.0, 3.9, 4.2, 4.5, 5.0, 5.2, 6.0] {
            let sp = base.with_x_star_a2(base.x_star, a2).unwrap();
            let predicted = predicted_competition_count(&sp);
            let solved = competition_equilibria(&sp).unwrap().len() as u8;
            assert_eq!(predicted, solved, "a2 = {a2}");
        }
    }

    #[test]
    fn necessary_criterion_for_two_equilibria() {
        // c*b2 <= 1/k - 1 must preclude a two-equilibria band.
        let sp = ScaledParams::saturated(0.2, 0.5, 0.05, 8.5, 1.0, 50.0, 4.0).unwrap();
        assert!(sp.c * sp.b2 <= 1.0 / sp.k - 1.0);
        assert!(a2_star(&sp).is_err());
        for a2 in [0.5, 1.0, 2.0, 4.0, 4.5, 6.0, 8.0] {
            let probe = sp.with_x_star_a2(sp.x_star, a2);
            if let Ok(p) = probe {
                assert_ne!(predicted_competition_count(&p), 2, "a2 = {a2}");
            }
        }
    }

    #[test]
    fn q_star_closed_form_matches_direct_evaluation() {
        let sp = fig_params();
        for a2 in [0.5, 2.0, 4.2, 5.0, 6.0, 7.0] {
            let direct = 4.0 * a2 * sp.b2 * q_eval(&sp, a2, q_min_point(&sp, a2).unwrap());
            let closed = q_star(&sp, a2);
            assert!(
                (direct - closed).abs() < 1e-7 * direct.abs().max(1.0),
                "a2 = {a2}: {direct} vs {closed}"
            );
        }
    }

    #[test]
    fn q_star_sign_pattern_across_intervals() {
        let sp = fig_params();
        let (plus, minus) = a2_plus_minus(&sp);
        let hat = (1.0 - sp.c) / sp.c;
        assert!(plus > hat);
        // One sign change per interval, located by dense sampling.
        let count_changes = |lo: f64, hi: f64| {
            let n = 2000;
            let mut changes = 0;
            let mut prev = q_star(&sp, lo);
            for i in 1..=n {
                let a2 = lo + (hi - lo) * i as f64 / n as f64;
                let v = q_star(&sp, a2);
                if prev.signum() != v.signum() {
                    changes += 1;
                }
                prev = v;
            }
            changes
        };
        assert_eq!(count_changes(minus - 50.0, minus), 1);
        assert_eq!(count_changes(minus, 0.0), 1);
        assert_eq!(count_changes(hat, plus), 1);
        assert_eq!(count_changes(plus, plus + 100.0), 1);
    }

    #[test]
    fn hopf_comp_boundary_near_published_band() {
        let sp = fig_params();
        let hopf = hopf_comp_a2(&sp).expect("planar Hopf exists for the base parameters");
        assert!((hopf - 3.582).abs() < 0.005, "hopf_comp_a2 = {hopf}");
    }

    #[test]
    fn linear_case_keeps_at_most_one_root() {
        let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 2.0, 50.0, 0.0).unwrap();
        let eqs = competition_equilibria(&sp).unwrap();
        assert!(eqs.len() <= 1);
        assert_eq!(eqs.len(), predicted_competition_count(&sp) as usize);
    }

    #[test]
    fn stable_quadratic_solver_handles_cancellation() {
        // x^2 - 1e8 x + 1 = 0 has a tiny root that the naive formula loses.
        let roots = solve_quadratic(1.0, -1e8, 1.0).unwrap();
        assert!((roots[0] - 1e-8).abs() < 1e-18);
        assert!(matches!(
            solve_quadratic(0.0, 1.0, 1.0),
            Err(Error::DegenerateQuadratic)
        ));
    }
}
