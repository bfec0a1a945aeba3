//! Right-hand sides of the chemostat model in its dimensional, reduced,
//! scaled, saturated, and isocline forms, together with the structural
//! functions and Jacobians used by the stability analysis.
//!
//! The isocline form is the saturated system with time rescaled by
//! `dtau/dt = (1 + b2*x)/k`; the two share orbits and equilibria, and their
//! right-hand sides are proportional by that positive factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChemostatParams, ChemostatState, ScaledParams};

/// A point (x, y, z) of the scaled phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Sum of coordinates; the simplex of interest is `sum() <= 1`.
    pub fn sum(&self) -> f64 {
        self.x + self.y + self.z
    }

    pub fn max_abs_diff(&self, other: &State3) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// Values of the six structural scalar functions at one `x`.
///
/// `f1`, `f2` are the positive growth scales of the isocline form, `big_f1`,
/// `big_f2` the prey isoclines, `psi` the herbivore growth factor, and `g`
/// the affine mixotroph isocline `c - x + (a2/k) x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralValues {
    pub f1: f64,
    pub f2: f64,
    pub big_f1: f64,
    pub big_f2: f64,
    pub psi: f64,
    pub g: f64,
}

/// Dense 3x3 Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian3(pub [[f64; 3]; 3]);

impl Jacobian3 {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Determinant of the 2x2 submatrix left after deleting row and column `i`.
    pub fn principal_minor(&self, i: usize) -> f64 {
        let idx: [usize; 2] = match i {
            0 => [1, 2],
            1 => [0, 2],
            2 => [0, 1],
            _ => panic!("principal minor index out of range"),
        };
        let m = &self.0;
        m[idx[0]][idx[0]] * m[idx[1]][idx[1]] - m[idx[0]][idx[1]] * m[idx[1]][idx[0]]
    }

    /// Sum of the three principal 2x2 minors (second elementary symmetric
    /// function of the eigenvalues).
    pub fn minor_sum(&self) -> f64 {
        self.principal_minor(0) + self.principal_minor(1) + self.principal_minor(2)
    }

    /// Max row sum norm.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the full four-species chemostat (S, X, Y, Z).
pub fn rhs_chemostat(s: &ChemostatState, p: &ChemostatParams) -> [f64; 4] {
    let den1 = 1.0 + p.a1 * p.b1 * s.s;
    let den3 = 1.0 + p.a3 * p.b3 * s.x;
    let den24 = 1.0 + p.a2 * p.b2 * s.s + p.a4 * p.b4 * s.x;
    let uptake_nutrient_auto = p.a1 * s.s * s.x / den1;
    let graze_herb = p.a3 * s.x * s.y / den3;
    let mixo_nutrient = p.a2 * s.s * s.z / den24;
    let mixo_graze = p.a4 * s.x * s.z / den24;
    [
        p.c * p.d - p.d * s.s - uptake_nutrient_auto - mixo_nutrient,
        uptake_nutrient_auto - p.d * s.x - graze_herb - mixo_graze,
        graze_herb - p.d * s.y,
        mixo_nutrient + mixo_graze - p.d * s.z,
    ]
}

/// Right-hand side of the reduced three-species system on the invariant
/// manifold `S = C - X - Y - Z`.
pub fn rhs_reduced(x: f64, y: f64, z: f64, p: &ChemostatParams) -> Result<[f64; 3]> {
    let sum = x + y + z;
    if sum > p.c {
        return Err(Error::ManifoldViolation { sum, c: p.c });
    }
    let s = p.c - sum;
    let den1 = 1.0 + p.a1 * p.b1 * s;
    let den3 = 1.0 + p.a3 * p.b3 * x;
    let den24 = 1.0 + p.a2 * p.b2 * s + p.a4 * p.b4 * x;
    let uptake = p.a1 * s * x / den1;
    let graze = p.a3 * x * y / den3;
    let mixo = (p.a2 * s + p.a4 * x) * z / den24;
    Ok([uptake - p.d * x - graze - p.a4 * x * z / den24, graze - p.d * y, mixo - p.d * z])
}

/// Right-hand side of the general scaled system (saturation terms included).
pub fn rhs_scaled(s: State3, sp: &ScaledParams) -> Result<[f64; 3]> {
    let total = s.sum();
    let den_k1 = 1.0 + sp.gamma1 - sp.kappa1 * total;
    let den_k2 = 1.0 + sp.gamma2 - sp.kappa2 * total + sp.b2 * s.x;
    if den_k1 <= 0.0 {
        return Err(Error::DenominatorVanishes(format!(
            "1 + gamma1 - kappa1*(x+y+z) = {den_k1}"
        )));
    }
    if den_k2 <= 0.0 {
        return Err(Error::DenominatorVanishes(format!(
            "1 + gamma2 - kappa2*(x+y+z) + b2*x = {den_k2}"
        )));
    }
    let den_b1 = 1.0 + sp.b1 * s.x;
    Ok([
        s.x * (1.0 - total) / den_k1
            - sp.a1 * s.x * s.y / den_b1
            - sp.a2 * s.x * s.z / den_k2,
        sp.a1 / (1.0 + sp.b1 * sp.x_star) * (s.x - sp.x_star) / den_b1 * s.y,
        (sp.k * s.z * (sp.c - total) + sp.a2 * s.x * s.z) / den_k2,
    ])
}

/// Right-hand side of the saturated system in the original scaled time.
pub fn rhs_saturated(s: State3, sp: &ScaledParams) -> [f64; 3] {
    let total = s.sum();
    let den_b1 = 1.0 + sp.b1 * s.x;
    let den_b2 = 1.0 + sp.b2 * s.x;
    [
        s.x * (1.0 - total) - sp.a1 * s.x * s.y / den_b1 - sp.a2 * s.x * s.z / den_b2,
        sp.a1 / (1.0 + sp.b1 * sp.x_star) * (s.x - sp.x_star) / den_b1 * s.y,
        sp.k * s.z / den_b2 * (sp.c - total + sp.a2 / sp.k * s.x),
    ]
}

/// Right-hand side of the isocline (time-rescaled) form: the saturated field
/// multiplied by `(1 + b2*x)/k`.
pub fn rhs_isocline(s: State3, sp: &ScaledParams) -> [f64; 3] {
    let v = eval_structural_functions(s.x, sp);
    [
        v.f1 * v.big_f1 - s.y * v.f1 - s.z * v.f2,
        s.y * v.psi,
        s.z * (v.g - s.y - s.z),
    ]
}

/// Evaluates f1, f2, F1, F2, psi, and G at `x`.
///
/// Simplified algebraic forms are used throughout; `f1*F1 = f2*F2 =
/// x(1-x)(1+b2 x)/k` is relied on by the x-equation of the isocline form.
pub fn eval_structural_functions(x: f64, sp: &ScaledParams) -> StructuralValues {
    let den_b1 = 1.0 + sp.b1 * x;
    let den_b2 = 1.0 + sp.b2 * x;
    StructuralValues {
        f1: x * (1.0 + sp.a1 + sp.b1 * x) * den_b2 / (sp.k * den_b1),
        f2: x * (1.0 + sp.a2 + sp.b2 * x) / sp.k,
        big_f1: (1.0 - x) * den_b1 / (1.0 + sp.a1 + sp.b1 * x),
        big_f2: (1.0 - x) * den_b2 / (1.0 + sp.a2 + sp.b2 * x),
        psi: sp.a1 * (x - sp.x_star) * den_b2 / (sp.k * (1.0 + sp.b1 * sp.x_star) * den_b1),
        g: sp.c - x + sp.a2 / sp.k * x,
    }
}

/// Derivatives of the structural functions at `x`.
#[derive(Debug, Clone, Copy)]
pub struct StructuralDerivatives {
    pub f1: f64,
    pub f2: f64,
    pub big_f1: f64,
    pub big_f2: f64,
    pub psi: f64,
    pub g: f64,
    /// Derivative of the product f1*F1 = x(1-x)(1+b2 x)/k.
    pub f_big_f: f64,
}

pub fn eval_structural_derivatives(x: f64, sp: &ScaledParams) -> StructuralDerivatives {
    let (a1, a2, b1, b2, k) = (sp.a1, sp.a2, sp.b1, sp.b2, sp.k);
    let den_b1 = 1.0 + b1 * x;
    let f1 = (1.0
        + a1
        + 2.0 * (b1 + b2 + a1 * b2) * x
        + (b1 * b1 + 4.0 * b1 * b2 + a1 * b1 * b2) * x * x
        + 2.0 * b1 * b1 * b2 * x * x * x)
        / (k * den_b1 * den_b1);
    let f2 = (1.0 + a2 + 2.0 * b2 * x) / k;
    let big_f1 = (-1.0 - a1 + a1 * b1 - 2.0 * b1 * (a1 + 1.0) * x - b1 * b1 * x * x)
        / ((1.0 + a1 + b1 * x) * (1.0 + a1 + b1 * x));
    let big_f2 = (-1.0 - a2 + a2 * b2 - 2.0 * b2 * (a2 + 1.0) * x - b2 * b2 * x * x)
        / ((1.0 + a2 + b2 * x) * (1.0 + a2 + b2 * x));
    // psi = a1 (x - x*)(1 + b2 x) / (k (1 + b1 x*)(1 + b1 x)); quotient rule
    // on u = (x - x*)(1 + b2 x).
    let u = (x - sp.x_star) * (1.0 + b2 * x);
    let du = 1.0 + 2.0 * b2 * x - b2 * sp.x_star;
    let psi = a1 * (du * den_b1 - u * b1) / (k * (1.0 + b1 * sp.x_star) * den_b1 * den_b1);
    let g = -1.0 + a2 / k;
    let f_big_f = (1.0 - 2.0 * x + 2.0 * b2 * x - 3.0 * b2 * x * x) / k;
    StructuralDerivatives {
        f1,
        f2,
        big_f1,
        big_f2,
        psi,
        g,
        f_big_f,
    }
}

/// Jacobian of the isocline-form field at `s`.
///
/// This is the matrix the boundary- and coexistence-equilibrium analysis
/// works with; the time rescaling changes eigenvalues by a positive factor
/// only, so stability verdicts carry over to the saturated system.
pub fn jacobian_isocline(s: State3, sp: &ScaledParams) -> Jacobian3 {
    let v = eval_structural_functions(s.x, sp);
    let d = eval_structural_derivatives(s.x, sp);
    Jacobian3([
        [
            d.f1 * (v.big_f1 - s.y) + v.f1 * d.big_f1 - s.z * d.f2,
            -v.f1,
            -v.f2,
        ],
        [s.y * d.psi, v.psi, 0.0],
        [s.z * d.g, -s.z, v.g - s.y - 2.0 * s.z],
    ])
}

/// Jacobian of the saturated field in the original scaled time (used by the
/// variational system of the Lyapunov estimator).
pub fn jacobian_saturated(s: State3, sp: &ScaledParams) -> Jacobian3 {
    let (a1, a2, b1, b2, k) = (sp.a1, sp.a2, sp.b1, sp.b2, sp.k);
    let den_b1 = 1.0 + b1 * s.x;
    let den_b2 = 1.0 + b2 * s.x;
    let g = sp.c - s.x + a2 / k * s.x;
    let mu_scale = a1 / (1.0 + b1 * sp.x_star);
    Jacobian3([
        [
            1.0 - 2.0 * s.x - s.y - s.z
                - a1 * s.y / (den_b1 * den_b1)
                - a2 * s.z / (den_b2 * den_b2),
            -s.x - a1 * s.x / den_b1,
            -s.x - a2 * s.x / den_b2,
        ],
        [
            s.y * mu_scale * (1.0 + b1 * sp.x_star) / (den_b1 * den_b1),
            mu_scale * (s.x - sp.x_star) / den_b1,
            0.0,
        ],
        [
            k * s.z * ((-1.0 + a2 / k) * den_b2 - (g - s.y - s.z) * b2) / (den_b2 * den_b2),
            -k * s.z / den_b2,
            k * (g - s.y - 2.0 * s.z) / den_b2,
        ],
    ])
}

/// Central finite-difference Jacobian of a 3D field, for verification.
pub fn finite_difference_jacobian<F>(f: F, s: State3) -> Jacobian3
where
    F: Fn(State3) -> [f64; 3],
{
    let mut j = [[0.0; 3]; 3];
    let base = s.to_array();
    for col in 0..3 {
        let h = 1e-6 * base[col].abs().max(1.0);
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let fp = f(State3::from_array(plus));
        let fm = f(State3::from_array(minus));
        for row in 0..3 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Jacobian3(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::nondimensionalize;

    fn fig_params() -> ScaledParams {
        ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 4.5, 50.0, 55.0).unwrap()
    }

    fn dim_params() -> ChemostatParams {
        ChemostatParams::new(2.0, 0.4, [3.0, 1.5, 2.5, 1.0], [0.2, 0.1, 0.15, 0.3]).unwrap()
    }

    #[test]
    fn washout_state_is_fixed() {
        let p = dim_params();
        let s = ChemostatState::new(p.c, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(rhs_chemostat(&s, &p), [0.0; 4]);
    }

    #[test]
    fn pure_dilution_without_biomass() {
        let p = dim_params();
        let s = ChemostatState::new(p.c / 2.0, 0.0, 0.0, 0.0).unwrap();
        let rhs = rhs_chemostat(&s, &p);
        assert!((rhs[0] - p.d * p.c / 2.0).abs() < 1e-15);
        assert_eq!(&rhs[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn total_mass_relaxes_at_dilution_rate() {
        let p = dim_params();
        let s = ChemostatState::new(0.7, 0.3, 0.2, 0.1).unwrap();
        let rhs = rhs_chemostat(&s, &p);
        let h = s.s + s.x + s.y + s.z - p.c;
        let dh: f64 = rhs.iter().sum();
        assert!((dh + p.d * h).abs() < 1e-12 * (p.d * h).abs().max(1.0));
    }

    #[test]
    fn reduced_system_matches_full_on_manifold() {
        let p = dim_params();
        let (x, y, z) = (0.4, 0.3, 0.2);
        let s = ChemostatState::new(p.c - x - y - z, x, y, z).unwrap();
        let full = rhs_chemostat(&s, &p);
        let red = rhs_reduced(x, y, z, &p).unwrap();
        for i in 0..3 {
            let scale = full[i + 1].abs().max(1.0);
            assert!((full[i + 1] - red[i]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn reduced_rejects_off_manifold_states() {
        let p = dim_params();
        assert!(matches!(
            rhs_reduced(p.c, p.c, p.c, &p),
            Err(Error::ManifoldViolation { .. })
        ));
    }

    #[test]
    fn reduced_autotroph_alone_equilibrium() {
        let p = dim_params();
        // Solve A1 (C - X) / (1 + A1 B1 (C - X)) = D for X by bisection.
        let f = |x: f64| {
            let s = p.c - x;
            p.a1 * s / (1.0 + p.a1 * p.b1 * s) - p.d
        };
        let (mut lo, mut hi) = (0.0, p.c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let rhs = rhs_reduced(x, 0.0, 0.0, &p).unwrap();
        assert!(rhs[0].abs() < 1e-10);
        assert_eq!(rhs[1], 0.0);
        assert_eq!(rhs[2], 0.0);
    }

    #[test]
    fn scaled_reduces_to_saturated_without_saturation_terms() {
        let sp = fig_params();
        let s = State3::new(0.3, 0.25, 0.2);
        let a = rhs_scaled(s, &sp).unwrap();
        let b = rhs_saturated(s, &sp);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-15 * b[i].abs().max(1.0));
        }
    }

    #[test]
    fn herbivore_equation_vanishes_on_its_isocline() {
        let sp = fig_params();
        let s = State3::new(sp.x_star, 0.4, 0.1);
        let rhs = rhs_scaled(s, &sp).unwrap();
        assert_eq!(rhs[1], 0.0);
    }

    #[test]
    fn carrying_capacity_is_fixed() {
        let sp = fig_params();
        let rhs = rhs_scaled(State3::new(1.0, 0.0, 0.0), &sp).unwrap();
        assert_eq!(rhs, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn mixotroph_carrying_capacity_is_fixed() {
        let sp = fig_params();
        let rhs = rhs_saturated(State3::new(0.0, 0.0, sp.c), &sp);
        assert_eq!(rhs, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn predator_prey_plane_is_invariant() {
        let sp = fig_params();
        let rhs = rhs_saturated(State3::new(0.5, 0.3, 0.0), &sp);
        assert_eq!(rhs[2], 0.0);
    }

    #[test]
    fn scaled_reports_vanishing_denominator() {
        let mut sp = fig_params();
        sp.gamma1 = 0.5;
        sp.kappa1 = 0.6;
        sp.gamma2 = 0.5;
        sp.kappa2 = 0.6;
        let s = State3::new(0.9, 0.9, 0.9);
        assert!(matches!(
            rhs_scaled(s, &sp),
            Err(Error::DenominatorVanishes(_))
        ));
    }

    #[test]
    fn isocline_is_time_rescaled_saturated() {
        let sp = fig_params();
        for s in [
            State3::new(0.1, 0.2, 0.3),
            State3::new(0.02, 0.5, 0.01),
            State3::new(0.7, 0.1, 0.15),
        ] {
            let factor = (1.0 + sp.b2 * s.x) / sp.k;
            let iso = rhs_isocline(s, &sp);
            let sat = rhs_saturated(s, &sp);
            for i in 0..3 {
                let scale = iso[i].abs().max(1.0);
                assert!((iso[i] - sat[i] * factor).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn isocline_curves_null_their_components() {
        let sp = fig_params();
        let x = 0.3;
        let v = eval_structural_functions(x, &sp);
        let on_f1 = rhs_isocline(State3::new(x, v.big_f1, 0.0), &sp);
        assert!(on_f1[0].abs() < 1e-14);
        let on_g = rhs_isocline(State3::new(x, 0.0, v.g), &sp);
        assert!(on_g[2].abs() < 1e-14);
    }

    #[test]
    fn structural_endpoint_values() {
        let sp = fig_params();
        let v0 = eval_structural_functions(0.0, &sp);
        assert!((v0.big_f1 - 1.0 / (1.0 + sp.a1)).abs() < 1e-15);
        assert!((v0.g - sp.c).abs() < 1e-15);
        let v1 = eval_structural_functions(1.0, &sp);
        assert!(v1.big_f1.abs() < 1e-15);
        assert!((v1.g - (sp.c - 1.0 + sp.a2 / sp.k)).abs() < 1e-15);
    }

    #[test]
    fn psi_vanishes_and_increases_at_x_star() {
        let sp = fig_params();
        let v = eval_structural_functions(sp.x_star, &sp);
        assert!(v.psi.abs() < 1e-15);
        let h = 1e-7;
        let plus = eval_structural_functions(sp.x_star + h, &sp).psi;
        let minus = eval_structural_functions(sp.x_star - h, &sp).psi;
        assert!((plus - minus) / (2.0 * h) > 0.0);
    }

    #[test]
    fn raw_and_simplified_forms_agree() {
        let sp = fig_params();
        for i in 0..50 {
            let x = i as f64 * 0.03;
            let v = eval_structural_functions(x, &sp);
            let raw_f2 = (x + sp.a2 * x / (1.0 + sp.b2 * x)) / (sp.k / (1.0 + sp.b2 * x));
            assert!((v.f2 - raw_f2).abs() <= 1e-12 * raw_f2.abs().max(1e-300));
            let raw_f1 = (x + sp.a1 * x / (1.0 + sp.b1 * x)) / (sp.k / (1.0 + sp.b2 * x));
            assert!((v.f1 - raw_f1).abs() <= 1e-12 * raw_f1.abs().max(1e-300));
            // f1*F1 and f2*F2 agree with the common product.
            let prod = x * (1.0 - x) * (1.0 + sp.b2 * x) / sp.k;
            assert!((v.f1 * v.big_f1 - prod).abs() < 1e-12 * prod.abs().max(1.0));
            assert!((v.f2 * v.big_f2 - prod).abs() < 1e-12 * prod.abs().max(1.0));
        }
    }

    #[test]
    fn structural_derivatives_match_finite_differences() {
        let sp = fig_params();
        let h = 1e-6;
        for i in 1..40 {
            let x = i as f64 * 0.025;
            let d = eval_structural_derivatives(x, &sp);
            let p = eval_structural_functions(x + h, &sp);
            let m = eval_structural_functions(x - h, &sp);
            let fd = |a: f64, b: f64| (a - b) / (2.0 * h);
            assert!((d.f1 - fd(p.f1, m.f1)).abs() < 1e-4);
            assert!((d.f2 - fd(p.f2, m.f2)).abs() < 1e-6);
            assert!((d.big_f1 - fd(p.big_f1, m.big_f1)).abs() < 1e-6);
            assert!((d.big_f2 - fd(p.big_f2, m.big_f2)).abs() < 1e-6);
            assert!((d.psi - fd(p.psi, m.psi)).abs() < 1e-4);
        }
    }

    #[test]
    fn isocline_jacobian_matches_finite_differences() {
        let sp = fig_params();
        for s in [
            State3::new(0.1, 0.2, 0.3),
            State3::new(0.05, 0.27, 0.0),
            State3::new(0.4, 0.05, 0.2),
        ] {
            let j = jacobian_isocline(s, &sp);
            let fd = finite_difference_jacobian(|s| rhs_isocline(s, &sp), s);
            for r in 0..3 {
                for c in 0..3 {
                    assert!(
                        (j.0[r][c] - fd.0[r][c]).abs() < 1e-6 * j.norm_inf().max(1.0),
                        "mismatch at ({r},{c}): {} vs {}",
                        j.0[r][c],
                        fd.0[r][c]
                    );
                }
            }
        }
    }

    #[test]
    fn saturated_jacobian_matches_finite_differences() {
        let sp = fig_params();
        for s in [State3::new(0.1, 0.2, 0.3), State3::new(0.3, 0.1, 0.05)] {
            let j = jacobian_saturated(s, &sp);
            let fd = finite_difference_jacobian(|s| rhs_saturated(s, &sp), s);
            for r in 0..3 {
                for c in 0..3 {
                    assert!((j.0[r][c] - fd.0[r][c]).abs() < 1e-6 * j.norm_inf().max(1.0));
                }
            }
        }
    }

    #[test]
    fn isocline_jacobian_diagonal_at_washout() {
        let sp = fig_params();
        let j = jacobian_isocline(State3::new(0.0, 0.0, 0.0), &sp);
        let expected = [
            1.0 / sp.k,
            -sp.a1 * sp.x_star / (sp.k * (1.0 + sp.b1 * sp.x_star)),
            sp.c,
        ];
        for r in 0..3 {
            for c in 0..3 {
                if r == c {
                    assert!((j.0[r][c] - expected[r]).abs() < 1e-14);
                } else {
                    assert_eq!(j.0[r][c], 0.0);
                }
            }
        }
    }

    #[test]
    fn isocline_jacobian_upper_triangular_at_carrying_capacity() {
        let sp = fig_params();
        let j = jacobian_isocline(State3::new(1.0, 0.0, 0.0), &sp);
        assert_eq!(j.0[1][0], 0.0);
        assert_eq!(j.0[2][0], 0.0);
        assert_eq!(j.0[2][1], 0.0);
        assert!(j.0[0][0] < 0.0);
        let v = eval_structural_functions(1.0, &sp);
        assert!((j.0[1][1] - v.psi).abs() < 1e-14);
        assert!(j.0[1][1] > 0.0);
        assert!((j.0[2][2] - v.g).abs() < 1e-14);
    }

    #[test]
    fn nondimensionalized_params_feed_dynamics() {
        let sp = nondimensionalize(&dim_params()).unwrap();
        let s = State3::new(0.2, 0.1, 0.1);
        let rhs = rhs_scaled(s, &sp).unwrap();
        assert!(rhs.iter().all(|v| v.is_finite()));
    }
}
