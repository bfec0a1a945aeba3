//! Dimensional chemostat parameters, trade-off validation, and the
//! nondimensionalization to the scaled system.
//!
//! The dimensional model tracks nutrient S, autotrophs X, herbivores Y, and
//! mixotrophs Z in a chemostat with input concentration C and dilution rate D.
//! Search rates A1..A4 and handling times B1..B4 parameterize the four uptake
//! terms; all conversion factors are fixed to 1 so that S+X+Y+Z relaxes to C
//! and the system reduces to three dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Dimensional parameters of the four-species chemostat.
///
/// Conversion factors M1..M4 are fixed to 1; they are carried only so that
/// parameter files stating them explicitly can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemostatParams {
    /// Nutrient input concentration (mass/volume).
    #[serde(rename = "C")]
    pub c: f64,
    /// Dilution rate (1/time).
    #[serde(rename = "D")]
    pub d: f64,
    /// Search rate of autotrophs for nutrient.
    #[serde(rename = "A1")]
    pub a1: f64,
    /// Search rate of mixotrophs for nutrient.
    #[serde(rename = "A2")]
    pub a2: f64,
    /// Search rate of herbivores for autotrophs.
    #[serde(rename = "A3")]
    pub a3: f64,
    /// Search rate of mixotrophs for autotrophs.
    #[serde(rename = "A4")]
    pub a4: f64,
    /// Handling time of autotrophs on nutrient.
    #[serde(rename = "B1")]
    pub b1: f64,
    /// Handling time of mixotrophs on nutrient.
    #[serde(rename = "B2")]
    pub b2: f64,
    /// Handling time of herbivores on autotrophs.
    #[serde(rename = "B3")]
    pub b3: f64,
    /// Handling time of mixotrophs on autotrophs.
    #[serde(rename = "B4")]
    pub b4: f64,
    #[serde(rename = "M1", default = "one")]
    pub m1: f64,
    #[serde(rename = "M2", default = "one")]
    pub m2: f64,
    #[serde(rename = "M3", default = "one")]
    pub m3: f64,
    #[serde(rename = "M4", default = "one")]
    pub m4: f64,
}

impl ChemostatParams {
    /// Builds a parameter set with unit conversion factors and validates it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: f64,
        d: f64,
        a: [f64; 4],
        b: [f64; 4],
    ) -> Result<Self> {
        let p = Self {
            c,
            d,
            a1: a[0],
            a2: a[1],
            a3: a[2],
            a4: a[3],
            b1: b[0],
            b2: b[1],
            b3: b[2],
            b4: b[3],
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            m4: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity, nonnegative handling times, `1 - D*Bi > 0`, and
    /// unit conversion factors.
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("C", self.c),
            ("D", self.d),
            ("A1", self.a1),
            ("A2", self.a2),
            ("A3", self.a3),
            ("A4", self.a4),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("B1", self.b1),
            ("B2", self.b2),
            ("B3", self.b3),
            ("B4", self.b4),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
            if 1.0 - self.d * v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "1 - D*{name} must be > 0, got {}",
                    1.0 - self.d * v
                )));
            }
        }
        for (name, v) in [("M1", self.m1), ("M2", self.m2), ("M3", self.m3), ("M4", self.m4)] {
            if v != 1.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be exactly 1 (got {v}); the S = C-X-Y-Z reduction requires it"
                )));
            }
        }
        Ok(())
    }
}

/// Dimensional state (S, X, Y, Z), all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemostatState {
    /// Nutrient concentration.
    pub s: f64,
    /// Autotroph concentration.
    pub x: f64,
    /// Herbivore concentration.
    pub y: f64,
    /// Mixotroph concentration.
    pub z: f64,
}

impl ChemostatState {
    pub fn new(s: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if [s, x, y, z].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "state coordinates must be nonnegative, got ({s}, {x}, {y}, {z})"
            )));
        }
        Ok(Self { s, x, y, z })
    }
}

/// Dimensionless parameters of the scaled system.
///
/// `m` is redundant (`m = a1 / (1 + b1*x_star)`) and never enters the scaled
/// equations; it is kept so the identity can be checked. The analysis modules
/// work in the saturated case `gamma1 = kappa1 = gamma2 = kappa2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub c: f64,
    pub k: f64,
    pub x_star: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default)]
    pub kappa1: f64,
    #[serde(default)]
    pub gamma2: f64,
    #[serde(default)]
    pub kappa2: f64,
    /// Derived: a1 / (1 + b1*x_star).
    #[serde(default)]
    pub m: f64,
}

impl ScaledParams {
    /// Builds a saturated (`gamma = kappa = 0`) parameter set and validates it.
    pub fn saturated(
        c: f64,
        k: f64,
        x_star: f64,
        a1: f64,
        a2: f64,
        b1: f64,
        b2: f64,
    ) -> Result<Self> {
        let mut sp = Self {
            c,
            k,
            x_star,
            a1,
            a2,
            b1,
            b2,
            gamma1: 0.0,
            kappa1: 0.0,
            gamma2: 0.0,
            kappa2: 0.0,
            m: 0.0,
        };
        sp.m = a1 / (1.0 + b1 * x_star);
        sp.validate()?;
        Ok(sp)
    }

    /// Returns a copy with `x_star` and `a2` replaced (and `m` recomputed),
    /// for parameter-plane studies.
    pub fn with_x_star_a2(&self, x_star: f64, a2: f64) -> Result<Self> {
        let mut sp = *self;
        sp.x_star = x_star;
        sp.a2 = a2;
        sp.m = sp.a1 / (1.0 + sp.b1 * x_star);
        sp.validate()?;
        Ok(sp)
    }

    /// Fills in a missing derived `m` (deserialized files may omit it).
    pub fn normalized(mut self) -> Self {
        if self.m == 0.0 {
            self.m = self.a1 / (1.0 + self.b1 * self.x_star);
        }
        self
    }

    /// Checks the ranges and derived identities of the scaled parameters.
    pub fn validate(&self) -> Result<()> {
        let open_unit = [("c", self.c), ("k", self.k), ("x_star", self.x_star)];
        for (name, v) in open_unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        for (name, v) in [("a1", self.a1), ("a2", self.a2), ("m", self.m)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("b1", self.b1),
            ("b2", self.b2),
            ("gamma1", self.gamma1),
            ("kappa1", self.kappa1),
            ("gamma2", self.gamma2),
            ("kappa2", self.kappa2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        let m_expected = self.a1 / (1.0 + self.b1 * self.x_star);
        if (self.m - m_expected).abs() > 1e-9 * m_expected.abs() {
            return Err(Error::InvalidParams(format!(
                "m = {} does not satisfy m = a1/(1+b1*x_star) = {m_expected}",
                self.m
            )));
        }
        if self.kappa1 > 0.0 && self.kappa2 > 0.0 {
            let r1 = self.gamma1 / self.kappa1;
            let r2 = self.gamma2 / self.kappa2;
            if (r1 - r2).abs() > 1e-9 * r1.abs().max(r2.abs()).max(1.0) {
                return Err(Error::InvalidParams(format!(
                    "gamma1/kappa1 = {r1} and gamma2/kappa2 = {r2} must agree"
                )));
            }
        }
        Ok(())
    }

    /// True when all saturation corrections vanish (the case the equilibrium
    /// and stability analysis applies to).
    pub fn is_saturated(&self) -> bool {
        self.gamma1 == 0.0 && self.kappa1 == 0.0 && self.gamma2 == 0.0 && self.kappa2 == 0.0
    }

    pub(crate) fn require_saturated(&self) -> Result<()> {
        if self.is_saturated() {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "operation requires the saturated case gamma1 = kappa1 = gamma2 = kappa2 = 0"
                    .into(),
            ))
        }
    }
}

/// Outcome of the trade-off checks on a dimensional parameter set.
///
/// Condition (A): autotrophs out-compete mixotrophs for nutrient.
/// Condition (B): herbivores out-graze mixotrophs on autotrophs, either
/// globally (for all autotroph densities up to C) or locally (at the
/// herbivore subsistence density).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub condition_a: bool,
    pub condition_b_global: bool,
    pub condition_b_local: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    /// True when the scaled model is well defined for analysis (condition (A)
    /// and the local form of condition (B)).
    pub fn analysis_ready(&self) -> bool {
        self.condition_a && self.condition_b_local
    }
}

/// Evaluates the trade-off inequalities on a dimensional parameter set.
///
/// All inequalities are strict; equality counts as a failure and is called
/// out in `messages`.
pub fn validate_trade_offs(p: &ChemostatParams) -> Result<ValidationReport> {
    p.validate()?;
    let mut messages = Vec::new();

    let lhs_a = p.a1 - p.a2;
    let rhs_a = p.d * (p.a1 * p.b1 - p.a2 * p.b2);
    let condition_a = lhs_a > rhs_a;
    messages.push(format!(
        "condition (A): A1 - A2 > D*(A1*B1 - A2*B2): {lhs_a} > {rhs_a}: {}",
        verdict(lhs_a, rhs_a)
    ));

    let lhs_bg = p.a3 - p.a4;
    let rhs_bg = p.a3 * p.a4 * p.c * (p.b3 - p.b4);
    let condition_b_global = p.a3 > p.a4 && lhs_bg > rhs_bg;
    messages.push(format!(
        "condition (B) global: A3 > A4 and A3 - A4 > A3*A4*C*(B3 - B4): {lhs_bg} > {rhs_bg}: {}",
        if p.a3 > p.a4 {
            verdict(lhs_bg, rhs_bg)
        } else {
            "fails (A3 <= A4)"
        }
    ));

    let lhs_bl = p.a3 - p.a4;
    let rhs_bl = p.d * (p.a3 * p.b3 - p.a4 * p.b4);
    let condition_b_local = lhs_bl > rhs_bl;
    messages.push(format!(
        "condition (B) local: A3 - A4 > D*(A3*B3 - A4*B4): {lhs_bl} > {rhs_bl}: {}",
        verdict(lhs_bl, rhs_bl)
    ));

    Ok(ValidationReport {
        condition_a,
        condition_b_global,
        condition_b_local,
        messages,
    })
}

fn verdict(lhs: f64, rhs: f64) -> &'static str {
    if lhs > rhs {
        "holds"
    } else if lhs == rhs {
        "fails (boundary: equality)"
    } else {
        "fails"
    }
}

/// Nondimensionalizes a dimensional parameter set into [`ScaledParams`].
///
/// Requires condition (A), the local form of condition (B), and a positive
/// state/time scale factor `A1*C*(1 - D*B1) - D` (the autotroph must persist
/// alone for the scaling to make sense).
pub fn nondimensionalize(p: &ChemostatParams) -> Result<ScaledParams> {
    let report = validate_trade_offs(p)?;
    if !report.condition_a {
        return Err(Error::TradeOffViolated(
            "condition (A) fails: A1 - A2 > D*(A1*B1 - A2*B2) does not hold".into(),
        ));
    }
    if !report.condition_b_local {
        return Err(Error::TradeOffViolated(
            "condition (B) local fails: A3 - A4 > D*(A3*B3 - A4*B4) does not hold".into(),
        ));
    }

    let w1 = 1.0 - p.d * p.b1;
    let w2 = 1.0 - p.d * p.b2;
    let w3 = 1.0 - p.d * p.b3;
    let w4 = 1.0 - p.d * p.b4;
    // State/time scale: the autotroph-alone equilibrium times A1*w1.
    let sigma = p.a1 * p.c * w1 - p.d;
    if sigma <= 0.0 {
        return Err(Error::ScaleDegenerate(format!(
            "A1*C*(1 - D*B1) - D = {sigma} must be > 0 (autotroph cannot persist)"
        )));
    }

    let a1w1 = p.a1 * w1;
    let sp = ScaledParams {
        c: (a1w1 / (p.a2 * w2)) * ((p.a2 * p.c * w2 - p.d) / sigma),
        k: p.a2 * w2 / a1w1,
        x_star: p.a1 * p.d * w1 / (p.a3 * w3 * sigma),
        a1: p.a3 / a1w1,
        a2: p.a4 * w4 / a1w1,
        b1: p.a3 * p.b3 * sigma / a1w1,
        b2: p.a4 * p.b4 * sigma / a1w1,
        gamma1: p.a1 * p.b1 * p.c,
        kappa1: p.b1 * sigma / w1,
        gamma2: p.a2 * p.b2 * p.c,
        kappa2: p.a2 * p.b2 * sigma / a1w1,
        m: p.a3 * w3 / a1w1,
    };
    sp.validate().map_err(|e| match e {
        Error::InvalidParams(msg) => Error::ScaleDegenerate(format!(
            "scaled parameters fall outside their admissible ranges: {msg}"
        )),
        other => other,
    })?;
    Ok(sp)
}

/// Upper bound on the mixotrophic grazing parameter `a2` implied by the local
/// grazing trade-off: `a2 < a1*(1 + b2*x_star)/(1 + b1*x_star)`.
pub fn mixotroph_efficiency_bound(sp: &ScaledParams) -> f64 {
    sp.a1 * (1.0 + sp.b2 * sp.x_star) / (1.0 + sp.b1 * sp.x_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_dimensional() -> ChemostatParams {
        // Chosen so every admissibility constraint holds with slack.
        ChemostatParams::new(
            2.0,
            0.4,
            [3.0, 1.5, 2.5, 1.0],
            [0.2, 0.1, 0.15, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn condition_a_boundary_equality_is_false() {
        let p = ChemostatParams::new(1.0, 0.5, [2.0, 2.0, 3.0, 1.0], [0.3, 0.3, 0.0, 0.0]).unwrap();
        let r = validate_trade_offs(&p).unwrap();
        assert!(!r.condition_a);
        assert!(r.messages.iter().any(|m| m.contains("boundary")));
    }

    #[test]
    fn condition_a_reduces_to_search_rates_without_handling() {
        let p = ChemostatParams::new(1.0, 0.7, [2.0, 1.0, 3.0, 1.0], [0.0; 4]).unwrap();
        assert!(validate_trade_offs(&p).unwrap().condition_a);
    }

    #[test]
    fn condition_b_direct_inequalities() {
        let p = ChemostatParams::new(1.0, 0.5, [3.0, 1.0, 2.0, 1.0], [0.0, 0.0, 0.1, 0.2]).unwrap();
        let r = validate_trade_offs(&p).unwrap();
        // A3 - A4 = 1 > A3*A4*C*(B3-B4) = -0.2 and 1 > D*(A3*B3 - A4*B4) = 0.
        assert!(r.condition_b_global);
        assert!(r.condition_b_local);
    }

    #[test]
    fn zero_handling_times_scale_to_closed_forms() {
        let p = ChemostatParams::new(2.0, 0.3, [3.0, 2.0, 2.5, 1.0], [0.0; 4]).unwrap();
        let sp = nondimensionalize(&p).unwrap();
        assert_eq!(sp.b1, 0.0);
        assert_eq!(sp.b2, 0.0);
        assert_eq!(sp.gamma1, 0.0);
        assert_eq!(sp.kappa2, 0.0);
        assert!((sp.k - p.a2 / p.a1).abs() < 1e-15);
        let c_expected = (p.a1 / p.a2) * (p.a2 * p.c - p.d) / (p.a1 * p.c - p.d);
        assert!((sp.c - c_expected).abs() < 1e-15);
    }

    #[test]
    fn m_identity_and_ranges_hold() {
        let sp = nondimensionalize(&base_dimensional()).unwrap();
        let rel = (sp.m * (1.0 + sp.b1 * sp.x_star) - sp.a1).abs() / sp.a1;
        assert!(rel < 1e-12, "m identity violated by {rel}");
        assert!(sp.c > 0.0 && sp.c < 1.0);
        assert!(sp.k > 0.0 && sp.k < 1.0);
        assert!(sp.x_star > 0.0 && sp.x_star < 1.0);
        assert!(sp.m <= sp.a1);
        assert!(sp.validate().is_ok());
    }

    #[test]
    fn x_star_matches_definition() {
        let p = base_dimensional();
        let sp = nondimensionalize(&p).unwrap();
        let w1 = 1.0 - p.d * p.b1;
        let w3 = 1.0 - p.d * p.b3;
        let expected = p.a1 * p.d * w1 / (p.a3 * w3 * (p.a1 * p.c * w1 - p.d));
        assert!((sp.x_star - expected).abs() < 1e-15);
    }

    #[test]
    fn gamma_kappa_ratio_consistency() {
        let sp = nondimensionalize(&base_dimensional()).unwrap();
        assert!(sp.kappa1 > 0.0 && sp.kappa2 > 0.0);
        let r1 = sp.gamma1 / sp.kappa1;
        let r2 = sp.gamma2 / sp.kappa2;
        assert!((r1 - r2).abs() < 1e-12 * r1);
        assert!(sp.kappa1 <= sp.gamma1 && sp.kappa2 <= sp.gamma2);
    }

    #[test]
    fn scale_degenerate_when_autotroph_cannot_persist() {
        let p = ChemostatParams::new(0.2, 1.0, [3.0, 1.0, 2.0, 1.0], [0.0; 4]).unwrap();
        // A1*C - D = 0.6 - 1.0 < 0.
        match nondimensionalize(&p) {
            Err(Error::ScaleDegenerate(_)) => {}
            other => panic!("expected ScaleDegenerate, got {other:?}"),
        }
    }

    #[test]
    fn trade_off_violation_is_reported() {
        let p = ChemostatParams::new(2.0, 0.4, [1.5, 3.0, 2.5, 1.0], [0.0; 4]).unwrap();
        match nondimensionalize(&p) {
            Err(Error::TradeOffViolated(msg)) => assert!(msg.contains("(A)")),
            other => panic!("expected TradeOffViolated, got {other:?}"),
        }
    }

    #[test]
    fn efficiency_bound_matches_hand_values() {
        let sp = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 4.5, 50.0, 55.0).unwrap();
        let bound = mixotroph_efficiency_bound(&sp);
        assert!((bound - 8.5 * 3.75 / 3.5).abs() < 1e-12);

        let equal_handling = ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 4.5, 50.0, 50.0).unwrap();
        assert!((mixotroph_efficiency_bound(&equal_handling) - 8.5).abs() < 1e-12);
    }

    #[test]
    fn direct_construction_rejects_out_of_range() {
        assert!(ScaledParams::saturated(1.2, 0.95, 0.05, 8.5, 4.5, 50.0, 55.0).is_err());
        assert!(ScaledParams::saturated(0.2, 0.95, 1.05, 8.5, 4.5, 50.0, 55.0).is_err());
        assert!(ScaledParams::saturated(0.2, 0.95, 0.05, -8.5, 4.5, 50.0, 55.0).is_err());
    }

    #[test]
    fn m_is_one_enforced() {
        let mut p = base_dimensional();
        p.m2 = 0.9;
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
    }
}
