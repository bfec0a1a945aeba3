//! Region classification of the `(x_star, a2)` parameter plane and the
//! raster sweep that maps it.
//!
//! Analytic predicates (threshold bands, equilibrium counts, invasion signs,
//! coexistence existence and stability) pin down most region labels. Pairs
//! that differ only in how cycles respond to invasion are resolved by
//! simulating from a standard invasion start; the budget for that simulation
//! is expressed in model time so sweeps stay deterministic.

use serde::{Deserialize, Serialize};

use crate::dynamics::{eval_structural_derivatives, eval_structural_functions, State3};
use crate::equilibria::{
    a2_thresholds, coexistence_equilibrium, competition_roots, EquilibriumKind, ThresholdSet,
};
use crate::error::{Error, Result};
use crate::model::{mixotroph_efficiency_bound, ScaledParams};
use crate::solver::{detect_attractor_with, AttractorKind, DetectOptions};
use crate::stability::routh_hurwitz;

/// Marginality tolerance on the region-defining scalar predicates.
const BOUNDARY_EPS: f64 = 1e-9;

/// Qualitative regime of the predator-prey plane at a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PpRegime {
    Cycle,
    StableEq,
}

/// Which `a2` band the cell falls in, ordered bottom to top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum A2Band {
    BelowCheck,
    CheckToHopfComp,
    HopfCompToHat,
    HatToStar,
    AboveStar,
}

/// Analytic fingerprint of one `(x_star, a2)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSignature {
    pub pp_regime: PpRegime,
    pub a2_band: A2Band,
    pub coexist_exists: bool,
    pub coexist_stable: Option<bool>,
    pub mixo_cc_stable: bool,
    pub n_comp_eq: u8,
    pub comp_plus_planar_stable: Option<bool>,
    /// First failing stability criterion (1..3) at an unstable coexistence
    /// equilibrium; separates the trace-failure from minor-failure sub-areas.
    pub rh_failing_criterion: Option<u8>,
}

/// How a cell's label was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Analytic,
    SimulationAssisted,
}

/// Region letter of the taxonomy, or unresolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    Letter(char),
    Unresolved,
}

impl RegionLabel {
    pub fn as_char(&self) -> char {
        match self {
            RegionLabel::Letter(c) => *c,
            RegionLabel::Unresolved => '?',
        }
    }
}

/// One classified cell of the parameter plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub x_star: f64,
    pub a2: f64,
    /// Absent when classification failed before the predicates resolved
    /// (boundary hits, invalid parameters).
    pub signature: Option<RegionSignature>,
    pub label: RegionLabel,
    pub provenance: Provenance,
    /// Set for labels the taxonomy itself marks as numerically uncertain.
    pub uncertain: bool,
    /// Human-readable remark (boundary hits, failures) when present.
    pub note: Option<String>,
}

/// Options for classification and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Model-time budget for one disambiguating simulation; zero disables
    /// simulation and leaves ambiguous cells unresolved.
    pub sim_budget: f64,
    pub detect: DetectOptions,
    /// A species whose post-transient maximum stays below this is extinct.
    pub extinction_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            sim_budget: 8000.0,
            detect: DetectOptions::default(),
            extinction_tol: 1e-6,
        }
    }
}

fn guard_boundary(name: &str, value: f64) -> Result<()> {
    if value.abs() < BOUNDARY_EPS {
        Err(Error::OnBoundary(format!("{name} = {value}")))
    } else {
        Ok(())
    }
}

/// Outcome categories of the disambiguating simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SimOutcome {
    /// Mixotrophs die out; the attractor lives in the predator-prey plane.
    MixotrophExtinct,
    /// Herbivores die out; the attractor lives in the competition plane.
    HerbivoreExtinct,
    /// All three species persist in an oscillatory attractor.
    AllPersist,
    Inconclusive,
}

/// Classifies a single `(x_star, a2)` point against the base parameters.
pub fn classify_region(
    x_star: f64,
    a2: f64,
    base: &ScaledParams,
    opts: &ClassifyOptions,
) -> Result<RegionCell> {
    base.require_saturated()?;
    let sp = base.with_x_star_a2(x_star, a2)?;
    let bound = mixotroph_efficiency_bound(&sp);
    if a2 >= bound {
        return Err(Error::InvalidParams(format!(
            "a2 = {a2} exceeds the efficiency bound {bound}; the local grazing trade-off fails"
        )));
    }
    let thresholds = a2_thresholds(&sp)?;
    let signature = build_signature(&sp, &thresholds)?;
    let (label, provenance, uncertain, note) = resolve_label(&sp, &signature, opts)?;
    Ok(RegionCell {
        x_star,
        a2,
        signature: Some(signature),
        label,
        provenance,
        uncertain,
        note,
    })
}

fn build_signature(sp: &ScaledParams, t: &ThresholdSet) -> Result<RegionSignature> {
    // Predator-prey plane: sign of F1'(x*) separates cycle from equilibrium.
    let d_star = eval_structural_derivatives(sp.x_star, sp);
    guard_boundary("F1'(x_star)", d_star.big_f1)?;
    let pp_regime = if d_star.big_f1 > 0.0 {
        PpRegime::Cycle
    } else {
        PpRegime::StableEq
    };

    // a2 band from the threshold ladder.
    guard_boundary("a2 - check_a2", sp.a2 - t.check_a2)?;
    guard_boundary("a2 - hat_a2", sp.a2 - t.hat_a2)?;
    if let Some(hopf) = t.hopf_comp_a2 {
        guard_boundary("a2 - hopf_comp_a2", sp.a2 - hopf)?;
    }
    if let Some(star) = t.a2_star {
        guard_boundary("a2 - a2_star", sp.a2 - star)?;
    }
    let a2_band = if sp.a2 < t.check_a2 {
        A2Band::BelowCheck
    } else if sp.a2 < t.hat_a2 {
        match t.hopf_comp_a2 {
            Some(hopf) if sp.a2 > hopf => A2Band::HopfCompToHat,
            _ => A2Band::CheckToHopfComp,
        }
    } else {
        match t.a2_star {
            Some(star) if sp.a2 < star => A2Band::HatToStar,
            _ => A2Band::AboveStar,
        }
    };

    let mixo_lead = 1.0 - (1.0 + sp.a2) * sp.c;
    guard_boundary("mixotroph-cc leading eigenvalue", mixo_lead)?;
    let mixo_cc_stable = mixo_lead < 0.0;

    let roots = competition_roots(sp, sp.a2);
    let n_comp_eq = roots.len() as u8;
    for x in &roots {
        guard_boundary("x_star - competition root", sp.x_star - x)?;
    }
    let comp_plus_planar_stable = match crate::equilibria::comp_plus_planar_margin(sp, sp.a2) {
        Some(margin) => {
            guard_boundary("x+ planar stability margin", margin)?;
            Some(margin < 0.0)
        }
        None => None,
    };

    // Coexistence existence and stability.
    let coex = coexistence_equilibrium(sp)?;
    let v = eval_structural_functions(sp.x_star, sp);
    guard_boundary("G(x_star) - F1(x_star)", v.g - v.big_f1)?;
    guard_boundary("G(x_star) - F2(x_star)", v.g - v.big_f2)?;
    let (coexist_exists, coexist_stable, rh_failing) = match coex {
        Some(e) => {
            let verdict = routh_hurwitz(&e.jacobian);
            if verdict.marginal {
                return Err(Error::OnBoundary(
                    "coexistence stability criterion within tolerance of zero".into(),
                ));
            }
            (true, Some(verdict.stable), verdict.failing_criterion())
        }
        None => (false, None, None),
    };

    Ok(RegionSignature {
        pp_regime,
        a2_band,
        coexist_exists,
        coexist_stable,
        mixo_cc_stable,
        n_comp_eq,
        comp_plus_planar_stable,
        rh_failing_criterion: rh_failing,
    })
}

fn resolve_label(
    sp: &ScaledParams,
    sig: &RegionSignature,
    opts: &ClassifyOptions,
) -> Result<(RegionLabel, Provenance, bool, Option<String>)> {
    use PpRegime::{Cycle, StableEq};
    let analytic = |c: char| {
        Ok((
            RegionLabel::Letter(c),
            Provenance::Analytic,
            false,
            None,
        ))
    };
    let unresolved = |why: &str| {
        Ok((
            RegionLabel::Unresolved,
            Provenance::Analytic,
            false,
            Some(why.to_string()),
        ))
    };

    let roots = competition_roots(sp, sp.a2);
    let coex_unstable = sig.coexist_exists && sig.coexist_stable == Some(false);
    let coex_stable = sig.coexist_exists && sig.coexist_stable == Some(true);

    match (sig.n_comp_eq, sig.pp_regime) {
        // No competition equilibria.
        (0, regime) => {
            if sig.mixo_cc_stable {
                if sig.coexist_exists {
                    return unresolved("no taxonomy row: stable mixotroph cc with coexistence");
                }
                return analytic(if regime == Cycle { 'a' } else { 'b' });
            }
            match regime {
                StableEq => {
                    if sig.coexist_exists {
                        return unresolved("no taxonomy row: stable pp equilibrium, no competition equilibria, coexistence present");
                    }
                    analytic('y')
                }
                Cycle => {
                    if coex_stable {
                        return unresolved("no taxonomy row: stable coexistence without competition equilibria");
                    }
                    let (outcome, note) = simulate_invasion(sp, opts)?;
                    let pair = if sig.coexist_exists {
                        // Oscillatory coexistence vs a mixotroph-proof cycle.
                        ('u', 't', true)
                    } else {
                        ('w', 'x', false)
                    };
                    finish_sim(outcome, pair, note)
                }
            }
        }
        // Two competition equilibria: the upper band with a stable mixotroph cc.
        (2, StableEq) => {
            if sig.coexist_exists {
                return unresolved("no taxonomy row: two competition equilibria with coexistence right of the Hopf line");
            }
            analytic('f')
        }
        (2, Cycle) => {
            if coex_stable {
                return unresolved("no taxonomy row: stable coexistence in the two-equilibria band");
            }
            if sig.coexist_exists {
                return analytic('d');
            }
            let x_minus = roots[0];
            let x_plus = roots[1];
            if sp.x_star < x_minus {
                analytic('c')
            } else if sp.x_star > x_plus {
                analytic('e')
            } else {
                unresolved("between competition roots without coexistence")
            }
        }
        // One competition equilibrium.
        (1, regime) => {
            let planar_stable = sig.comp_plus_planar_stable.unwrap_or(true);
            let x_plus = roots[0];
            if !planar_stable {
                // Competition-plane limit cycle band.
                match regime {
                    StableEq => {
                        if sig.coexist_exists {
                            return unresolved("no taxonomy row: competition cycle band with coexistence right of the Hopf line");
                        }
                        analytic('j')
                    }
                    Cycle => {
                        if coex_stable {
                            return unresolved("no taxonomy row: stable coexistence in the competition cycle band");
                        }
                        if !sig.coexist_exists {
                            return analytic('i');
                        }
                        let (outcome, note) = simulate_invasion(sp, opts)?;
                        match outcome {
                            SimOutcome::HerbivoreExtinct => Ok((
                                RegionLabel::Letter('h'),
                                Provenance::SimulationAssisted,
                                false,
                                note,
                            )),
                            SimOutcome::AllPersist => Ok((
                                RegionLabel::Letter('g'),
                                Provenance::SimulationAssisted,
                                false,
                                note,
                            )),
                            _ => Ok((
                                RegionLabel::Unresolved,
                                Provenance::SimulationAssisted,
                                false,
                                note,
                            )),
                        }
                    }
                }
            } else {
                match regime {
                    StableEq => {
                        if coex_stable {
                            analytic('n')
                        } else if coex_unstable {
                            unresolved("no taxonomy row: unstable coexistence right of the Hopf line")
                        } else if sp.x_star > x_plus {
                            analytic('o')
                        } else {
                            analytic('s')
                        }
                    }
                    Cycle => {
                        if coex_stable {
                            return analytic('m');
                        }
                        if coex_unstable {
                            let (outcome, note) = simulate_invasion(sp, opts)?;
                            return finish_sim(outcome, ('k', 'p', true), note);
                        }
                        if sp.x_star > x_plus {
                            return analytic('l');
                        }
                        let (outcome, note) = simulate_invasion(sp, opts)?;
                        finish_sim(outcome, ('q', 'r', false), note)
                    }
                }
            }
        }
        _ => unresolved("unexpected competition equilibrium count"),
    }
}

/// Maps a simulation outcome onto an (oscillatory, predator-prey-cycle) label
/// pair; the predator-prey side of the uncertain pairs carries the flag.
fn finish_sim(
    outcome: SimOutcome,
    (oscillatory, pp_side, pp_uncertain): (char, char, bool),
    note: Option<String>,
) -> Result<(RegionLabel, Provenance, bool, Option<String>)> {
    match outcome {
        SimOutcome::AllPersist => Ok((
            RegionLabel::Letter(oscillatory),
            Provenance::SimulationAssisted,
            false,
            note,
        )),
        SimOutcome::MixotrophExtinct => Ok((
            RegionLabel::Letter(pp_side),
            Provenance::SimulationAssisted,
            pp_uncertain,
            note,
        )),
        _ => Ok((
            RegionLabel::Unresolved,
            Provenance::SimulationAssisted,
            false,
            note,
        )),
    }
}

/// Runs the standard invasion simulation: start near the predator-prey
/// attractor with a small mixotroph inoculum and see who persists.
fn simulate_invasion(sp: &ScaledParams, opts: &ClassifyOptions) -> Result<(SimOutcome, Option<String>)> {
    if opts.sim_budget <= 0.0 {
        return Ok((
            SimOutcome::Inconclusive,
            Some("simulation budget exhausted".into()),
        ));
    }
    let v = eval_structural_functions(sp.x_star, sp);
    let start = State3::new(sp.x_star, 0.9 * v.big_f1, 0.01);
    let report = match detect_attractor_with(sp, start, opts.sim_budget, &opts.detect) {
        Ok(r) => r,
        Err(e) => {
            return Ok((
                SimOutcome::Inconclusive,
                Some(format!("simulation failed: {e}")),
            ))
        }
    };
    let outcome = match &report.kind {
        AttractorKind::Equilibrium { kind, .. } => match kind {
            EquilibriumKind::PredatorPrey => SimOutcome::MixotrophExtinct,
            EquilibriumKind::MixotrophCC
            | EquilibriumKind::CompetitionMinus
            | EquilibriumKind::CompetitionPlus => SimOutcome::HerbivoreExtinct,
            EquilibriumKind::Coexistence => SimOutcome::AllPersist,
            _ => SimOutcome::Inconclusive,
        },
        AttractorKind::LimitCycle { .. } | AttractorKind::Undetermined => {
            let y_max = report.ranges[1].1;
            let z_max = report.ranges[2].1;
            if z_max < opts.extinction_tol {
                SimOutcome::MixotrophExtinct
            } else if y_max < opts.extinction_tol {
                SimOutcome::HerbivoreExtinct
            } else if matches!(report.kind, AttractorKind::Undetermined)
                && report.final_rhs_norm > 1e-6
                && z_max < 1e-3
            {
                // Slowly decaying mixotrophs: not safely classifiable.
                SimOutcome::Inconclusive
            } else {
                SimOutcome::AllPersist
            }
        }
    };
    Ok((outcome, None))
}

/// One axis of a sweep grid: `n` evenly spaced values on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidParams(format!(
                "axis needs n >= 2 and hi > lo, got [{lo}, {hi}] with n = {n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

/// Sweep grid over the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_star: AxisSpec,
    pub a2: AxisSpec,
}

fn classify_cell_or_note(
    x_star: f64,
    a2: f64,
    base: &ScaledParams,
    opts: &ClassifyOptions,
) -> RegionCell {
    match classify_region(x_star, a2, base, opts) {
        Ok(cell) => cell,
        Err(e) => RegionCell {
            x_star,
            a2,
            signature: None,
            label: RegionLabel::Unresolved,
            provenance: Provenance::Analytic,
            uncertain: false,
            note: Some(e.to_string()),
        },
    }
}

/// Classifies every grid cell sequentially, row-major with `x_star` outer.
pub fn sweep_serial(grid: &GridSpec, base: &ScaledParams, opts: &ClassifyOptions) -> Vec<RegionCell> {
    let xs = grid.x_star.values();
    let a2s = grid.a2.values();
    let mut cells = Vec::with_capacity(xs.len() * a2s.len());
    for x in &xs {
        for a2 in &a2s {
            cells.push(classify_cell_or_note(*x, *a2, base, opts));
        }
    }
    cells
}

/// Classifies every grid cell, fanning out across a worker pool when the
/// `parallel` feature is enabled. Output order and content are identical to
/// [`sweep_serial`] regardless of worker count.
#[cfg(feature = "parallel")]
pub fn sweep(
    grid: &GridSpec,
    base: &ScaledParams,
    opts: &ClassifyOptions,
    threads: Option<usize>,
) -> Result<Vec<RegionCell>> {
    use rayon::prelude::*;

    let xs = grid.x_star.values();
    let a2s = grid.a2.values();
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|x| a2s.iter().map(move |a2| (*x, *a2)))
        .collect();
    let work = || {
        points
            .par_iter()
            .map(|(x, a2)| classify_cell_or_note(*x, *a2, base, opts))
            .collect::<Vec<_>>()
    };
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        _ => Ok(work()),
    }
}

/// Sequential fallback with the same signature when built without rayon.
#[cfg(not(feature = "parallel"))]
pub fn sweep(
    grid: &GridSpec,
    base: &ScaledParams,
    opts: &ClassifyOptions,
    _threads: Option<usize>,
) -> Result<Vec<RegionCell>> {
    Ok(sweep_serial(grid, base, opts))
}

/// One row of the boundary-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x_star: f64,
    /// Lower coexistence-existence boundary (the "blue" curve).
    pub breve_a2: f64,
    /// Upper coexistence-existence boundary (the "red" curve).
    pub tilde_a2: f64,
}

/// The coexistence-window boundary curves with the plane-wide constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    pub check_a2: f64,
    pub hat_a2: f64,
    pub a2_star: Option<f64>,
    pub hopf_comp_a2: Option<f64>,
    pub x_h: Option<f64>,
    /// Gap between the sampled maximum of the upper curve and `a2_star`;
    /// small whenever the grid resolves the maximum.
    pub tilde_max_gap: Option<f64>,
}

/// Tabulates the window boundaries over an `x_star` grid.
pub fn boundary_curves(base: &ScaledParams, x_grid: &AxisSpec) -> Result<CurveTable> {
    base.require_saturated()?;
    let rows: Vec<CurveRow> = x_grid
        .values()
        .into_iter()
        .map(|x| {
            let sp = base.with_x_star_a2(x, base.a2)?;
            Ok(CurveRow {
                x_star: x,
                breve_a2: crate::equilibria::breve_a2(&sp),
                tilde_a2: crate::equilibria::tilde_a2(&sp),
            })
        })
        .collect::<Result<_>>()?;
    let t = a2_thresholds(base)?;
    let x_h = if base.b1 > 1.0 + 1.0 / base.a1 {
        Some((-base.a1 - 1.0 + (base.a1 * base.a1 + base.a1 + base.a1 * base.b1).sqrt()) / base.b1)
    } else {
        None
    };
    let tilde_max = rows
        .iter()
        .map(|r| r.tilde_a2)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CurveTable {
        rows,
        check_a2: t.check_a2,
        hat_a2: t.hat_a2,
        a2_star: t.a2_star,
        hopf_comp_a2: t.hopf_comp_a2,
        x_h,
        tilde_max_gap: t.a2_star.map(|star| (tilde_max - star).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScaledParams {
        ScaledParams::saturated(0.2, 0.95, 0.05, 8.5, 4.5, 50.0, 55.0).unwrap()
    }

    fn analytic_opts() -> ClassifyOptions {
        ClassifyOptions {
            sim_budget: 0.0,
            ..ClassifyOptions::default()
        }
    }

    #[test]
    fn analytic_labels_resolve_without_simulation() {
        let opts = analytic_opts();
        let cell = classify_region(0.26, 3.9, &base(), &opts).unwrap();
        assert_eq!(cell.label, RegionLabel::Letter('j'));
        assert_eq!(cell.provenance, Provenance::Analytic);

        let cell = classify_region(0.05, 4.5, &base(), &opts).unwrap();
        assert_eq!(cell.label, RegionLabel::Letter('d'));
        let sig = cell.signature.unwrap();
        assert_eq!(sig.n_comp_eq, 2);
        assert!(sig.coexist_exists);
        assert!(sig.mixo_cc_stable);
    }

    #[test]
    fn simulation_pairs_degrade_without_budget() {
        let opts = analytic_opts();
        let cell = classify_region(0.2, 0.5, &base(), &opts).unwrap();
        assert_eq!(cell.label, RegionLabel::Unresolved);
        assert_eq!(cell.provenance, Provenance::SimulationAssisted);
    }

    #[test]
    fn marked_point_x_resolves_with_budget() {
        let opts = ClassifyOptions::default();
        let cell = classify_region(0.2, 0.5, &base(), &opts).unwrap();
        assert_eq!(cell.label, RegionLabel::Letter('x'));
        assert_eq!(cell.provenance, Provenance::SimulationAssisted);
    }

    #[test]
    fn boundary_hits_are_reported() {
        // a2 exactly on the transcritical line k(1-c).
        let err = classify_region(0.3, 0.76, &base(), &analytic_opts());
        assert!(matches!(err, Err(Error::OnBoundary(_))), "{err:?}");
    }

    #[test]
    fn out_of_bound_a2_is_rejected() {
        let err = classify_region(0.05, 12.0, &base(), &analytic_opts());
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn degenerate_grid_spans_one_region() {
        let grid = GridSpec {
            x_star: AxisSpec::new(0.04, 0.06, 2).unwrap(),
            a2: AxisSpec::new(4.4, 4.6, 2).unwrap(),
        };
        let cells = sweep_serial(&grid, &base(), &analytic_opts());
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.label == RegionLabel::Letter('d')));
    }

    #[test]
    fn sweep_order_is_row_major_and_parallel_agrees() {
        let grid = GridSpec {
            x_star: AxisSpec::new(0.05, 0.3, 4).unwrap(),
            a2: AxisSpec::new(1.0, 5.0, 5).unwrap(),
        };
        let opts = analytic_opts();
        let serial = sweep_serial(&grid, &base(), &opts);
        assert_eq!(serial.len(), 20);
        // Row-major: x_star constant across each inner block.
        for (i, cell) in serial.iter().enumerate() {
            let xi = i / 5;
            assert_eq!(cell.x_star, grid.x_star.values()[xi]);
            assert_eq!(cell.a2, grid.a2.values()[i % 5]);
        }
        let par = sweep(&grid, &base(), &opts, Some(3)).unwrap();
        assert_eq!(serial, par);
        let par1 = sweep(&grid, &base(), &opts, Some(1)).unwrap();
        assert_eq!(serial, par1);
    }

    #[test]
    fn curves_bound_the_window_and_peak_at_a2_star() {
        let grid = AxisSpec::new(0.01, 0.99, 197).unwrap();
        let table = boundary_curves(&base(), &grid).unwrap();
        assert!(table.rows.iter().all(|r| r.breve_a2 < r.tilde_a2));
        // Far right both curves collapse onto k(1-c).
        let last = table.rows.last().unwrap();
        assert!((last.breve_a2 - table.check_a2).abs() < 0.05);
        assert!((last.tilde_a2 - table.check_a2).abs() < 0.05);
        let gap = table.tilde_max_gap.unwrap();
        assert!(gap < 0.01, "red-curve maximum misses a2_star by {gap}");
    }

    #[test]
    fn blue_curve_crosses_check_line_at_lemma_threshold() {
        // check_a2 = breve_a2 exactly at x* = (a1 - hat_a2)/(b1 * hat_a2).
        let sp = base();
        let x_threshold = (sp.a1 - 4.0) / (sp.b1 * 4.0);
        let probe = sp.with_x_star_a2(x_threshold, sp.a2).unwrap();
        let breve = crate::equilibria::breve_a2(&probe);
        assert!((breve - 0.76).abs() < 1e-10);
        // Above the threshold the blue curve sits above the check line.
        let probe = sp.with_x_star_a2(x_threshold * 1.5, sp.a2).unwrap();
        assert!(crate::equilibria::breve_a2(&probe) > 0.76);
        let probe = sp.with_x_star_a2(x_threshold * 0.5, sp.a2).unwrap();
        assert!(crate::equilibria::breve_a2(&probe) < 0.76);
    }
}
