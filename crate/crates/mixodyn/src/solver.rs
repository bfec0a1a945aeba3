//! Trajectory integration, attractor detection, and a largest-Lyapunov-
//! exponent estimator for the saturated system.
//!
//! The integrator is an explicit Dormand-Prince 5(4) embedded pair with PI
//! step-size control and fifth-order dense output. Integration is fully
//! deterministic: identical inputs produce bit-identical trajectories on one
//! platform, which the sweep engine relies on.

use serde::{Deserialize, Serialize};

use crate::dynamics::{jacobian_saturated, rhs_isocline, rhs_saturated, State3};
use crate::equilibria::{all_equilibria, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::ScaledParams;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integration controls shared by all solver entry points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the step size; defaults to the span being integrated.
    pub h_max: Option<f64>,
    /// Number of leading components clamped to zero when roundoff drives
    /// them slightly negative (the model states; tangent vectors are exempt).
    pub clamp_first: usize,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            h_max: None,
            clamp_first: 3,
            max_steps: 100_000_000,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(1e-13..=1e-3).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [1e-13, 1e-3], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Which form of the saturated field to integrate. Orbits are identical; the
/// isocline form runs on the rescaled clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemForm {
    Saturated,
    Isocline,
}

/// One accepted step with its dense-output polynomial.
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluates the continuous extension at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = if self.h == 0.0 { 0.0 } else { (t - self.t0) / self.h };
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
        out
    }
}

/// Accepted/rejected step counts of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Core adaptive loop; calls `observer` once per accepted step.
fn integrate_adaptive<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &IntegrationOptions,
    mut observer: O,
) -> Result<([f64; N], StepStats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&DenseStep<N>),
{
    opts.validate()?;
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok((y0, StepStats::default()));
    }
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    // Initial step from the standard two-derivative heuristic.
    let sc = |yi: f64| opts.abs_tol + opts.rel_tol * yi.abs();
    let d0 = norm_scaled(&y, &y, sc);
    let d1 = norm_scaled(&k1, &y, sc);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * (d0 / d1)
    };
    h = h.min(h_max);
    {
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h * k1[i];
        }
        let f1 = f(t + h, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - k1[i];
        }
        let d2 = norm_scaled(&diff, &y, sc) / h;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        h = (100.0 * h).min(h1).min(h_max);
    }

    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FACC1: f64 = 5.0; // 1 / min shrink factor
    const FACC2: f64 = 0.1; // 1 / max growth factor
    let mut facold: f64 = 1e-4;
    let mut rejected_last = false;

    let mut k = [[0.0; N]; 7];
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        k[0] = k1;
        stage(&mut f, &mut k, t, &y, h, 1, &A2);
        stage(&mut f, &mut k, t, &y, h, 2, &A3);
        stage(&mut f, &mut k, t, &y, h, 3, &A4);
        stage(&mut f, &mut k, t, &y, h, 4, &A5);
        stage(&mut f, &mut k, t, &y, h, 5, &A6);
        let mut y_new = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for (j, b) in B.iter().enumerate() {
                acc += b * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }
        let k7 = f(t + h, &y_new);
        k[6] = k7;

        // Scaled error norm of the embedded difference.
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, c) in E.iter().enumerate() {
                e += c * k[j][i];
            }
            e *= h;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        let fac11 = err.powf(EXPO1);
        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
        if err <= 1.0 {
            facold = err.max(1e-4);
            // Clamp roundoff-negative model coordinates.
            let mut clamped = false;
            for (i, v) in y_new.iter_mut().enumerate().take(opts.clamp_first) {
                if *v < 0.0 {
                    if *v >= -opts.abs_tol {
                        *v = 0.0;
                        clamped = true;
                    } else {
                        return Err(Error::NegativeStateBeyondTolerance {
                            index: i,
                            value: *v,
                            t: t + h,
                        });
                    }
                }
            }
            let f_new = if clamped { f(t + h, &y_new) } else { k7 };

            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                let mut dsum = 0.0;
                for (j, d) in D.iter().enumerate() {
                    dsum += d * k[j][i];
                }
                cont[4][i] = h * dsum;
            }
            let step = DenseStep {
                t0: t,
                h,
                y0: y,
                y1: y_new,
                cont,
            };
            observer(&step);

            stats.accepted += 1;
            t += h;
            y = y_new;
            k1 = f_new;
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            h = h_new.min(h_max);
            rejected_last = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFE).min(FACC1);
            rejected_last = true;
        }
    }
    Ok((y, stats))
}

fn stage<const N: usize, F>(
    f: &mut F,
    k: &mut [[f64; N]; 7],
    t: f64,
    y: &[f64; N],
    h: f64,
    idx: usize,
    coeffs: &[f64],
) where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut arg = [0.0; N];
    for i in 0..N {
        let mut acc = 0.0;
        for (j, a) in coeffs.iter().enumerate() {
            acc += a * k[j][i];
        }
        arg[i] = y[i] + h * acc;
    }
    k[idx] = f(t + C[idx] * h, &arg);
}

fn norm_scaled<const N: usize>(v: &[f64; N], y: &[f64; N], sc: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let s = sc(y[i]);
        acc += (v[i] / s) * (v[i] / s);
    }
    (acc / N as f64).sqrt()
}

/// A computed trajectory: times and states at every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State3>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn terminal(&self) -> State3 {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

fn field(sp: &ScaledParams, form: SystemForm) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
    move |_t, y| {
        let s = State3::new(y[0], y[1], y[2]);
        match form {
            SystemForm::Saturated => rhs_saturated(s, sp),
            SystemForm::Isocline => rhs_isocline(s, sp),
        }
    }
}

/// Integrates the saturated system from `y0` to `t_end`.
pub fn integrate(
    sp: &ScaledParams,
    y0: State3,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    integrate_system(
        sp,
        SystemForm::Saturated,
        y0,
        t_end,
        &IntegrationOptions::with_tolerances(rel_tol, abs_tol),
    )
}

/// Integrates either form of the field, recording every accepted step.
pub fn integrate_system(
    sp: &ScaledParams,
    form: SystemForm,
    y0: State3,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    sp.require_saturated()?;
    let mut times = vec![0.0];
    let mut states = vec![y0];
    let (_, stats) = integrate_adaptive(
        field(sp, form),
        0.0,
        y0.to_array(),
        t_end,
        opts,
        |step: &DenseStep<3>| {
            times.push(step.t1());
            states.push(State3::from_array(step.y1));
        },
    )?;
    Ok(Trajectory {
        times,
        states,
        stats,
    })
}

/// What the long-run integration settled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttractorKind {
    Equilibrium {
        point: State3,
        kind: EquilibriumKind,
    },
    LimitCycle {
        period: f64,
        section_points: Vec<State3>,
        /// Peak-to-peak extent per coordinate over the sampled window.
        amplitude: [f64; 3],
    },
    Undetermined,
}

/// Which Poincare section produced the recorded returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SectionChoice {
    /// x = x_star crossed with dx/dt > 0.
    XStar,
    /// z = (observed mid-range) crossed with dz/dt > 0.
    ZMid(f64),
    None,
}

/// Attractor detection outcome with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    /// Model time discarded before observations began.
    pub transient_discarded: f64,
    pub terminal_state: State3,
    /// Post-transient (min, max) per coordinate.
    pub ranges: [(f64, f64); 3],
    pub final_rhs_norm: f64,
    pub section: SectionChoice,
    /// Max spread of the last few section returns, when any were seen.
    pub return_spread: Option<f64>,
}

/// Options for [`detect_attractor_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    pub integration: IntegrationOptions,
    pub form: SystemForm,
    /// Fraction of the budget discarded as transient.
    pub transient_fraction: f64,
    /// Terminal rhs max-norm below which the state counts as settled.
    pub settle_tol: f64,
    /// Distance within which a settled state must match a catalog equilibrium.
    pub match_tol: f64,
    /// Agreement required of consecutive section returns.
    pub return_tol: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            integration: IntegrationOptions::default(),
            form: SystemForm::Saturated,
            transient_fraction: 0.5,
            settle_tol: 1e-8,
            match_tol: 1e-6,
            return_tol: 1e-6,
        }
    }
}

struct SectionRecorder {
    axis: usize,
    level: f64,
    crossings: Vec<(f64, [f64; 3])>,
}

impl SectionRecorder {
    fn new(axis: usize, level: f64) -> Self {
        Self {
            axis,
            level,
            crossings: Vec::new(),
        }
    }

    /// Looks for an upward crossing of the section inside one accepted step
    /// and refines it on the dense output.
    fn observe(&mut self, step: &DenseStep<3>) {
        let s0 = step.y0[self.axis] - self.level;
        let s1 = step.y1[self.axis] - self.level;
        if !(s0 < 0.0 && s1 >= 0.0) {
            return;
        }
        let mut lo = step.t0;
        let mut hi = step.t1();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if step.eval(mid)[self.axis] - self.level < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * hi.abs().max(1.0) {
                break;
            }
        }
        let t_c = 0.5 * (lo + hi);
        self.crossings.push((t_c, step.eval(t_c)));
    }
}

/// Integrates from `y0` for `budget` time units, discards the transient, and
/// reports the attractor: a catalog equilibrium if the state settles, a limit
/// cycle if section returns converge, otherwise `Undetermined`.
pub fn detect_attractor(sp: &ScaledParams, y0: State3, budget: f64) -> Result<AttractorReport> {
    detect_attractor_with(sp, y0, budget, &DetectOptions::default())
}

pub fn detect_attractor_with(
    sp: &ScaledParams,
    y0: State3,
    budget: f64,
    opts: &DetectOptions,
) -> Result<AttractorReport> {
    sp.require_saturated()?;
    let transient = budget * opts.transient_fraction;
    let f = field(sp, opts.form);

    // Transient pass: no observation.
    let (after_transient, _) = integrate_adaptive(
        &f,
        0.0,
        y0.to_array(),
        transient,
        &opts.integration,
        |_: &DenseStep<3>| {},
    )?;

    // First observation window: coordinate ranges plus the primary section.
    let mid = transient + 0.5 * (budget - transient);
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    let track = |y: &[f64; 3], ranges: &mut [(f64, f64); 3]| {
        for i in 0..3 {
            ranges[i].0 = ranges[i].0.min(y[i]);
            ranges[i].1 = ranges[i].1.max(y[i]);
        }
    };
    track(&after_transient, &mut ranges);
    let mut primary = SectionRecorder::new(0, sp.x_star);
    let (at_mid, _) = integrate_adaptive(
        &f,
        transient,
        after_transient,
        mid,
        &opts.integration,
        |step: &DenseStep<3>| {
            track(&step.y1, &mut ranges);
            primary.observe(step);
        },
    )?;

    // Second window: keep the primary section and add the fallback section
    // at the observed z mid-range.
    let z_mid = 0.5 * (ranges[2].0 + ranges[2].1);
    let mut fallback = SectionRecorder::new(2, z_mid);
    let (terminal, _) = integrate_adaptive(
        &f,
        mid,
        at_mid,
        budget,
        &opts.integration,
        |step: &DenseStep<3>| {
            track(&step.y1, &mut ranges);
            primary.observe(step);
            fallback.observe(step);
        },
    )?;

    let terminal_state = State3::from_array(terminal);
    let rhs = match opts.form {
        SystemForm::Saturated => rhs_saturated(terminal_state, sp),
        SystemForm::Isocline => rhs_isocline(terminal_state, sp),
    };
    let final_rhs_norm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // Settled state: match against the equilibrium catalog.
    if final_rhs_norm <= opts.settle_tol {
        if let Some(record) = all_equilibria(sp)?
            .into_iter()
            .filter(|e| e.point.max_abs_diff(&terminal_state) <= opts.match_tol)
            .min_by(|a, b| {
                a.point
                    .max_abs_diff(&terminal_state)
                    .partial_cmp(&b.point.max_abs_diff(&terminal_state))
                    .unwrap()
            })
        {
            return Ok(AttractorReport {
                kind: AttractorKind::Equilibrium {
                    point: record.point,
                    kind: record.kind,
                },
                transient_discarded: transient,
                terminal_state,
                ranges,
                final_rhs_norm,
                section: SectionChoice::None,
                return_spread: None,
            });
        }
    }

    // Cycle detection: primary section first, fallback otherwise.
    let (crossings, section) = if primary.crossings.len() >= 6 {
        (&primary.crossings, SectionChoice::XStar)
    } else {
        (&fallback.crossings, SectionChoice::ZMid(z_mid))
    };
    let mut return_spread = None;
    if crossings.len() >= 6 {
        let last = &crossings[crossings.len() - 6..];
        let reference = last[5].1;
        let spread = last[..5]
            .iter()
            .map(|(_, p)| {
                (0..3)
                    .map(|i| (p[i] - reference[i]).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        return_spread = Some(spread);
        if spread <= opts.return_tol {
            let period = (last[5].0 - last[0].0) / 5.0;
            let section_points = last[1..]
                .iter()
                .map(|(_, p)| State3::from_array(*p))
                .collect();
            let amplitude = [
                ranges[0].1 - ranges[0].0,
                ranges[1].1 - ranges[1].0,
                ranges[2].1 - ranges[2].0,
            ];
            return Ok(AttractorReport {
                kind: AttractorKind::LimitCycle {
                    period,
                    section_points,
                    amplitude,
                },
                transient_discarded: transient,
                terminal_state,
                ranges,
                final_rhs_norm,
                section,
                return_spread,
            });
        }
    }

    Ok(AttractorReport {
        kind: AttractorKind::Undetermined,
        transient_discarded: transient,
        terminal_state,
        ranges,
        final_rhs_norm,
        section: if crossings.is_empty() {
            SectionChoice::None
        } else {
            section
        },
        return_spread,
    })
}

/// Largest-Lyapunov-exponent estimate with its protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub exponent: f64,
    pub renorm_interval: f64,
    pub transient_discarded: f64,
    pub horizon: f64,
}

/// Estimates the largest Lyapunov exponent by integrating the variational
/// system along the trajectory and renormalizing the tangent vector at fixed
/// intervals, averaging the accumulated log stretch.
pub fn largest_lyapunov_exponent(
    sp: &ScaledParams,
    y0: State3,
    horizon: f64,
) -> Result<LyapunovReport> {
    largest_lyapunov_exponent_with(sp, y0, horizon, 1.0, 0.2, &IntegrationOptions::default())
}

pub fn largest_lyapunov_exponent_with(
    sp: &ScaledParams,
    y0: State3,
    horizon: f64,
    renorm_interval: f64,
    transient_fraction: f64,
    opts: &IntegrationOptions,
) -> Result<LyapunovReport> {
    sp.require_saturated()?;
    let transient = horizon * transient_fraction;
    let sqrt3 = (3.0f64).sqrt();
    let mut state = [
        y0.x,
        y0.y,
        y0.z,
        1.0 / sqrt3,
        1.0 / sqrt3,
        1.0 / sqrt3,
    ];
    let f = |_t: f64, y: &[f64; 6]| {
        let s = State3::new(y[0], y[1], y[2]);
        let base = rhs_saturated(s, sp);
        let j = jacobian_saturated(s, sp).0;
        let mut out = [0.0; 6];
        out[..3].copy_from_slice(&base);
        for i in 0..3 {
            out[3 + i] = j[i][0] * y[3] + j[i][1] * y[4] + j[i][2] * y[5];
        }
        out
    };

    let mut t = 0.0;
    let mut log_sum = 0.0;
    let mut averaged_time = 0.0;
    while t < horizon {
        let t_next = (t + renorm_interval).min(horizon);
        let (next, _) = integrate_adaptive(f, t, state, t_next, opts, |_: &DenseStep<6>| {})?;
        state = next;
        let norm = (state[3] * state[3] + state[4] * state[4] + state[5] * state[5]).sqrt();
        if norm == 0.0 {
            return Err(Error::IllConditioned {
                residual: 0.0,
                bound: f64::MIN_POSITIVE,
            });
        }
        if t_next > transient {
            // Count only the stretch accumulated past the transient.
            let span = t_next - t.max(transient);
            log_sum += norm.ln() * (span / (t_next - t));
            averaged_time += span;
        }
        for v in state[3..].iter_mut() {
            *v /= norm;
        }
        t = t_next;
    }
    Ok(LyapunovReport {
        exponent: log_sum / averaged_time,
        renorm_interval,
        transient_discarded: transient,
        horizon,
    })
}
