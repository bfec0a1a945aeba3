//! The CSV and JSON output formats shared by the CLI and the test suites.
//!
//! CSV conventions: '\n' newlines, '.' decimal point, reals with 17
//! significant digits, booleans as 0/1, absent optionals as empty fields.

use std::io::{self, Write};

use serde::Serialize;

use crate::bifurcation::{CurveTable, PpRegime, Provenance, RegionCell};
use crate::equilibria::EquilibriumRecord;
use crate::solver::Trajectory;
use crate::stability::EquilibriumClassification;

/// Formats a real with 17 significant digits.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn fmt_opt_bool(b: Option<bool>) -> &'static str {
    match b {
        Some(v) => fmt_bool(v),
        None => "",
    }
}

/// Writes a trajectory as `tau,x,y,z`, one row per accepted step.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    w.write_all(b"tau,x,y,z\n")?;
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_g17(*t),
            fmt_g17(s.x),
            fmt_g17(s.y),
            fmt_g17(s.z)
        )?;
    }
    Ok(())
}

pub const SWEEP_CSV_HEADER: &str = "x_star,a2,region,provenance,pp_regime,n_comp_eq,comp_plus_planar_stable,coexist_exists,coexist_stable,mixo_cc_stable";

/// Writes sweep cells in the fixed raster schema.
pub fn write_sweep_csv<W: Write>(mut w: W, cells: &[RegionCell]) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for cell in cells {
        let provenance = match cell.provenance {
            Provenance::Analytic => "Analytic",
            Provenance::SimulationAssisted => "SimulationAssisted",
        };
        let (pp, n_comp, planar, coex, coex_stable, mixo) = match &cell.signature {
            Some(sig) => (
                match sig.pp_regime {
                    PpRegime::Cycle => "Cycle",
                    PpRegime::StableEq => "StableEq",
                },
                sig.n_comp_eq.to_string(),
                fmt_opt_bool(sig.comp_plus_planar_stable).to_string(),
                fmt_bool(sig.coexist_exists).to_string(),
                fmt_opt_bool(sig.coexist_stable).to_string(),
                fmt_bool(sig.mixo_cc_stable).to_string(),
            ),
            None => (
                "",
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_g17(cell.x_star),
            fmt_g17(cell.a2),
            cell.label.as_char(),
            provenance,
            pp,
            n_comp,
            planar,
            coex,
            coex_stable,
            mixo
        )?;
    }
    Ok(())
}

pub const CURVES_CSV_HEADER: &str =
    "x_star,breve_a2,tilde_a2,check_a2,hat_a2,a2_star,hopf_comp_a2,x_h";

/// Writes the boundary-curve table; plane-wide constants repeat on each row.
pub fn write_curves_csv<W: Write>(mut w: W, table: &CurveTable) -> io::Result<()> {
    writeln!(w, "{CURVES_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_g17(row.x_star),
            fmt_g17(row.breve_a2),
            fmt_g17(row.tilde_a2),
            fmt_g17(table.check_a2),
            fmt_g17(table.hat_a2),
            opt(table.a2_star),
            opt(table.hopf_comp_a2),
            opt(table.x_h)
        )?;
    }
    Ok(())
}

/// An equilibrium with its classification, the shape `equilibria` emits.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct EquilibriumOutput {
    #[serde(flatten)]
    pub record: EquilibriumRecord,
    pub stability: EquilibriumClassification,
}

/// Serializes any record list as a JSON array.
pub fn write_json<W: Write, T: Serialize>(mut w: W, records: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, records)?;
    w.write_all(b"\n")
}
