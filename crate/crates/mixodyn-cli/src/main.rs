//! `mixodyn`: validate, scale, and analyze the chemostat model from the
//! command line.
//!
//! Parameters come from a JSON config file (top-level key `"chemostat"` for
//! dimensional parameters or `"scaled"` for dimensionless ones) and/or
//! repeated `--set key=value` overrides. Scaled keys are lowercase
//! (`c, k, x_star, a1, a2, b1, b2, gamma1, kappa1, gamma2, kappa2`),
//! dimensional keys uppercase (`C, D, A1..A4, B1..B4`).
//!
//! Exit codes: 0 success, 1 validation/analysis failure, 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixodyn::bifurcation::{
    boundary_curves, classify_region, sweep, AxisSpec, ClassifyOptions, GridSpec,
};
use mixodyn::emit;
use mixodyn::equilibria::all_equilibria;
use mixodyn::model::{nondimensionalize, validate_trade_offs, ChemostatParams, ScaledParams};
use mixodyn::solver::{
    detect_attractor_with, integrate, largest_lyapunov_exponent_with, DetectOptions,
    IntegrationOptions,
};
use mixodyn::stability::{classify_equilibrium, competition_plane_regime, predator_prey_regime};
use mixodyn::State3;

const SCALED_KEYS: &[&str] = &[
    "c", "k", "x_star", "a1", "a2", "b1", "b2", "gamma1", "kappa1", "gamma2", "kappa2",
];
const CHEMOSTAT_KEYS: &[&str] = &[
    "C", "D", "A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4", "M1", "M2", "M3", "M4",
];

#[derive(Parser)]
#[command(
    name = "mixodyn",
    about = "Equilibria, stability, trajectories, and region maps of the autotroph-herbivore-mixotroph chemostat",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// JSON parameter file with top-level key "chemostat" or "scaled".
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override or supply one parameter, e.g. --set c=.2 or --set A1=3.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the competition and grazing trade-off conditions.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Nondimensionalize dimensional parameters.
    Scale {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// List every equilibrium with its stability classification.
    Equilibria {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Classify the (x_star, a2) point of the region taxonomy.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Model-time budget for a disambiguating simulation.
        #[arg(long, default_value_t = 8000.0)]
        budget: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_rel: f64,
        #[arg(long, default_value_t = 1e-11)]
        tol_abs: f64,
    },
    /// Integrate a trajectory and emit it as tau,x,y,z.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial state as x,y,z.
        #[arg(long, default_value = "0.5,0.25,0.2")]
        y0: String,
        #[arg(long, default_value_t = 500.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_rel: f64,
        #[arg(long, default_value_t = 1e-11)]
        tol_abs: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Detect the attractor reached from an initial state.
    Attractor {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0.5,0.25,0.2")]
        y0: String,
        /// Model-time budget (transient plus observation).
        #[arg(long, default_value_t = 4000.0)]
        budget: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_rel: f64,
        #[arg(long, default_value_t = 1e-11)]
        tol_abs: f64,
    },
    /// Estimate the largest Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0.5,0.25,0.2")]
        y0: String,
        /// Model-time horizon of the estimate.
        #[arg(long, default_value_t = 20000.0)]
        budget: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_rel: f64,
        #[arg(long, default_value_t = 1e-11)]
        tol_abs: f64,
    },
    /// Raster-classify a grid of the (x_star, a2) plane.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// x_star axis as lo:hi:n.
        #[arg(long, default_value = "0.01:0.4:50")]
        x_star_grid: String,
        /// a2 axis as lo:hi:n.
        #[arg(long, default_value = "0.1:6.0:50")]
        a2_grid: String,
        /// Per-cell model-time simulation budget; 0 disables simulation.
        #[arg(long, default_value_t = 8000.0)]
        budget: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Emit the coexistence-window boundary curves over x_star.
    Curves {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0.01:0.99:99")]
        x_star_grid: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Errors that should exit 2 (bad invocation) rather than 1 (model says no).
struct UsageError(String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

enum ParamSource {
    Chemostat(ChemostatParams),
    Scaled(ScaledParams),
}

fn parse_overrides(sets: &[String]) -> Result<BTreeMap<String, f64>, UsageError> {
    let mut map = BTreeMap::new();
    for entry in sets {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{entry}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| usage(format!("--set {key}: '{value}' is not a number")))?;
        if !SCALED_KEYS.contains(&key) && !CHEMOSTAT_KEYS.contains(&key) {
            return Err(usage(format!(
                "unknown parameter '{key}' (scaled keys: {}; dimensional keys: {})",
                SCALED_KEYS.join(","),
                CHEMOSTAT_KEYS.join(",")
            )));
        }
        map.insert(key.to_string(), value);
    }
    Ok(map)
}

fn load_params(args: &ParamArgs) -> Result<ParamSource, UsageError> {
    let overrides = parse_overrides(&args.set)?;
    let has_scaled_keys = overrides.keys().any(|k| SCALED_KEYS.contains(&k.as_str()));
    let has_dim_keys = overrides.keys().any(|k| CHEMOSTAT_KEYS.contains(&k.as_str()));
    if has_scaled_keys && has_dim_keys {
        return Err(usage("--set mixes scaled and dimensional keys"));
    }

    let config: Option<serde_json::Value> = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| usage(format!("{} is not valid JSON: {e}", path.display())))?,
            )
        }
        None => None,
    };

    if let Some(cfg) = config {
        let obj = cfg
            .as_object()
            .ok_or_else(|| usage("config root must be a JSON object"))?;
        if let Some(ch) = obj.get("chemostat") {
            if has_scaled_keys {
                return Err(usage("config provides dimensional parameters but --set uses scaled keys"));
            }
            let mut fields = ch
                .as_object()
                .ok_or_else(|| usage("\"chemostat\" must be an object"))?
                .clone();
            for (k, v) in &overrides {
                fields.insert(k.clone(), serde_json::json!(v));
            }
            let p: ChemostatParams = serde_json::from_value(serde_json::Value::Object(fields))
                .map_err(|e| usage(format!("bad chemostat parameters: {e}")))?;
            return Ok(ParamSource::Chemostat(p));
        }
        if let Some(sc) = obj.get("scaled") {
            if has_dim_keys {
                return Err(usage("config provides scaled parameters but --set uses dimensional keys"));
            }
            let mut fields = sc
                .as_object()
                .ok_or_else(|| usage("\"scaled\" must be an object"))?
                .clone();
            for (k, v) in &overrides {
                fields.insert(k.clone(), serde_json::json!(v));
            }
            let sp: ScaledParams = serde_json::from_value(serde_json::Value::Object(fields))
                .map_err(|e| usage(format!("bad scaled parameters: {e}")))?;
            return Ok(ParamSource::Scaled(sp.normalized()));
        }
        return Err(usage("config needs a top-level \"chemostat\" or \"scaled\" key"));
    }

    // No config: assemble entirely from --set.
    if has_dim_keys {
        let need = ["C", "D", "A1", "A2", "A3", "A4"];
        for k in need {
            if !overrides.contains_key(k) {
                return Err(usage(format!("missing --set {k}=... for dimensional parameters")));
            }
        }
        let get = |k: &str, d: f64| overrides.get(k).copied().unwrap_or(d);
        let p = ChemostatParams {
            c: get("C", 0.0),
            d: get("D", 0.0),
            a1: get("A1", 0.0),
            a2: get("A2", 0.0),
            a3: get("A3", 0.0),
            a4: get("A4", 0.0),
            b1: get("B1", 0.0),
            b2: get("B2", 0.0),
            b3: get("B3", 0.0),
            b4: get("B4", 0.0),
            m1: get("M1", 1.0),
            m2: get("M2", 1.0),
            m3: get("M3", 1.0),
            m4: get("M4", 1.0),
        };
        return Ok(ParamSource::Chemostat(p));
    }
    if has_scaled_keys {
        let need = ["c", "k", "x_star", "a1", "a2"];
        for k in need {
            if !overrides.contains_key(k) {
                return Err(usage(format!("missing --set {k}=... for scaled parameters")));
            }
        }
        let get = |k: &str| overrides.get(k).copied().unwrap_or(0.0);
        let mut sp = ScaledParams {
            c: get("c"),
            k: get("k"),
            x_star: get("x_star"),
            a1: get("a1"),
            a2: get("a2"),
            b1: get("b1"),
            b2: get("b2"),
            gamma1: get("gamma1"),
            kappa1: get("kappa1"),
            gamma2: get("gamma2"),
            kappa2: get("kappa2"),
            m: 0.0,
        };
        sp = sp.normalized();
        return Ok(ParamSource::Scaled(sp));
    }
    Err(usage("no parameters: pass --config or --set key=value"))
}

fn require_scaled(src: ParamSource) -> anyhow::Result<ScaledParams> {
    match src {
        ParamSource::Scaled(sp) => {
            sp.validate()?;
            Ok(sp)
        }
        ParamSource::Chemostat(p) => Ok(nondimensionalize(&p)?),
    }
}

fn parse_state(text: &str) -> Result<State3, UsageError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--y0 expects x,y,z, got '{text}'")));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| usage(format!("--y0 component '{part}' is not a number")))?;
    }
    Ok(State3::new(v[0], v[1], v[2]))
}

fn parse_axis(text: &str) -> Result<AxisSpec, UsageError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("grid axis expects lo:hi:n, got '{text}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("axis lo '{}' is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("axis hi '{}' is not a number", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("axis n '{}' is not an integer", parts[2])))?;
    AxisSpec::new(lo, hi, n).map_err(|e| usage(e.to_string()))
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn sweep_threads() -> Option<usize> {
    std::env::var("MIXODYN_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n| *n > 0)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Validate { params } => {
            let src = load_params(&params).map_err(UsageFail)?;
            let p = match src {
                ParamSource::Chemostat(p) => p,
                ParamSource::Scaled(_) => {
                    return Err(UsageFail(usage(
                        "validate needs dimensional parameters (key \"chemostat\" or uppercase --set keys)",
                    ))
                    .into())
                }
            };
            let report = validate_trade_offs(&p)?;
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &report)?;
            write_output(&params.out, &buf)?;
            if report.analysis_ready() {
                Ok(0)
            } else {
                for msg in &report.messages {
                    if msg.contains("fails") {
                        eprintln!("{msg}");
                    }
                }
                Ok(1)
            }
        }
        Command::Scale { params } => {
            let src = load_params(&params).map_err(UsageFail)?;
            let p = match src {
                ParamSource::Chemostat(p) => p,
                ParamSource::Scaled(_) => {
                    return Err(UsageFail(usage("scale needs dimensional parameters")).into())
                }
            };
            let sp = nondimensionalize(&p)?;
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &sp)?;
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Equilibria { params } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let records: Vec<emit::EquilibriumOutput> = all_equilibria(&sp)?
                .into_iter()
                .map(|record| -> anyhow::Result<emit::EquilibriumOutput> {
                    Ok(emit::EquilibriumOutput {
                        stability: classify_equilibrium(&record, &sp)?,
                        record,
                    })
                })
                .collect::<anyhow::Result<_>>()?;
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &records)?;
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Classify {
            params,
            budget,
            tol_rel,
            tol_abs,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let opts = ClassifyOptions {
                sim_budget: budget,
                detect: DetectOptions {
                    integration: IntegrationOptions::with_tolerances(tol_rel, tol_abs),
                    ..DetectOptions::default()
                },
                ..ClassifyOptions::default()
            };
            let cell = classify_region(sp.x_star, sp.a2, &sp, &opts)?;
            let regimes = serde_json::json!({
                "cell": cell,
                "predator_prey_plane": predator_prey_regime(&sp),
                "competition_plane": competition_plane_regime(&sp),
            });
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &regimes)?;
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Simulate {
            params,
            y0,
            t_end,
            tol_rel,
            tol_abs,
            format,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let y0 = parse_state(&y0).map_err(UsageFail)?;
            let traj = integrate(&sp, y0, t_end, tol_rel, tol_abs)?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => emit::write_trajectory_csv(&mut buf, &traj)?,
                Format::Json => emit::write_json(&mut buf, &traj)?,
            }
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Attractor {
            params,
            y0,
            budget,
            tol_rel,
            tol_abs,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let y0 = parse_state(&y0).map_err(UsageFail)?;
            let opts = DetectOptions {
                integration: IntegrationOptions::with_tolerances(tol_rel, tol_abs),
                ..DetectOptions::default()
            };
            let report = detect_attractor_with(&sp, y0, budget, &opts)?;
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &report)?;
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Lyapunov {
            params,
            y0,
            budget,
            tol_rel,
            tol_abs,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let y0 = parse_state(&y0).map_err(UsageFail)?;
            let report = largest_lyapunov_exponent_with(
                &sp,
                y0,
                budget,
                1.0,
                0.2,
                &IntegrationOptions::with_tolerances(tol_rel, tol_abs),
            )?;
            let mut buf = Vec::new();
            emit::write_json(&mut buf, &report)?;
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Sweep {
            params,
            x_star_grid,
            a2_grid,
            budget,
            format,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let grid = GridSpec {
                x_star: parse_axis(&x_star_grid).map_err(UsageFail)?,
                a2: parse_axis(&a2_grid).map_err(UsageFail)?,
            };
            let opts = ClassifyOptions {
                sim_budget: budget,
                ..ClassifyOptions::default()
            };
            let cells = sweep(&grid, &sp, &opts, sweep_threads())?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => emit::write_sweep_csv(&mut buf, &cells)?,
                Format::Json => emit::write_json(&mut buf, &cells)?,
            }
            write_output(&params.out, &buf)?;
            Ok(0)
        }
        Command::Curves {
            params,
            x_star_grid,
            format,
        } => {
            let sp = require_scaled(load_params(&params).map_err(UsageFail)?)?;
            let axis = parse_axis(&x_star_grid).map_err(UsageFail)?;
            let table = boundary_curves(&sp, &axis)?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => emit::write_curves_csv(&mut buf, &table)?,
                Format::Json => emit::write_json(&mut buf, &table)?,
            }
            write_output(&params.out, &buf)?;
            Ok(0)
        }
    }
}

/// Wrapper that lets usage errors flow through anyhow with their own exit code.
#[derive(Debug)]
struct UsageFail(UsageError);

impl std::fmt::Display for UsageFail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0 .0)
    }
}

impl std::error::Error for UsageFail {}

impl std::fmt::Debug for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageFail>() {
                eprintln!("error: {u}");
                eprintln!("usage: mixodyn <command> [--config <path>] [--set key=value ...] [options]; see mixodyn --help");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }
    }
}
