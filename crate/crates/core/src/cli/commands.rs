use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Frame, RunConfig, OUTPUT_ROOT_ENV};
use super::output::{self, json_number, json_numbers, FinalState};
use crate::diagnostics::DiagRow;
use crate::error::Error;
use crate::euler::{integrate_euler, EulerTrajectory};
use crate::lagrangian::{integrate_geodesic, DiffeoMap, LagrangianTrajectory};
use crate::solver::{RunStatus, StopRules};
use crate::spectral::l2_norm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STOPPED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl CommandError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::NotBandLimited(_)
            | Error::ZeroModeNotInvertible(_)
            | Error::InvalidSymbol(_)
            | Error::IndefiniteInertia(_)
            | Error::SingularSymbol(_)
            | Error::NonSymmetricSymbol => Self::config(e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CommandError + '_ {
    move |e| CommandError::internal(format!("{}: {e}", path.display()))
}

/// What one simulation produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub stop_time: Option<f64>,
    /// Rows of the Eulerian run when there is one, else of the Lagrangian run.
    pub rows: Vec<DiagRow>,
    /// Largest relative `L²` gap between `u` and `v∘φ^{-1}` over common records.
    pub frame_gap: Option<(f64, usize)>,
    pub files: Vec<PathBuf>,
}

fn euler_final(cfg: &RunConfig, tr: &EulerTrajectory) -> FinalState {
    let last = tr.final_state();
    FinalState {
        label: cfg.label.clone(),
        frame: "eulerian",
        symbol: cfg.solver.symbol.to_string(),
        n: cfg.grid.len(),
        status: tr.status.as_str(),
        t: json_number(last.t),
        stop_time: tr.stop_time().map(json_number),
        x: json_numbers(&cfg.grid.nodes()),
        u: json_numbers(last.u.values()),
        phi_displacement: None,
        v: None,
    }
}

fn lagrangian_final(cfg: &RunConfig, tr: &LagrangianTrajectory) -> Result<FinalState, CommandError> {
    let last = tr.final_state();
    let u = last.eulerian_velocity()?;
    Ok(FinalState {
        label: cfg.label.clone(),
        frame: "lagrangian",
        symbol: cfg.solver.symbol.to_string(),
        n: cfg.grid.len(),
        status: tr.status.as_str(),
        t: json_number(last.t),
        stop_time: tr.stop_time().map(json_number),
        x: json_numbers(&cfg.grid.nodes()),
        u: json_numbers(u.values()),
        phi_displacement: Some(json_numbers(last.phi.displacement().values())),
        v: Some(json_numbers(last.v.values())),
    })
}

fn frame_gap(e: &EulerTrajectory, l: &LagrangianTrajectory) -> Result<(f64, usize), CommandError> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (se, sl) in e.states.iter().zip(&l.states) {
        if (se.t - sl.t).abs() > 1e-12 * se.t.abs().max(1.0) {
            break;
        }
        let ul = sl.eulerian_velocity()?;
        let gap = l2_norm(&se.u.sub(&ul)?);
        let scale = l2_norm(&se.u);
        worst = worst.max(if scale > 0.0 { gap / scale } else { gap });
        count += 1;
    }
    Ok((worst, count))
}

/// Runs the configured frames and writes their files into `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome, CommandError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut files = Vec::new();
    let resolved = dir.join("config.resolved.toml");
    fs::write(&resolved, cfg.echo()).map_err(io_error(&resolved))?;
    files.push(resolved);

    let u0 = cfg.initial_velocity();
    let (csv_e, csv_l, json_e, json_l) = match cfg.frame {
        Frame::Both => (
            "eulerian.csv",
            "lagrangian.csv",
            "eulerian_final_state.json",
            "lagrangian_final_state.json",
        ),
        _ => (
            "diagnostics.csv",
            "diagnostics.csv",
            "final_state.json",
            "final_state.json",
        ),
    };

    let euler = match cfg.frame {
        Frame::Eulerian | Frame::Both => Some(integrate_euler(&u0, &cfg.solver)?),
        Frame::Lagrangian => None,
    };
    let lagrange = match cfg.frame {
        Frame::Lagrangian | Frame::Both => Some(integrate_geodesic(
            &DiffeoMap::identity(&cfg.grid),
            &u0,
            &cfg.solver,
        )?),
        Frame::Eulerian => None,
    };

    if let Some(tr) = &euler {
        let path = dir.join(csv_e);
        output::write_csv(&path, &tr.rows).map_err(io_error(&path))?;
        files.push(path);
        let path = dir.join(json_e);
        output::write_json(&path, &euler_final(cfg, tr)).map_err(io_error(&path))?;
        files.push(path);
    }
    if let Some(tr) = &lagrange {
        let path = dir.join(csv_l);
        output::write_csv(&path, &tr.rows).map_err(io_error(&path))?;
        files.push(path);
        let path = dir.join(json_l);
        output::write_json(&path, &lagrangian_final(cfg, tr)?).map_err(io_error(&path))?;
        files.push(path);
    }

    let frame_gap = match (&euler, &lagrange) {
        (Some(e), Some(l)) => Some(frame_gap(e, l)?),
        _ => None,
    };
    let (status, stop_time) = [
        euler.as_ref().map(|t| (t.status, t.stop_time())),
        lagrange.as_ref().map(|t| (t.status, t.stop_time())),
    ]
    .into_iter()
    .flatten()
    .find(|(s, _)| !s.is_completed())
    .unwrap_or((RunStatus::Completed, None));
    let rows = match (euler, lagrange) {
        (Some(e), _) => e.rows,
        (None, Some(l)) => l.rows,
        (None, None) => unreachable!("every frame runs at least one integrator"),
    };
    Ok(RunOutcome {
        status,
        stop_time,
        rows,
        frame_gap,
        files,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<i32, CommandError> {
    print!("{}", cfg.echo());
    println!();
    let dir = cfg.output_dir();
    let outcome = execute(cfg, &dir)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if let Some((gap, count)) = outcome.frame_gap {
        println!(
            "frame consistency: max relative L2 gap {} over {count} common records",
            output::format_number(gap)
        );
    }
    match outcome.stop_time {
        Some(t) => println!("status: {} at t = {}", outcome.status, output::format_number(t)),
        None => println!("status: {}", outcome.status),
    }
    Ok(if outcome.status.is_completed() {
        EXIT_OK
    } else {
        EXIT_STOPPED
    })
}

/// Parses `s=<v1>,<v2>,...`.
pub fn parse_param(spec: &str) -> Result<Vec<f64>, CommandError> {
    let list = spec
        .strip_prefix("s=")
        .ok_or_else(|| CommandError::config(format!("--param: expected s=<list>, got \"{spec}\"")))?;
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CommandError::config(format!("--param: invalid value \"{v}\"")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.is_empty() {
        return Err(CommandError::config("--param: the list of s values is empty"));
    }
    Ok(values)
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub s: f64,
    pub status: String,
    pub stop_time: Option<f64>,
    pub max_abs_min_ux: Option<f64>,
    pub energy_drift: Option<f64>,
}

pub const SWEEP_HEADER: &str = "s,status,stop_time,max_abs_min_ux,energy_drift";

impl SweepRow {
    fn csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(output::format_number).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            output::format_number(self.s),
            self.status,
            cell(self.stop_time),
            cell(self.max_abs_min_ux),
            cell(self.energy_drift)
        )
    }
}

fn sweep_child(base: &RunConfig, s: f64, dir: &Path) -> SweepRow {
    let failed = |message: String| SweepRow {
        s,
        status: format!("error: {}", message.replace([',', '\n'], ";")),
        stop_time: None,
        max_abs_min_ux: None,
        energy_drift: None,
    };
    let cfg = match base.with_bessel(s) {
        Ok(c) => c,
        Err(e) => return failed(e.to_string()),
    };
    match execute(&cfg, dir) {
        Ok(out) => {
            let e0 = out.rows[0].energy_a;
            let drift = out
                .rows
                .iter()
                .map(|r| {
                    let d = (r.energy_a - e0).abs();
                    if e0 > 0.0 {
                        d / e0
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max);
            SweepRow {
                s,
                status: out.status.as_str().to_string(),
                stop_time: out.stop_time,
                max_abs_min_ux: Some(out.rows.iter().map(|r| r.min_ux.abs()).fold(0.0, f64::max)),
                energy_drift: Some(drift),
            }
        }
        Err(e) => failed(e.message),
    }
}

pub fn sweep(cfg: &RunConfig, values: &[f64]) -> Result<i32, CommandError> {
    if values.is_empty() {
        return Err(CommandError::config("--param: the list of s values is empty"));
    }
    let root = cfg.output_dir();
    fs::create_dir_all(&root).map_err(io_error(&root))?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&s| sweep_child(cfg, s, &root.join(format!("s_{s}"))))
        .collect();
    let mut text = String::new();
    let _ = writeln!(text, "{SWEEP_HEADER}");
    for r in &rows {
        let _ = writeln!(text, "{}", r.csv());
    }
    let path = root.join("summary.csv");
    fs::write(&path, &text).map_err(io_error(&path))?;
    print!("{text}");
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

pub fn info() -> String {
    let stop = StopRules::default();
    let mut out = String::new();
    let _ = writeln!(out, "circflow {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "\nsymbols (inertia operators):");
    for (name, desc) in [
        ("bessel", "(1 + k^2)^s, s >= 1/2, order 2s, invertible on all modes"),
        ("helmholtz_power", "(1 + k^2)^power, integer power >= 1, order 2*power"),
        ("clm", "|k|, order 1, invertible on mean-zero fields"),
        ("identity", "1, order 0"),
        ("custom", "table a(|k|) for k = 0..N/2-1 with declared order"),
        ("derivative", "ik (probe only, not symmetric)"),
        ("hilbert", "-i sign(k) (probe only, not symmetric)"),
    ] {
        let _ = writeln!(out, "  {name:<16}{desc}");
    }
    let _ = writeln!(out, "\ndefaults:");
    let _ = writeln!(out, "  scheme           rk4");
    let _ = writeln!(out, "  dealias          two_thirds");
    let _ = writeln!(out, "  record_every     1");
    let _ = writeln!(out, "  q_work           order + 1");
    let _ = writeln!(out, "  frame            eulerian");
    let _ = writeln!(out, "  min_slope_floor  {:?}", stop.min_slope_floor);
    let _ = writeln!(out, "  norm_ceiling     {:?}", stop.norm_ceiling);
    let _ = writeln!(out, "  jacobian_floor   {:?}", stop.jacobian_floor);
    let _ = writeln!(out, "\noutput root override: {OUTPUT_ROOT_ENV}");
    let _ = writeln!(out, "exit codes: 0 completed, 1 internal error, 2 config error, 3 stopped, 4 verify failure");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_lists() {
        assert_eq!(parse_param("s=1,1.5, 2").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_param("s=").unwrap_err().code, EXIT_CONFIG);
        assert_eq!(parse_param("t=1").unwrap_err().code, EXIT_CONFIG);
        assert_eq!(parse_param("s=1,x").unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(CommandError::from(Error::NotBandLimited(90)).code, EXIT_CONFIG);
        assert_eq!(CommandError::from(Error::NumericalOverflow).code, EXIT_INTERNAL);
    }
}
