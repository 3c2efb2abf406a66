//! Run configuration files.
//!
//! ```toml
//! [grid]
//! n = 256
//!
//! [symbol]
//! kind = "bessel"        # bessel | helmholtz_power | clm | identity | custom
//! s = 2.0                # bessel only
//! # power = 1            # helmholtz_power only
//! # table = [1.0, 2.0]   # custom only: a(|k|) for k = 0, 1, ...
//! # order = 1.0          # custom only
//! # invertible_on = "all_modes"
//!
//! [solver]
//! dt = 1e-3
//! t_end = 1.0
//! scheme = "rk4"
//! dealias = "two_thirds"
//! record_every = 1
//! # q_work = 5.0         # defaults to order + 1
//!
//! [stop]
//! min_slope_floor = -50.0
//! norm_ceiling = 1e6
//! jacobian_floor = 1e-2
//!
//! [initial]
//! modes = [[1, 1.0, 0.0]] # n, cos amplitude, sin amplitude
//!
//! [run]
//! frame = "eulerian"     # eulerian | lagrangian | both
//! output = "runs/example"
//! label = "example"
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::solver::{Dealias, Scheme, SolverConfig, StopRules};
use crate::spectral::{analyze, Grid, PeriodicField};
use crate::symbol::{InvertibleOn, SymbolSpec};

pub const OUTPUT_ROOT_ENV: &str = "CIRCFLOW_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Eulerian,
    Lagrangian,
    Both,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Eulerian => "eulerian",
            Frame::Lagrangian => "lagrangian",
            Frame::Both => "both",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    symbol: RawSymbol,
    solver: RawSolver,
    #[serde(default)]
    stop: StopRules,
    initial: RawInitial,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSymbol {
    kind: String,
    s: Option<f64>,
    power: Option<u32>,
    table: Option<Vec<f64>>,
    order: Option<f64>,
    invertible_on: Option<InvertibleOn>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    dt: f64,
    t_end: f64,
    #[serde(default)]
    scheme: Scheme,
    #[serde(default)]
    dealias: Dealias,
    record_every: Option<usize>,
    q_work: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    modes: Vec<(u32, f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    frame: Frame,
    output: Option<String>,
    label: Option<String>,
}

/// A validated run configuration with every default resolved.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub solver: SolverConfig,
    pub modes: Vec<(u32, f64, f64)>,
    pub frame: Frame,
    /// Output directory as written in the file.
    pub output: PathBuf,
    pub label: String,
    q_work_explicit: bool,
}

/// A configuration error naming the offending field.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        ConfigError::new("config", e.message().to_string() + &span_hint(text, e.span()))
    })?;
    resolve(raw)
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].lines().count().max(1);
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

pub(crate) fn symbol_from_raw(raw: &RawSymbol) -> Result<SymbolSpec, ConfigError> {
    let need = |v: Option<f64>, field: &str| {
        v.ok_or_else(|| ConfigError::new(field, format!("required for kind \"{}\"", raw.kind)))
    };
    fn wrap(field: &'static str) -> impl Fn(crate::Error) -> ConfigError {
        move |e| ConfigError::new(field, e.to_string())
    }
    match raw.kind.as_str() {
        "bessel" => SymbolSpec::bessel(need(raw.s, "symbol.s")?).map_err(wrap("symbol.s")),
        "helmholtz_power" => {
            let p = raw
                .power
                .ok_or_else(|| ConfigError::new("symbol.power", "required for kind \"helmholtz_power\""))?;
            SymbolSpec::helmholtz_power(p).map_err(wrap("symbol.power"))
        }
        "clm" => Ok(SymbolSpec::clm()),
        "identity" => Ok(SymbolSpec::identity()),
        "custom" => {
            let table = raw
                .table
                .clone()
                .ok_or_else(|| ConfigError::new("symbol.table", "required for kind \"custom\""))?;
            let order = need(raw.order, "symbol.order")?;
            SymbolSpec::custom(
                table,
                order,
                raw.invertible_on.unwrap_or(InvertibleOn::AllModes),
            )
            .map_err(wrap("symbol.table"))
        }
        "derivative" | "hilbert" => Err(ConfigError::new(
            "symbol.kind",
            format!("\"{}\" is not symmetric and cannot be an inertia operator", raw.kind),
        )),
        other => Err(ConfigError::new(
            "symbol.kind",
            format!("unknown kind \"{other}\""),
        )),
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let grid = Grid::new(raw.grid.n).map_err(|e| ConfigError::new("grid.n", e.to_string()))?;
    let symbol = symbol_from_raw(&raw.symbol)?;
    if let crate::symbol::SymbolKind::Custom { table } = symbol.kind() {
        if table.len() < grid.max_resolved() as usize + 1 {
            return Err(ConfigError::new(
                "symbol.table",
                format!(
                    "must list a(k) for k = 0..={}, got {} entries",
                    grid.max_resolved(),
                    table.len()
                ),
            ));
        }
        let first = usize::from(symbol.invertible_on() == InvertibleOn::MeanZeroOnly);
        if let Some(k) = (first..table.len()).find(|&k| !(table[k] > 0.0)) {
            return Err(ConfigError::new(
                "symbol.table",
                format!("indefinite inertia operator: a({k}) = {}", table[k]),
            ));
        }
    }
    symbol
        .certify(&grid)
        .map_err(|e| ConfigError::new("symbol", e.to_string()))?;

    let s = &raw.solver;
    if !(s.dt > 0.0) || !s.dt.is_finite() {
        return Err(ConfigError::new("solver.dt", "must be positive and finite"));
    }
    if !(s.t_end >= 0.0) || !s.t_end.is_finite() {
        return Err(ConfigError::new("solver.t_end", "must be non-negative and finite"));
    }
    let record_every = s.record_every.unwrap_or(1);
    if record_every == 0 {
        return Err(ConfigError::new("solver.record_every", "must be a positive integer"));
    }
    if let Some(q) = s.q_work {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(ConfigError::new("solver.q_work", "must be non-negative"));
        }
    }
    let mut solver = SolverConfig::new(symbol, s.dt, s.t_end)
        .with_record_every(record_every)
        .with_dealias(s.dealias)
        .with_stop_rules(raw.stop);
    solver.scheme = s.scheme;
    if let Some(q) = s.q_work {
        solver.q_work = q;
    }
    solver.validate().map_err(|e| {
        let msg = e.to_string();
        let field = if msg.contains("t_end") {
            "solver.t_end"
        } else if msg.contains("floor") || msg.contains("ceiling") {
            "stop"
        } else {
            "solver"
        };
        ConfigError::new(field, msg)
    })?;

    let modes = raw.initial.modes;
    if modes.is_empty() {
        return Err(ConfigError::new("initial.modes", "must list at least one mode"));
    }
    let cutoff = grid.dealias_cutoff();
    for (i, &(n, a, b)) in modes.iter().enumerate() {
        if i64::from(n) > cutoff {
            return Err(ConfigError::new(
                &format!("initial.modes[{i}]"),
                format!("mode exceeds dealias band ({n} > {cutoff} for grid n = {})", grid.len()),
            ));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(ConfigError::new(
                &format!("initial.modes[{i}]"),
                "amplitudes must be finite",
            ));
        }
    }
    let cfg = RunConfig {
        grid,
        solver,
        modes,
        frame: raw.run.frame,
        output: PathBuf::from(raw.run.output.unwrap_or_else(|| {
            format!("runs/{}", raw.run.label.as_deref().unwrap_or("run"))
        })),
        label: raw.run.label.unwrap_or_else(|| "run".to_string()),
        q_work_explicit: s.q_work.is_some(),
    };
    if cfg.solver.symbol.invertible_on() == InvertibleOn::MeanZeroOnly {
        let mean = analyze(&cfg.initial_velocity()).coeffs()[0].re;
        if mean.abs() > 1e-12 {
            return Err(ConfigError::new(
                "initial.modes",
                format!("zero mode not invertible for {} (mean {mean})", cfg.solver.symbol),
            ));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn initial_velocity(&self) -> PeriodicField {
        PeriodicField::from_modes(&self.grid, &self.modes)
    }

    /// Output directory after applying the output-root override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output.is_relative() => PathBuf::from(root).join(&self.output),
            _ => self.output.clone(),
        }
    }

    /// Copy with the inertia operator replaced by `bessel(s)`.
    pub fn with_bessel(&self, s: f64) -> Result<Self, ConfigError> {
        let symbol = SymbolSpec::bessel(s).map_err(|e| ConfigError::new("s", e.to_string()))?;
        let mut out = self.clone();
        if !self.q_work_explicit {
            out.solver.q_work = symbol.default_q_work();
        }
        out.solver.symbol = symbol;
        Ok(out)
    }

    /// The resolved configuration as TOML.
    pub fn echo(&self) -> String {
        let sv = &self.solver;
        let mut out = String::new();
        let _ = writeln!(out, "[grid]\nn = {}\n", self.grid.len());
        let _ = writeln!(out, "[symbol]\n{}", symbol_toml(&sv.symbol));
        let _ = writeln!(
            out,
            "[solver]\ndt = {:?}\nt_end = {:?}\nscheme = \"rk4\"\ndealias = \"{}\"\nrecord_every = {}\nq_work = {:?}\n",
            sv.dt,
            sv.t_end,
            match sv.dealias {
                Dealias::TwoThirds => "two_thirds",
                Dealias::None => "none",
            },
            sv.record_every,
            sv.q_work
        );
        let r = sv.stop_rules;
        let _ = writeln!(
            out,
            "[stop]\nmin_slope_floor = {:?}\nnorm_ceiling = {:?}\njacobian_floor = {:?}\n",
            r.min_slope_floor, r.norm_ceiling, r.jacobian_floor
        );
        let modes: Vec<String> = self
            .modes
            .iter()
            .map(|(n, a, b)| format!("[{n}, {a:?}, {b:?}]"))
            .collect();
        let _ = writeln!(out, "[initial]\nmodes = [{}]\n", modes.join(", "));
        let _ = write!(
            out,
            "[run]\nframe = \"{}\"\noutput = {:?}\nlabel = {:?}\n",
            self.frame.as_str(),
            self.output.display().to_string(),
            self.label
        );
        out
    }
}

fn symbol_toml(a: &SymbolSpec) -> String {
    use crate::symbol::SymbolKind::*;
    match a.kind() {
        Bessel { s } => format!("kind = \"bessel\"\ns = {s:?}\n"),
        HelmholtzPower { power } => format!("kind = \"helmholtz_power\"\npower = {power}\n"),
        Clm => "kind = \"clm\"\n".into(),
        Identity => "kind = \"identity\"\n".into(),
        Derivative => "kind = \"derivative\"\n".into(),
        Hilbert => "kind = \"hilbert\"\n".into(),
        Custom { table } => format!(
            "kind = \"custom\"\ntable = {:?}\norder = {:?}\ninvertible_on = \"{}\"\n",
            table,
            a.order(),
            match a.invertible_on() {
                InvertibleOn::AllModes => "all_modes",
                InvertibleOn::MeanZeroOnly => "mean_zero_only",
            }
        ),
    }
}
