//! Flag and config-file resolution into a validated [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::first_passage::DEFAULT_T_CAP;
use crate::transforms::InversionOptions;
use crate::EngineParams;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Pmf,
    Moments,
    Fpt,
    Power,
    Optimize,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Parser)]
#[command(
    name = "lqme",
    version,
    about = "Lazy quantum measurement engine: analytics and simulation"
)]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Measurement angle in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub p_jump: Option<f64>,
    #[arg(long)]
    pub p_lazy: Option<f64>,
    /// hbar omega_0 / k_B T.
    #[arg(long)]
    pub ratio_r: Option<f64>,
    #[arg(long)]
    pub coupling_omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<i64>,
    #[arg(long)]
    pub t_max: Option<u64>,
    #[arg(long)]
    pub t_cap: Option<u64>,
    #[arg(long)]
    pub n_samples: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n_target: Option<i64>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Inversion accuracy γ in decimal digits.
    #[arg(long)]
    pub target_digits: Option<f64>,
    #[arg(long)]
    pub max_terms: Option<u64>,
    /// `a,b,c`, `lin:a:b:n` or `log:a:b:n`.
    #[arg(long)]
    pub theta_grid: Option<String>,
    #[arg(long)]
    pub p_lazy_grid: Option<String>,
    #[arg(long)]
    pub ratio_r_grid: Option<String>,
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridInput {
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<Mode>,
    pub theta: Option<f64>,
    pub p_jump: Option<f64>,
    pub p_lazy: Option<f64>,
    pub ratio_r: Option<f64>,
    pub coupling_omega: Option<f64>,
    pub n0: Option<i64>,
    pub t_max: Option<u64>,
    pub t_cap: Option<u64>,
    pub n_samples: Option<u64>,
    pub n_target: Option<i64>,
    pub base_seed: Option<u64>,
    pub target_digits: Option<f64>,
    pub max_terms: Option<u64>,
    pub theta_grid: Option<GridInput>,
    pub p_lazy_grid: Option<GridInput>,
    pub ratio_r_grid: Option<GridInput>,
    pub t_grid: Option<GridInput>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }
}

/// A resolved sweep axis. `spec` is the canonical text form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub spec: String,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn parse(name: &str, text: &str) -> Result<Self, CliError> {
        let bad = |msg: &str| CliError::Usage(format!("{name}: {msg} in `{text}`"));
        let text = text.trim();
        let values = if let Some((kind, rest)) = text.split_once(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("expected kind:start:stop:count"));
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
            let b: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
            if n == 0 {
                return Err(bad("count must be positive"));
            }
            let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            match kind {
                "lin" => (0..n).map(|i| a + (b - a) * frac(i)).collect(),
                "log" => {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(bad("log bounds must be positive"));
                    }
                    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * frac(i)).exp()).collect()
                }
                _ => return Err(bad("unknown grid kind")),
            }
        } else {
            text.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<Vec<_>, _>>()?
        };
        Self::check(name, text.to_string(), values)
    }

    pub fn from_input(name: &str, input: GridInput) -> Result<Self, CliError> {
        match input {
            GridInput::Text(s) => Self::parse(name, &s),
            GridInput::List(v) => {
                let spec = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                Self::check(name, spec, v)
            }
        }
    }

    fn check(name: &str, spec: String, values: Vec<f64>) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Usage(format!("{name}: empty grid")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!("{name}: non-finite value")));
        }
        Ok(Self { spec, values })
    }

    /// Values rounded to distinct non-negative integers, in order.
    pub fn as_times(&self, name: &str) -> Result<Vec<u64>, CliError> {
        let mut out: Vec<u64> = Vec::new();
        for &v in &self.values {
            if v < 0.0 {
                return Err(CliError::Usage(format!("{name}: negative time {v}")));
            }
            let t = v.round() as u64;
            if out.last() != Some(&t) {
                out.push(t);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// One parameter combination of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub theta: Option<f64>,
    pub params: EngineParams,
}

/// Fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub theta: Option<f64>,
    pub p_jump: Option<f64>,
    pub p_lazy: f64,
    pub ratio_r: f64,
    pub coupling_omega: f64,
    pub n0: i64,
    pub t_max: u64,
    pub t_cap: u64,
    pub n_samples: u64,
    pub n_target: Option<i64>,
    pub base_seed: u64,
    pub inversion: InversionOptions,
    pub theta_grid: Option<Grid>,
    pub p_lazy_grid: Option<Grid>,
    pub ratio_r_grid: Option<Grid>,
    pub t_grid: Option<Grid>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    #[serde(skip)]
    pub points: Vec<GridPoint>,
}

pub const DEFAULT_T_MAX: u64 = 100;
pub const DEFAULT_SIM_SAMPLES: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn grid_from_flag(name: &str, flag: Option<String>, file: Option<GridInput>) -> Result<Option<Grid>, CliError> {
    match (flag, file) {
        (Some(s), _) => Grid::parse(name, &s).map(Some),
        (None, Some(g)) => Grid::from_input(name, g).map(Some),
        (None, None) => Ok(None),
    }
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        // Each angle/laziness/ratio group is taken wholesale from the flags
        // when any member appears there.
        let angle_from_flags = cli.theta.is_some() || cli.p_jump.is_some() || cli.theta_grid.is_some();
        let (theta, p_jump, theta_grid) = if angle_from_flags {
            (
                cli.theta,
                cli.p_jump,
                grid_from_flag("theta_grid", cli.theta_grid, None)?,
            )
        } else {
            (
                file.theta,
                file.p_jump,
                grid_from_flag("theta_grid", None, file.theta_grid)?,
            )
        };
        let lazy_from_flags = cli.p_lazy.is_some() || cli.p_lazy_grid.is_some();
        let (p_lazy, p_lazy_grid) = if lazy_from_flags {
            (cli.p_lazy, grid_from_flag("p_lazy_grid", cli.p_lazy_grid, None)?)
        } else {
            (file.p_lazy, grid_from_flag("p_lazy_grid", None, file.p_lazy_grid)?)
        };
        let ratio_from_flags = cli.ratio_r.is_some() || cli.ratio_r_grid.is_some();
        let (ratio_r, ratio_r_grid) = if ratio_from_flags {
            (cli.ratio_r, grid_from_flag("ratio_r_grid", cli.ratio_r_grid, None)?)
        } else {
            (file.ratio_r, grid_from_flag("ratio_r_grid", None, file.ratio_r_grid)?)
        };
        let t_grid = grid_from_flag("t_grid", cli.t_grid, file.t_grid)?;

        let mode = cli.mode.or(file.mode).ok_or_else(|| usage("mode: required"))?;
        let n0 = cli.n0.or(file.n0).unwrap_or(0);
        let inversion = InversionOptions {
            target_digits: cli.target_digits.or(file.target_digits).unwrap_or(10.0),
            max_terms: cli.max_terms.or(file.max_terms).unwrap_or(1_000_000),
            radius_override: None,
        };
        inversion.validate().map_err(usage)?;

        let default_samples = if mode == Mode::Simulate { DEFAULT_SIM_SAMPLES } else { 0 };
        let config = RunConfig {
            mode,
            theta,
            p_jump,
            p_lazy: p_lazy.unwrap_or(0.0),
            ratio_r: ratio_r.unwrap_or(1.0),
            coupling_omega: cli.coupling_omega.or(file.coupling_omega).unwrap_or(1.0),
            n0,
            t_max: cli.t_max.or(file.t_max).unwrap_or(DEFAULT_T_MAX),
            t_cap: cli.t_cap.or(file.t_cap).unwrap_or(DEFAULT_T_CAP),
            n_samples: cli.n_samples.or(file.n_samples).unwrap_or(default_samples),
            n_target: cli.n_target.or(file.n_target),
            base_seed: cli.base_seed.or(file.base_seed).unwrap_or(DEFAULT_SEED),
            inversion,
            theta_grid,
            p_lazy_grid,
            ratio_r_grid,
            t_grid,
            output_path: cli.output.or(file.output),
            output_format: cli.format.or(file.format).unwrap_or_default(),
            points: Vec::new(),
        };
        config.validated()
    }

    fn validated(mut self) -> Result<Self, CliError> {
        let mode = self.mode;
        let needs_angle = matches!(mode, Mode::Power | Mode::Optimize | Mode::Sweep);
        let uses_ratio = needs_angle;
        let uses_times = matches!(mode, Mode::Simulate | Mode::Moments);

        if self.theta_grid.is_some() && (self.theta.is_some() || self.p_jump.is_some()) {
            return Err(usage("theta_grid: cannot be combined with theta or p_jump"));
        }
        if self.theta.is_none() && self.p_jump.is_none() && self.theta_grid.is_none() {
            return Err(usage("theta: one of theta, p_jump or theta_grid is required"));
        }
        if needs_angle && self.theta.is_none() && self.theta_grid.is_none() {
            return Err(usage(format!("theta: required by mode {mode:?}").to_lowercase()));
        }
        if self.p_lazy_grid.is_some() && mode == Mode::Optimize {
            return Err(usage("p_lazy_grid: not used by mode optimize"));
        }
        if self.ratio_r_grid.is_some() && !uses_ratio {
            return Err(usage("ratio_r_grid: only used by modes power, optimize and sweep"));
        }
        if self.t_grid.is_some() && !uses_times {
            return Err(usage("t_grid: only used by modes simulate and moments"));
        }
        if let Some(g) = &self.t_grid {
            let times = g.as_times("t_grid")?;
            if mode == Mode::Simulate && times.iter().any(|&t| t > self.t_max) {
                return Err(usage("t_grid: values must not exceed t_max in mode simulate"));
            }
        }
        if mode == Mode::Simulate && self.n_samples == 0 {
            return Err(usage("n_samples: must be positive in mode simulate"));
        }
        if matches!(mode, Mode::Fpt | Mode::Sweep) {
            let target = self
                .n_target
                .ok_or_else(|| usage("n_target: required by modes fpt and sweep"))?;
            if target <= self.n0 {
                return Err(usage("n_target: must exceed n0"));
            }
        }

        let thetas: Vec<Option<f64>> = match (&self.theta_grid, self.theta) {
            (Some(g), _) => g.values.iter().map(|&t| Some(t)).collect(),
            (None, t) => vec![t],
        };
        let lazies = match &self.p_lazy_grid {
            Some(g) => g.values.clone(),
            None => vec![self.p_lazy],
        };
        let ratios = match &self.ratio_r_grid {
            Some(g) => g.values.clone(),
            None => vec![self.ratio_r],
        };
        for &theta in &thetas {
            if let Some(t) = theta {
                if needs_angle && !(t > 0.0 && t < std::f64::consts::PI) {
                    return Err(usage(format!("theta: {t} outside (0, pi)")));
                }
            }
            for &pl in &lazies {
                for &r in &ratios {
                    let base = match (theta, self.p_jump) {
                        (Some(t), Some(pj)) => EngineParams::from_theta_and_jump(t, pj, pl),
                        (Some(t), None) => EngineParams::from_theta(t, pl),
                        (None, Some(pj)) => EngineParams::from_jump(pj, pl),
                        (None, None) => unreachable!(),
                    }
                    .map_err(usage)?;
                    let params = base
                        .with_ratio(r)
                        .and_then(|p| p.with_coupling(self.coupling_omega))
                        .map_err(usage)?
                        .with_n0(self.n0);
                    self.points.push(GridPoint { theta, params });
                }
            }
        }
        if self.p_jump.is_none() && self.theta_grid.is_none() {
            self.p_jump = Some(self.points[0].params.p_jump());
        }
        Ok(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
