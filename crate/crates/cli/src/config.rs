//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! A `preset = <name>` line is applied before every other key regardless of
//! where it appears, so explicit keys always override the preset. Each key may
//! appear at most once.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ap_kinetic::micromacro::{HInit, MicroMacroConfig, NewtonSettings};
use ap_kinetic::hj_limit::LimitConfig;
use ap_kinetic::{Boundary, Equilibrium, EquilibriumSpec, Error as SolverError, Grid, InitialData};
use thiserror::Error;

use crate::output::num;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("unknown key `{key}`")]
    UnknownOverride { key: String },

    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },

    #[error("invalid `{key}`: {source}")]
    Invalid {
        key: &'static str,
        #[source]
        source: SolverError,
    },

    #[error("unknown preset `{0}` (available: {list})", list = PRESETS.join(", "))]
    UnknownPreset(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    MicroMacro,
    ExplicitRef,
    HJLimit,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::MicroMacro => "micro_macro",
            SolverKind::ExplicitRef => "explicit",
            SolverKind::HJLimit => "limit",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "micro_macro" | "micromacro" => Ok(SolverKind::MicroMacro),
            "explicit" | "explicit_ref" => Ok(SolverKind::ExplicitRef),
            "limit" | "hj_limit" => Ok(SolverKind::HJLimit),
            _ => Err("expected micro_macro, explicit or limit".into()),
        }
    }
}

/// Everything needed to run one solver.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub x_max: f64,
    pub dx: f64,
    pub v_max: f64,
    pub dv: f64,
    pub t_final: f64,
    pub dt: f64,
    pub eps: f64,
    pub r: f64,
    pub equilibrium: EquilibriumSpec<f64>,
    pub initial: InitialData,
    pub boundary: Boundary,
    /// Times at which the state is written, besides the initial and final level.
    pub snapshots: Vec<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub ham_tol: f64,
    pub phi_cap: f64,
    pub h_init: HInit,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let newton = NewtonSettings::default();
        RunConfig {
            solver: SolverKind::MicroMacro,
            x_max: 1.0,
            dx: 1e-2,
            v_max: 1.0,
            dv: 1.25e-2,
            t_final: 1.0,
            dt: 2.5e-3,
            eps: 1.0,
            r: 0.0,
            equilibrium: EquilibriumSpec::Uniform,
            initial: InitialData::Quadratic,
            boundary: Boundary::Periodic,
            snapshots: Vec::new(),
            newton_tol: newton.tol,
            newton_max_iter: newton.max_iter,
            ham_tol: 1e-12,
            phi_cap: 10.0,
            h_init: HInit::Limit,
            output: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "preset",
    "solver",
    "x_max",
    "dx",
    "v_max",
    "dv",
    "t_final",
    "dt",
    "eps",
    "r",
    "equilibrium",
    "equilibrium_values",
    "initial",
    "step_position",
    "initial_values",
    "boundary",
    "snapshots",
    "newton_tol",
    "newton_max_iter",
    "ham_tol",
    "phi_cap",
    "h_init",
    "output",
];

pub const PRESETS: &[&str] = &[
    "fig_phi_reg_ep1",
    "fig_phi_reg_ep1e-1",
    "fig_phi_reg_ep1e-2",
    "two_minima",
    "front",
    "singular",
];

const QUARTERS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Named parameter sets.
pub fn preset(name: &str) -> Result<RunConfig> {
    let base = RunConfig {
        snapshots: QUARTERS.to_vec(),
        ..RunConfig::default()
    };
    Ok(match name {
        "fig_phi_reg_ep1" => base,
        "fig_phi_reg_ep1e-1" => RunConfig { eps: 1e-1, ..base },
        "fig_phi_reg_ep1e-2" => RunConfig { eps: 1e-2, ..base },
        "two_minima" => RunConfig {
            eps: 1e-2,
            initial: InitialData::TwoMinima,
            ..base
        },
        "front" => RunConfig {
            eps: 1e-4,
            r: 1.0,
            dx: 1.25e-3,
            dt: 3.125e-4,
            initial: InitialData::LeftStep { position: -0.75 },
            boundary: Boundary::Neumann,
            ..base
        },
        "singular" => RunConfig {
            eps: 1e-4,
            dv: 5e-2,
            equilibrium: EquilibriumSpec::SingularParabolic,
            ..base
        },
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    })
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|e| invalid(key, value, e.to_string()))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

impl RunConfig {
    /// Sets one key. `preset` is rejected here; see [`parse_config`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "solver" => self.solver = value.parse().map_err(|e: String| invalid(key, value, e))?,
            "x_max" => self.x_max = number(key, value)?,
            "dx" => self.dx = number(key, value)?,
            "v_max" => self.v_max = number(key, value)?,
            "dv" => self.dv = number(key, value)?,
            "t_final" => self.t_final = number(key, value)?,
            "dt" => self.dt = number(key, value)?,
            "eps" => self.eps = number(key, value)?,
            "r" => self.r = number(key, value)?,
            "equilibrium" => {
                self.equilibrium = match value.to_ascii_lowercase().as_str() {
                    "uniform" => EquilibriumSpec::Uniform,
                    "singular" | "singular_parabolic" => EquilibriumSpec::SingularParabolic,
                    "custom" => match &self.equilibrium {
                        EquilibriumSpec::Custom(v) => EquilibriumSpec::Custom(v.clone()),
                        _ => EquilibriumSpec::Custom(Vec::new()),
                    },
                    _ => return Err(invalid(key, value, "expected uniform, singular or custom")),
                }
            }
            "equilibrium_values" => self.equilibrium = EquilibriumSpec::Custom(list(key, value)?),
            "initial" => {
                self.initial = match value.to_ascii_lowercase().as_str() {
                    "quadratic" => InitialData::Quadratic,
                    "two_minima" => InitialData::TwoMinima,
                    "left_step" => match self.initial {
                        InitialData::LeftStep { position } => InitialData::LeftStep { position },
                        _ => InitialData::LeftStep { position: -0.75 },
                    },
                    "table" => match &self.initial {
                        InitialData::Table(v) => InitialData::Table(v.clone()),
                        _ => InitialData::Table(Vec::new()),
                    },
                    _ => return Err(invalid(key, value, "expected quadratic, two_minima, left_step or table")),
                }
            }
            "step_position" => {
                self.initial = InitialData::LeftStep {
                    position: number(key, value)?,
                }
            }
            "initial_values" => self.initial = InitialData::Table(list(key, value)?),
            "boundary" => self.boundary = value.parse().map_err(|e: SolverError| invalid(key, value, e.to_string()))?,
            "snapshots" => self.snapshots = list(key, value)?,
            "newton_tol" => self.newton_tol = number(key, value)?,
            "newton_max_iter" => {
                self.newton_max_iter = value.parse().map_err(|e: std::num::ParseIntError| invalid(key, value, e.to_string()))?
            }
            "ham_tol" => self.ham_tol = number(key, value)?,
            "phi_cap" => self.phi_cap = number(key, value)?,
            "h_init" => self.h_init = value.parse().map_err(|e: SolverError| invalid(key, value, e.to_string()))?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(ConfigError::UnknownOverride { key: key.to_string() }),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order, then validates.
    pub fn with_overrides(mut self, overrides: &[(String, String)]) -> Result<Self> {
        for (k, v) in overrides {
            if k == "preset" {
                let output = self.output.clone();
                self = preset(v)?;
                self.output = output;
            } else {
                self.set(k, v)?;
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::from_steps(self.x_max, self.dx, self.v_max, self.dv, self.t_final, self.dt, self.boundary).map_err(
            |source| {
                let key = match &source {
                    SolverError::Cfl { .. } => "dt",
                    SolverError::OddCount { name, .. } if name.contains('v') => "dv",
                    SolverError::OddCount { .. } => "dx",
                    SolverError::Config(msg) if msg.starts_with("dv") => "dv",
                    SolverError::Config(msg) if msg.starts_with("dt") => "dt",
                    _ => "dx",
                };
                ConfigError::Invalid { key, source }
            },
        )
    }

    pub fn equilibrium(&self, grid: &Grid<f64>) -> Result<Equilibrium<f64>> {
        Equilibrium::build(&self.equilibrium, grid).map_err(|source| ConfigError::Invalid {
            key: "equilibrium",
            source,
        })
    }

    pub fn initial_phase(&self, grid: &Grid<f64>) -> Result<Vec<f64>> {
        self.initial.sample(&grid.x).map_err(|source| ConfigError::Invalid { key: "initial", source })
    }

    pub fn micro_macro(&self) -> MicroMacroConfig {
        MicroMacroConfig {
            newton: NewtonSettings {
                tol: self.newton_tol,
                max_iter: self.newton_max_iter,
                ..NewtonSettings::default()
            },
            h_init: self.h_init,
            ham_tol: self.ham_tol,
            phi_cap: self.phi_cap,
            ..MicroMacroConfig::new(self.eps, self.r)
        }
    }

    pub fn limit(&self) -> LimitConfig {
        LimitConfig {
            r: self.r,
            ham_tol: self.ham_tol,
            phi_cap: self.phi_cap,
        }
    }

    /// Checks every solver precondition that can be checked before a run.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.equilibrium(&grid)?;
        self.initial_phase(&grid)?;
        if self.solver != SolverKind::HJLimit {
            self.micro_macro()
                .validate()
                .map_err(|source| ConfigError::Invalid { key: "eps", source })?;
        } else if self.r.is_nan() || self.r < 0.0 {
            return Err(invalid("r", &self.r.to_string(), "must be nonnegative"));
        }
        if self.ham_tol.is_nan() || self.ham_tol <= 0.0 {
            return Err(invalid("ham_tol", &self.ham_tol.to_string(), "must be positive"));
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(0.0..=self.t_final).contains(&t)) {
            return Err(invalid("snapshots", &t.to_string(), format!("must lie in [0, {}]", self.t_final)));
        }
        Ok(())
    }

    /// Every parameter that affects results, as `(key, value)` text.
    pub fn entries(&self) -> Vec<(String, String)> {
        let join = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
        let equilibrium = match &self.equilibrium {
            EquilibriumSpec::Uniform => "uniform".to_string(),
            EquilibriumSpec::SingularParabolic => "singular".to_string(),
            EquilibriumSpec::Custom(_) => "custom".to_string(),
        };
        let mut out = vec![
            ("solver".to_string(), self.solver.to_string()),
            ("x_max".into(), num(self.x_max)),
            ("dx".into(), num(self.dx)),
            ("v_max".into(), num(self.v_max)),
            ("dv".into(), num(self.dv)),
            ("t_final".into(), num(self.t_final)),
            ("dt".into(), num(self.dt)),
            ("eps".into(), num(self.eps)),
            ("r".into(), num(self.r)),
            ("equilibrium".into(), equilibrium),
            ("initial".into(), self.initial.name().to_string()),
            ("boundary".into(), self.boundary.to_string()),
            ("snapshots".into(), join(&self.snapshots)),
            ("newton_tol".into(), num(self.newton_tol)),
            ("newton_max_iter".into(), self.newton_max_iter.to_string()),
            ("ham_tol".into(), num(self.ham_tol)),
            ("phi_cap".into(), num(self.phi_cap)),
            ("h_init".into(), format!("{:?}", self.h_init).to_ascii_lowercase()),
        ];
        if let EquilibriumSpec::Custom(v) = &self.equilibrium {
            out.push(("equilibrium_values".into(), join(v)));
        }
        match &self.initial {
            InitialData::LeftStep { position } => out.push(("step_position".into(), num(*position))),
            InitialData::Table(v) => out.push(("initial_values".into(), join(v))),
            _ => {}
        }
        out
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: body.to_string(),
            });
        };
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if pairs.iter().any(|(_, k, _)| *k == key) {
            return Err(ConfigError::Duplicate { line, key });
        }
        pairs.push((line, key, value.trim().to_string()));
    }
    let mut cfg = match pairs.iter().find(|(_, k, _)| k == "preset") {
        Some((_, _, name)) => preset(name)?,
        None => RunConfig::default(),
    };
    for (_, key, value) in pairs.iter().filter(|(_, k, _)| k != "preset") {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}
