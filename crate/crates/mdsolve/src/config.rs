//! Run configuration: a flat `key = value` text format with the sections
//! `[equation]`, `[mesh]`, `[time]`, `[solver]` and `[output]`. Unknown
//! sections or keys are errors; every key has a default.

use crate::solver::{Preconditioner, RebuildPolicy, SolveMode, SolverConfig};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: key `{key}` outside any section")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("key `{key}`: invalid value `{value}` ({expected})")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Advection,
    Euler,
    NavierStokes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Hbpc,
    Rk4,
}

/// Everything a run needs; field names mirror the config keys.
#[derive(Debug, Clone)]
pub struct RunConfig {
    // [equation]
    pub system: SystemKind,
    pub case: String,
    pub a: [f64; 2],
    pub epsilon: f64,
    pub gamma: f64,
    pub mu: f64,
    pub prandtl: f64,
    // [mesh]
    pub nx: usize,
    pub ny: usize,
    pub bounds: (f64, f64, f64, f64),
    pub degree: usize,
    pub br2_eta: f64,
    // [time]
    pub scheme: Scheme,
    pub q: usize,
    pub kmax: usize,
    pub dt: f64,
    pub t_end: f64,
    pub dt_list: Vec<f64>,
    /// Explicit reference step for viscous runs; 0 selects an automatic
    /// CFL-based value.
    pub reference_dt: f64,
    // [solver]
    pub solver: SolverConfig,
    pub precond_list: Vec<Preconditioner>,
    pub mode_list: Vec<SolveMode>,
    pub threads: usize,
    // [output]
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::Advection,
            case: "sine".to_string(),
            a: [0.3, 0.3],
            epsilon: 1.0,
            gamma: 1.4,
            mu: 1e-3,
            prandtl: 0.72,
            nx: 16,
            ny: 16,
            bounds: (-1.0, 1.0, -1.0, 1.0),
            degree: 5,
            br2_eta: 4.0,
            scheme: Scheme::Hbpc,
            q: 4,
            kmax: 0,
            dt: 0.1,
            t_end: 0.8,
            dt_list: Vec::new(),
            reference_dt: 0.0,
            solver: SolverConfig::default(),
            precond_list: Vec::new(),
            mode_list: Vec::new(),
            threads: 1,
            out_dir: "out".to_string(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(
    key: &str,
    value: &str,
    expected: &'static str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "true or false",
        }),
    }
}

pub fn parse_preconditioner(key: &str, value: &str) -> Result<Preconditioner, ConfigError> {
    match value {
        "none" => Ok(Preconditioner::None),
        "bj_ext" => Ok(Preconditioner::BjExt),
        "bj_ext_h" => Ok(Preconditioner::BjExtH),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "none, bj_ext or bj_ext_h",
        }),
    }
}

pub fn parse_mode(key: &str, value: &str) -> Result<SolveMode, ConfigError> {
    match value {
        "extended" => Ok(SolveMode::Extended),
        "schur" => Ok(SolveMode::Schur),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "extended or schur",
        }),
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                match name {
                    "equation" | "mesh" | "time" | "solver" | "output" => {
                        section = Some(name.to_string());
                    }
                    _ => {
                        return Err(ConfigError::UnknownSection {
                            line,
                            name: name.to_string(),
                        })
                    }
                }
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Malformed {
                line,
                text: content.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_deref().ok_or(ConfigError::KeyOutsideSection {
                line,
                key: key.to_string(),
            })?;
            cfg.apply(section, key, value).map_err(|e| match e {
                ConfigError::UnknownKey { section, key, .. } => {
                    ConfigError::UnknownKey { line, section, key }
                }
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set a single key; used by both the parser and CLI overrides.
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        match (section, key) {
            ("equation", "system") => {
                self.system = match value {
                    "advection" => SystemKind::Advection,
                    "euler" => SystemKind::Euler,
                    "navier_stokes" => SystemKind::NavierStokes,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "advection, euler or navier_stokes",
                        })
                    }
                }
            }
            ("equation", "case") => self.case = value.to_string(),
            ("equation", "a1") => self.a[0] = parse_num(key, value, "a real number")?,
            ("equation", "a2") => self.a[1] = parse_num(key, value, "a real number")?,
            ("equation", "epsilon") => self.epsilon = parse_num(key, value, "a real number")?,
            ("equation", "gamma") => self.gamma = parse_num(key, value, "a real number")?,
            ("equation", "mu") => self.mu = parse_num(key, value, "a real number")?,
            ("equation", "prandtl") => self.prandtl = parse_num(key, value, "a real number")?,
            ("mesh", "nx") => self.nx = parse_num(key, value, "a positive integer")?,
            ("mesh", "ny") => self.ny = parse_num(key, value, "a positive integer")?,
            ("mesh", "x_min") => self.bounds.0 = parse_num(key, value, "a real number")?,
            ("mesh", "x_max") => self.bounds.1 = parse_num(key, value, "a real number")?,
            ("mesh", "y_min") => self.bounds.2 = parse_num(key, value, "a real number")?,
            ("mesh", "y_max") => self.bounds.3 = parse_num(key, value, "a real number")?,
            ("mesh", "n") => self.degree = parse_num(key, value, "a nonnegative integer")?,
            ("mesh", "br2_eta") => self.br2_eta = parse_num(key, value, "a real number")?,
            ("time", "scheme") => {
                self.scheme = match value {
                    "hbpc" => Scheme::Hbpc,
                    "rk4" => Scheme::Rk4,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "hbpc or rk4",
                        })
                    }
                }
            }
            ("time", "q") => self.q = parse_num(key, value, "4, 6 or 8")?,
            ("time", "kmax") => self.kmax = parse_num(key, value, "a nonnegative integer")?,
            ("time", "dt") => self.dt = parse_num(key, value, "a positive real")?,
            ("time", "t_end") => self.t_end = parse_num(key, value, "a positive real")?,
            ("time", "dt_list") => {
                self.dt_list = value
                    .split(',')
                    .map(|s| parse_num("dt_list", s.trim(), "comma-separated reals"))
                    .collect::<Result<_, _>>()?;
            }
            ("time", "reference_dt") => {
                self.reference_dt = parse_num(key, value, "a nonnegative real")?
            }
            ("solver", "newton_tol_rel") => {
                self.solver.tol_newton_rel = parse_num(key, value, "a positive real")?
            }
            ("solver", "newton_tol_abs") => {
                self.solver.tol_newton_abs = parse_num(key, value, "a positive real")?
            }
            ("solver", "newton_max_iter") => {
                self.solver.max_newton = parse_num(key, value, "a positive integer")?
            }
            ("solver", "gmres_tol_rel") => {
                self.solver.tol_gmres_rel = parse_num(key, value, "a positive real")?
            }
            ("solver", "gmres_restart") => {
                self.solver.gmres_restart = parse_num(key, value, "a positive integer")?
            }
            ("solver", "gmres_max_total") => {
                self.solver.max_krylov_total = parse_num(key, value, "a positive integer")?
            }
            ("solver", "preconditioner") => {
                self.solver.preconditioner = parse_preconditioner(key, value)?
            }
            ("solver", "mode") => self.solver.mode = parse_mode(key, value)?,
            ("solver", "precond_rebuild") => {
                self.solver.precond_rebuild = match value {
                    "each_newton" => RebuildPolicy::EachNewton,
                    "each_timestep" => RebuildPolicy::EachTimestep,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "each_newton or each_timestep",
                        })
                    }
                }
            }
            ("solver", "force_fd_jvp") => self.solver.force_fd_jvp = parse_bool(key, value)?,
            ("solver", "precond_list") => {
                self.precond_list = value
                    .split(',')
                    .map(|s| parse_preconditioner("precond_list", s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            ("solver", "mode_list") => {
                self.mode_list = value
                    .split(',')
                    .map(|s| parse_mode("mode_list", s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            ("solver", "threads") => self.threads = parse_num(key, value, "a positive integer")?,
            ("output", "dir") => self.out_dir = value.to_string(),
            (section, key) => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    section: section.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.case != "sine" {
            return Err(ConfigError::Invalid(format!(
                "unknown case `{}`; only `sine` is available",
                self.case
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(ConfigError::Invalid(
                "time.dt and time.t_end must be positive".to_string(),
            ));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(ConfigError::Invalid(
                "mesh.nx and mesh.ny must be positive".into(),
            ));
        }
        if !matches!(self.q, 4 | 6 | 8) {
            return Err(ConfigError::Invalid(format!(
                "time.q must be 4, 6 or 8, got {}",
                self.q
            )));
        }
        if self.threads == 0 {
            return Err(ConfigError::Invalid("solver.threads must be positive".into()));
        }
        Ok(())
    }

    /// Canonical text form; every field in a fixed order.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let precond_name = |p: &Preconditioner| match p {
            Preconditioner::None => "none",
            Preconditioner::BjExt => "bj_ext",
            Preconditioner::BjExtH => "bj_ext_h",
        };
        let mode_name = |m: &SolveMode| match m {
            SolveMode::Extended => "extended",
            SolveMode::Schur => "schur",
        };
        let _ = write!(
            s,
            "system={:?};case={};a={:?};epsilon={};gamma={};mu={};prandtl={};\
             nx={};ny={};bounds={:?};n={};br2_eta={};\
             scheme={:?};q={};kmax={};dt={};t_end={};dt_list={:?};reference_dt={};\
             newton=({},{},{});gmres=({},{},{});precond={};mode={};rebuild={:?};force_fd={};\
             precond_list={:?};mode_list={:?};threads={}",
            self.system,
            self.case,
            self.a,
            self.epsilon,
            self.gamma,
            self.mu,
            self.prandtl,
            self.nx,
            self.ny,
            self.bounds,
            self.degree,
            self.br2_eta,
            self.scheme,
            self.q,
            self.kmax,
            self.dt,
            self.t_end,
            self.dt_list,
            self.reference_dt,
            self.solver.tol_newton_rel,
            self.solver.tol_newton_abs,
            self.solver.max_newton,
            self.solver.tol_gmres_rel,
            self.solver.gmres_restart,
            self.solver.max_krylov_total,
            precond_name(&self.solver.preconditioner),
            mode_name(&self.solver.mode),
            self.solver.precond_rebuild,
            self.solver.force_fd_jvp,
            self.precond_list.iter().map(precond_name).collect::<Vec<_>>(),
            self.mode_list.iter().map(mode_name).collect::<Vec<_>>(),
            self.threads,
        );
        s
    }

    /// Short hash identifying the configuration.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut out = String::new();
        for b in digest.iter().take(6) {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}
