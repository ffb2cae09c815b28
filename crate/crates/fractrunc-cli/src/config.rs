//! Run configuration.
//!
//! Each setting is taken from the first source that provides it: command-line
//! flag, `FRACTRUNC_*` environment variable, `key = value` config file, default.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Args, ValueEnum};
use fractrunc::operators::SearchBudget;
use fractrunc::quad::Tolerance;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file with `key = value` lines.
    #[arg(long, global = true, env = "FRACTRUNC_CONFIG")]
    pub config: Option<String>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, env = "FRACTRUNC_ABS_TOL")]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, env = "FRACTRUNC_REL_TOL")]
    pub rel_tol: Option<f64>,
    /// Integrand evaluations allowed per integral.
    #[arg(long, global = true, env = "FRACTRUNC_MAX_EVALS")]
    pub max_evals: Option<usize>,
    /// Largest accepted residual of a computed root.
    #[arg(long, global = true, env = "FRACTRUNC_ROOT_TOL")]
    pub root_tol: Option<f64>,
    /// Restarts of the frame search.
    #[arg(long, global = true, env = "FRACTRUNC_RESTARTS")]
    pub restarts: Option<usize>,
    /// Rotation sweeps per restart of the frame search.
    #[arg(long, global = true, env = "FRACTRUNC_SWEEPS")]
    pub sweeps: Option<usize>,
    /// Radii (or heights) per sample grid.
    #[arg(long, global = true, env = "FRACTRUNC_GRID_RADII")]
    pub grid_radii: Option<usize>,
    /// Directions per radius of a sample grid.
    #[arg(long, global = true, env = "FRACTRUNC_GRID_DIRS")]
    pub grid_dirs: Option<usize>,
    #[arg(long, global = true, env = "FRACTRUNC_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, env = "FRACTRUNC_FORMAT")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    pub root_tol: f64,
    pub restarts: usize,
    pub sweeps: usize,
    pub grid_radii: usize,
    pub grid_dirs: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        let t = Tolerance::default();
        let b = SearchBudget::default();
        Config {
            abs_tol: t.abs_tol,
            rel_tol: t.rel_tol,
            max_evals: t.max_evals,
            root_tol: fractrunc::constants::ROOT_RESIDUAL_TOL,
            restarts: b.restarts,
            sweeps: b.sweeps,
            grid_radii: 8,
            grid_dirs: 8,
            seed: 42,
            format: Format::Json,
        }
    }
}

const KEYS: [&str; 10] =
    ["abs_tol", "rel_tol", "max_evals", "root_tol", "restarts", "sweeps", "grid_radii", "grid_dirs", "seed", "format"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key {k}", i + 1)));
        }
        out.insert(k, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw.parse().map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))),
        None => Ok(default),
    }
}

impl Config {
    pub fn resolve(args: &ConfigArgs) -> Result<Config, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(Path::new(path))
                    .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let d = Config::default();
        let format = match (args.format, file.get("format")) {
            (Some(f), _) => f,
            (None, Some(raw)) => Format::from_str(raw, true)
                .map_err(|_| CliError::Usage(format!("config key format: cannot parse {raw:?}")))?,
            (None, None) => d.format,
        };
        let c = Config {
            abs_tol: pick(args.abs_tol, &file, "abs_tol", d.abs_tol)?,
            rel_tol: pick(args.rel_tol, &file, "rel_tol", d.rel_tol)?,
            max_evals: pick(args.max_evals, &file, "max_evals", d.max_evals)?,
            root_tol: pick(args.root_tol, &file, "root_tol", d.root_tol)?,
            restarts: pick(args.restarts, &file, "restarts", d.restarts)?,
            sweeps: pick(args.sweeps, &file, "sweeps", d.sweeps)?,
            grid_radii: pick(args.grid_radii, &file, "grid_radii", d.grid_radii)?,
            grid_dirs: pick(args.grid_dirs, &file, "grid_dirs", d.grid_dirs)?,
            seed: pick(args.seed, &file, "seed", d.seed)?,
            format,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol), ("root_tol", self.root_tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive")));
            }
        }
        let counts = [
            ("max_evals", self.max_evals),
            ("restarts", self.restarts),
            ("sweeps", self.sweeps),
            ("grid_radii", self.grid_radii),
            ("grid_dirs", self.grid_dirs),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Usage(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_evals: self.max_evals }
    }

    pub fn budget(&self) -> SearchBudget {
        SearchBudget { restarts: self.restarts, sweeps: self.sweeps, seed: self.seed, ..SearchBudget::default() }
    }
}
