//! Run configuration: defaults, an optional `key = value` file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ccst::cst::Tolerances;
use clap::{Args, ValueEnum};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("expected json or csv, got {other:?}")),
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Sphere dimension (the algebra has m + 1 generators) [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<usize>,
    /// Heat time, must be positive [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Band limit: highest harmonic degree kept [default: 6]
    #[arg(long = "K", id = "K")]
    pub band_limit: Option<usize>,
    /// Quadrature exactness degree [default: 2K + 4]
    #[arg(long)]
    pub degree: Option<usize>,
    /// Seed for random trial inputs [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random trials [default: 20]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Isometry tolerance [default: 1e-6]
    #[arg(long = "tol-iso", allow_negative_numbers = true)]
    pub tol_iso: Option<f64>,
    /// Residual tolerance [default: 1e-8]
    #[arg(long = "tol-res", allow_negative_numbers = true)]
    pub tol_res: Option<f64>,
    /// Output file, written atomically [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Config file of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    pub t: f64,
    pub band_limit: usize,
    pub degree: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 2,
            t: 1.0,
            band_limit: 6,
            degree: None,
            seed: 0,
            trials: 20,
            tolerances: Tolerances::default(),
            out: None,
            format: None,
        }
    }
}

fn parse_value<V: FromStr>(key: &str, raw: &str) -> Result<V, Failure>
where
    V::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| Failure::Usage(format!("invalid value {raw:?} for `{key}`: {e}")))
}

impl RunConfig {
    /// Applies one `key = value` pair. Keys use the flag names with `_` or `-`.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), Failure> {
        let tol = &mut self.tolerances;
        match key.replace('-', "_").as_str() {
            "m" => self.m = parse_value(key, raw)?,
            "t" => self.t = parse_value(key, raw)?,
            "K" | "band_limit" => self.band_limit = parse_value(key, raw)?,
            "degree" => self.degree = Some(parse_value(key, raw)?),
            "seed" => self.seed = parse_value(key, raw)?,
            "trials" => self.trials = parse_value(key, raw)?,
            "tol_iso" => tol.isometry = parse_value(key, raw)?,
            "tol_res" => tol.residual = parse_value(key, raw)?,
            "tol_dirac" => tol.dirac = parse_value(key, raw)?,
            "tol_roundtrip" => tol.roundtrip = parse_value(key, raw)?,
            "out" => self.out = Some(PathBuf::from(raw)),
            "format" => self.format = Some(parse_value(key, raw)?),
            _ => return Err(Failure::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_file_text(&mut self, text: &str, origin: &Path) -> Result<(), Failure> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Usage(format!("{}:{}: expected `key = value`", origin.display(), n + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Failure::Usage(format!("{}:{}: {e}", origin.display(), n + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_file_text(&text, path)?;
        }
        if let Some(v) = args.m {
            cfg.m = v;
        }
        if let Some(v) = args.t {
            cfg.t = v;
        }
        if let Some(v) = args.band_limit {
            cfg.band_limit = v;
        }
        if args.degree.is_some() {
            cfg.degree = args.degree;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.trials {
            cfg.trials = v;
        }
        if let Some(v) = args.tol_iso {
            cfg.tolerances.isometry = v;
        }
        if let Some(v) = args.tol_res {
            cfg.tolerances.residual = v;
        }
        if args.out.is_some() {
            cfg.out = args.out.clone();
        }
        if args.format.is_some() {
            cfg.format = args.format;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.m == 0 || self.m > ccst::sphere::MAX_SPHERE_DIM {
            return Err(Failure::Usage(format!(
                "invalid `m`: must be between 1 and {}, got {}",
                ccst::sphere::MAX_SPHERE_DIM,
                self.m
            )));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Failure::Usage(format!("invalid `t`: must be positive and finite, got {}", self.t)));
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("tol-iso", tol.isometry),
            ("tol-res", tol.residual),
            ("tol-dirac", tol.dirac),
            ("tol-roundtrip", tol.roundtrip),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Failure::Usage(format!("invalid `{name}`: must be positive, got {v}")));
            }
        }
        if self.trials == 0 {
            return Err(Failure::Usage("invalid `trials`: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn quadrature_degree(&self) -> usize {
        self.degree.unwrap_or(2 * self.band_limit + 4)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
