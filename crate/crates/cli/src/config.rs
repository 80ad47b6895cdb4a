//! Experiment configuration: an optional JSON file, overridden field by field
//! by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rug::Rational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use xdp_core::exact::parse_rational;
use xdp_core::zeros::Rectangle;
use xdp_core::{DirichletPolynomial, Precision};

use crate::error::{CliError, Result};

/// Largest `n` of the default geometric schedule.
pub const DEFAULT_N_MAX: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// On-disk form; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Text form `"1:1,2:-1"` or `{"coeffs": [[k, re, im], ...]}`.
    pub poly: Option<Value>,
    /// Rational literal as a string (`"1/2"`) or a JSON number.
    pub r: Option<Value>,
    pub n_max: Option<usize>,
    pub n_schedule: Option<Vec<usize>>,
    pub precision_bits: Option<u32>,
    pub rect: Option<[f64; 4]>,
    #[serde(rename = "T", alias = "height")]
    pub height: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by every experiment subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON config file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Polynomial, e.g. "1:1,2:-1" for 1 - 2^{-s}.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Shift r as a rational or decimal literal.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Geometric schedule 1, 2, 4, ... up to this n.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Explicit comma-separated schedule.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    /// Mantissa bits.
    #[arg(long)]
    pub precision: Option<u32>,
    /// sigma_lo,sigma_hi,t_lo,t_hi
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rect: Option<Vec<f64>>,
    /// Height T for the on-line zero sum.
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub poly: DirichletPolynomial,
    pub r: Rational,
    pub n_schedule: Vec<usize>,
    pub precision: Precision,
    pub rect: Option<Rectangle>,
    pub height: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn resolve(args: &ExperimentArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Self::merge(file, args)
    }

    pub fn merge(file: ConfigFile, args: &ExperimentArgs) -> Result<Self> {
        let poly = match (&args.poly, &file.poly) {
            (Some(text), _) => text.parse()?,
            (None, Some(Value::String(text))) => text.parse()?,
            (None, Some(v)) => DirichletPolynomial::from_json_value(v)?,
            (None, None) => return Err(CliError::Config("no polynomial given (--poly or \"poly\")".into())),
        };
        let r = match (&args.r, &file.r) {
            (Some(text), _) => parse_rational(text)?,
            (None, Some(Value::String(text))) => parse_rational(text)?,
            (None, Some(Value::Number(x))) => parse_rational(&x.to_string())?,
            (None, Some(other)) => return Err(CliError::Config(format!("r must be a string or number, got {other}"))),
            (None, None) => Rational::new(),
        };
        let n_schedule = match (&args.schedule, args.n_max, file.n_schedule, file.n_max) {
            (Some(s), _, _, _) => s.clone(),
            (None, Some(n), _, _) => geometric_schedule(n),
            (None, None, Some(s), _) => s,
            (None, None, None, n) => geometric_schedule(n.unwrap_or(DEFAULT_N_MAX)),
        };
        if n_schedule.is_empty() || n_schedule[0] == 0 || n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!("n schedule must be strictly increasing from n >= 1, got {n_schedule:?}")));
        }
        let bits = args.precision.or(file.precision_bits).unwrap_or(xdp_core::mp::DEFAULT_PRECISION_BITS);
        let precision = Precision::new(bits).map_err(|e| CliError::Config(e.to_string()))?;
        let rect = match (&args.rect, file.rect) {
            (Some(v), _) => match v[..] {
                [a, b, c, d] => Some(Rectangle::new(a, b, c, d)?),
                _ => return Err(CliError::Config(format!("--rect takes 4 values, got {}", v.len()))),
            },
            (None, Some([a, b, c, d])) => Some(Rectangle::new(a, b, c, d)?),
            (None, None) => None,
        };
        Ok(ExperimentConfig {
            poly,
            r,
            n_schedule,
            precision,
            rect,
            height: args.height.or(file.height),
            output: args.out.clone().or(file.output),
            format: args.format.or(file.format),
            cache_dir: args.cache_dir.clone().or(file.cache_dir),
        })
    }

    pub fn n_max(&self) -> usize {
        *self.n_schedule.last().expect("schedule is nonempty")
    }

    pub fn require_rect(&self) -> Result<Rectangle> {
        self.rect.ok_or_else(|| CliError::Config("this command needs --rect".into()))
    }

    pub fn require_height(&self) -> Result<f64> {
        self.height.ok_or_else(|| CliError::Config("this command needs --height".into()))
    }
}

/// `1, 2, 4, ...` below `n_max`, then `n_max` itself.
pub fn geometric_schedule(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 1;
    while n < n_max {
        out.push(n);
        n *= 2;
    }
    out.push(n_max.max(1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> ExperimentArgs {
        ExperimentArgs { poly: Some("1:1,2:-1".into()), ..Default::default() }
    }

    #[test]
    fn defaults_and_schedule() {
        let c = ExperimentConfig::merge(ConfigFile::default(), &args()).unwrap();
        assert_eq!(c.n_schedule, vec![1, 2, 4, 8, 16, 32, 64, 128, 256]);
        assert_eq!(c.precision.bits(), 256);
        assert_eq!(c.r, 0);
        assert_eq!(geometric_schedule(5), vec![1, 2, 4, 5]);
        assert_eq!(geometric_schedule(1), vec![1]);
    }

    #[test]
    fn flags_override_file() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"poly": {"coeffs": [[1, "1", "0"], [3, "2", "0"]]}, "r": 0.5, "n_schedule": [1, 3], "precision_bits": 128, "T": 30}"#,
        )
        .unwrap();
        let from_file = ExperimentConfig::merge(file.clone(), &ExperimentArgs::default()).unwrap();
        assert_eq!(from_file.poly.to_string(), "1:1,3:2");
        assert_eq!(from_file.r, Rational::from((1, 2)));
        assert_eq!(from_file.n_schedule, vec![1, 3]);
        assert_eq!(from_file.height, Some(30.0));
        let mut a = args();
        a.r = Some("-1".into());
        a.precision = Some(192);
        let merged = ExperimentConfig::merge(file, &a).unwrap();
        assert_eq!(merged.poly.to_string(), "1:1,2:-1");
        assert_eq!(merged.r, -1);
        assert_eq!(merged.precision.bits(), 192);
        assert_eq!(merged.n_schedule, vec![1, 3]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut a = args();
        a.schedule = Some(vec![1, 4, 4]);
        assert!(ExperimentConfig::merge(ConfigFile::default(), &a).is_err());
        let mut a = args();
        a.precision = Some(32);
        assert!(ExperimentConfig::merge(ConfigFile::default(), &a).is_err());
        assert!(ExperimentConfig::merge(ConfigFile::default(), &ExperimentArgs::default()).is_err());
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }
}
