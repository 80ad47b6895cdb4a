//! Command-line experiment runner over `xdp-core`.

pub mod acceptance;
pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde_json::json;
use xdp_core::distance::Method;
use xdp_core::lubinsky::{kernel_asymptotics_report, min_norm};
use xdp_core::mp::{parse_decimal, to_decimal, DEFAULT_PRECISION_BITS};
use xdp_core::Precision;

use crate::config::{ExperimentArgs, ExperimentConfig, Format};
use crate::error::{CliError, Result};
use crate::output::{Output, Table};

#[derive(Debug, Parser)]
#[command(name = "xdp", version, about = "Distance and zero experiments for Dirichlet polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance sweep over the n schedule (CSV).
    Distance {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(long, default_value = "projection")]
        method: Method,
    },
    /// Zeros inside --rect (JSON).
    Zeros(ExperimentArgs),
    /// On-line zero sum up to --height (JSON).
    ConstantC(ExperimentArgs),
    /// Diagonal kernel growth against (1/4 + u^2) ln n (CSV).
    Lubinsky(LubinskyArgs),
    /// Minimum-norm interpolation at the given ordinates (JSON).
    MinNorm(MinNormArgs),
    /// Zeros, C, distances and the verdict they support (JSON).
    Report(ExperimentArgs),
    /// Slope of ln d^2 against ln n on the upper half of the schedule (JSON).
    DecayFit(ExperimentArgs),
    /// Runs a validation suite.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Run a single criterion by number.
        #[arg(long)]
        only: Option<u32>,
    },
    /// Evicts least-recently-used cache files above --max-bytes.
    CacheGc {
        #[arg(long)]
        cache_dir: PathBuf,
        #[arg(long)]
        max_bytes: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Acceptance,
}

#[derive(Debug, Clone, Args)]
pub struct LubinskyArgs {
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub u: String,
    /// Ascending comma-separated orders.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
    pub grid: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct MinNormArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Kernel order; defaults to n_max times the polynomial order.
    #[arg(long)]
    pub order: Option<u64>,
    /// Comma-separated ordinates; defaults to the on-line zeros up to --height.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<String>>,
    /// Also materialize the coefficient vector.
    #[arg(long)]
    pub coeffs: bool,
}

fn precision(bits: u32) -> Result<Precision> {
    Precision::new(bits).map_err(|e| CliError::Config(e.to_string()))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Distance { args, method } => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let rows = experiments::run_distance_sweep(&cfg, method)?;
            emit(&cfg, Output::Table(experiments::distance_table(&rows)))
        }
        Command::Zeros(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let zs = experiments::run_zeros(&cfg)?;
            emit(&cfg, Output::Json(zs.to_json(&cfg.poly)))
        }
        Command::ConstantC(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            emit(&cfg, Output::Json(experiments::run_constant_c(&cfg)?.to_json()))
        }
        Command::Lubinsky(a) => {
            let prec = precision(a.precision)?;
            let u = parse_decimal(&a.u, prec)?;
            let rows = kernel_asymptotics_report(&u, &a.grid, prec)?;
            let mut t = Table::new(vec!["n", "u", "K_n", "ratio"]);
            for row in &rows {
                t.push(vec![row.n.to_string(), to_decimal(&row.u), to_decimal(&row.kernel), to_decimal(&row.ratio)]);
            }
            Output::Table(t).emit(a.format, a.out.as_deref())
        }
        Command::MinNorm(a) => {
            let cfg = ExperimentConfig::resolve(&a.experiment)?;
            let prec = cfg.precision;
            let t: Vec<Float> = match &a.t {
                Some(list) => list.iter().map(|s| parse_decimal(s, prec)).collect::<xdp_core::Result<_>>()?,
                None => experiments::run_constant_c(&cfg)?.ordinates,
            };
            if t.is_empty() {
                return Err(CliError::Config("no ordinates: give --t or a polynomial with on-line zeros".into()));
            }
            let order = a.order.unwrap_or((cfg.n_max() * cfg.poly.order()) as u64);
            let sol = min_norm(order, &t, prec, a.coeffs)?;
            let mut v = sol.to_json();
            if let Some(b) = &sol.coeffs {
                v["coeffs"] =
                    b.iter().map(|c| json!([to_decimal(&c.re), to_decimal(&c.im)])).collect::<Vec<_>>().into();
            }
            emit(&cfg, Output::Json(v))
        }
        Command::Report(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let rep = experiments::run_criterion_report(&cfg)?;
            emit(&cfg, Output::Json(rep.to_json(&cfg.poly)))
        }
        Command::DecayFit(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            emit(&cfg, Output::Json(experiments::run_decay_fit(&cfg)?.to_json()))
        }
        Command::Validate { suite: Suite::Acceptance, only } => {
            let outcomes = match only {
                Some(id) => vec![acceptance::run_one(id)
                    .ok_or_else(|| CliError::Config(format!("no criterion {id}")))?],
                None => acceptance::run_all(),
            };
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(CliError::AcceptanceFailed { failed, total: outcomes.len() });
            }
            Ok(())
        }
        Command::CacheGc { cache_dir, max_bytes } => {
            let evicted = cache::cache_gc(&cache_dir, max_bytes)?;
            println!("{evicted}");
            Ok(())
        }
    }
}

fn emit(cfg: &ExperimentConfig, out: Output) -> Result<()> {
    out.emit(cfg.format, cfg.output.as_deref())
}
