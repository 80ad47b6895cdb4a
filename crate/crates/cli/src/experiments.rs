//! Distance sweeps, zero reports, decay fits and the criterion report.

use std::fmt;

use rug::{Float, Rational};
use serde_json::{json, Value};
use xdp_core::distance::{DistanceResult, GramEntries, GramSystem, Method, StepInner};
use xdp_core::lubinsky::min_norm;
use xdp_core::mp::{ln_u64, to_decimal};
use xdp_core::poly::{kappa_partial_sums, strip_bounds, StripBounds};
use xdp_core::zeros::{constant_c, find_zeros, ConstantC, ZeroSet, DEFAULT_LINE_TOL, DEFAULT_RESIDUAL_TOL};
use xdp_core::{DirichletPolynomial, Error, Precision};

use crate::cache::GramCache;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::Table;

/// Real parts closer to `r` than this do not count as off-line.
pub const OFF_LINE_MARGIN: f64 = 1e-9;

/// Entries for the largest `n` in the schedule, through the cache if configured.
fn entries_for(cfg: &ExperimentConfig) -> Result<GramEntries> {
    let n = cfg.n_max();
    match &cfg.cache_dir {
        Some(dir) => Ok(GramCache::open(dir)?.entries(&cfg.poly, &cfg.r, n, cfg.precision)?.0),
        None => {
            let inner = StepInner::new(kappa_partial_sums(&cfg.poly, &cfg.r, cfg.precision));
            Ok(GramEntries::assemble(&inner, n))
        }
    }
}

/// One distance per schedule entry, each from the leading block of a single assembly.
pub fn run_distance_sweep(cfg: &ExperimentConfig, method: Method) -> Result<Vec<DistanceResult>> {
    let entries = entries_for(cfg)?;
    cfg.n_schedule
        .iter()
        .map(|&n| Ok(GramSystem::from_entries(&cfg.poly, &cfg.r, entries.leading(n))?.distance(method)))
        .collect()
}

pub fn distance_table(results: &[DistanceResult]) -> Table {
    let mut t = Table::new(vec!["n", "d_squared", "d_squared_times_log_n", "precision_bits", "min_pivot"]);
    for d in results {
        let p = d.d_squared.prec();
        let mut scaled = ln_u64(d.n as u64, Precision::new(p).expect("result precision is valid"));
        scaled *= &d.d_squared;
        t.push(vec![
            d.n.to_string(),
            to_decimal(&d.d_squared),
            to_decimal(&scaled),
            d.precision_bits.to_string(),
            d.min_pivot.as_ref().map(to_decimal).unwrap_or_default(),
        ]);
    }
    t
}

pub fn run_zeros(cfg: &ExperimentConfig) -> Result<ZeroSet> {
    Ok(find_zeros(&cfg.poly, &cfg.require_rect()?, DEFAULT_RESIDUAL_TOL, cfg.precision)?)
}

pub fn run_constant_c(cfg: &ExperimentConfig) -> Result<ConstantC> {
    Ok(constant_c(&cfg.poly, &cfg.r, cfg.require_height()?, DEFAULT_LINE_TOL, cfg.precision)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// `None` when some `d^2` in the fitted range is exactly zero (slope `-inf`).
    pub slope: Option<Float>,
    pub intercept: Option<Float>,
    /// Root-mean-square residual of the fit in `ln d^2`.
    pub residual: Option<Float>,
    pub strictly_decreasing: bool,
    pub points: Vec<(usize, Float)>,
    /// `r - beta`: how far the line sits right of every zero.
    pub margin: Option<Float>,
}

impl DecayFit {
    pub fn to_json(&self) -> Value {
        let opt = |x: &Option<Float>, missing: &str| x.as_ref().map(to_decimal).unwrap_or_else(|| missing.to_string());
        json!({
            "slope": opt(&self.slope, "-inf"),
            "intercept": opt(&self.intercept, "nan"),
            "residual": opt(&self.residual, "nan"),
            "strictly_decreasing": self.strictly_decreasing,
            "margin": opt(&self.margin, "inf"),
            "points": self.points.iter().map(|(n, d)| json!({"n": n, "d_squared": to_decimal(d)})).collect::<Vec<_>>(),
        })
    }
}

/// Least-squares slope of `ln d^2` against `ln n` over the upper half of the schedule.
pub fn decay_fit(results: &[DistanceResult], margin: Option<Float>, prec: Precision) -> DecayFit {
    let upper = &results[results.len() / 2..];
    let points: Vec<(usize, Float)> = upper.iter().map(|d| (d.n, d.d_squared.clone())).collect();
    let strictly_decreasing = results.windows(2).all(|w| w[1].d_squared < w[0].d_squared);
    let degenerate = points.iter().any(|(_, d)| d.is_zero()) || points.len() < 2;
    if degenerate {
        return DecayFit { slope: None, intercept: None, residual: None, strictly_decreasing, points, margin };
    }
    let bits = prec.bits();
    let xs: Vec<Float> = points.iter().map(|(n, _)| ln_u64(*n as u64, prec)).collect();
    let ys: Vec<Float> = points.iter().map(|(_, d)| Float::with_val(bits, d.ln_ref())).collect();
    let count = prec.float(points.len() as u32);
    let mean = |v: &[Float]| v.iter().fold(prec.float(0), |a, b| a + b) / &count;
    let (mx, my) = (mean(&xs), mean(&ys));
    let mut sxy = prec.float(0);
    let mut sxx = prec.float(0);
    for (x, y) in xs.iter().zip(&ys) {
        let dx = Float::with_val(bits, x - &mx);
        sxy += Float::with_val(bits, &dx * &Float::with_val(bits, y - &my));
        sxx += Float::with_val(bits, dx.square_ref());
    }
    let slope = sxy / &sxx;
    let intercept = Float::with_val(bits, &my - Float::with_val(bits, &slope * &mx));
    let mut ss = prec.float(0);
    for (x, y) in xs.iter().zip(&ys) {
        let fit = Float::with_val(bits, &intercept + Float::with_val(bits, &slope * x));
        ss += Float::with_val(bits, Float::with_val(bits, y - &fit).square_ref());
    }
    let residual = (ss / &count).sqrt();
    DecayFit { slope: Some(slope), intercept: Some(intercept), residual: Some(residual), strictly_decreasing, points, margin }
}

pub fn zero_free_margin(p: &DirichletPolynomial, r: &Rational, prec: Precision) -> Option<Float> {
    match strip_bounds(p, prec) {
        StripBounds::NoZeros => None,
        StripBounds::Strip { beta, .. } => Some(prec.float(r) - beta),
    }
}

pub fn run_decay_fit(cfg: &ExperimentConfig) -> Result<DecayFit> {
    let results = run_distance_sweep(cfg, Method::Projection)?;
    Ok(decay_fit(&results, zero_free_margin(&cfg.poly, &cfg.r, cfg.precision), cfg.precision))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentZeroFree,
    ConsistentZerosPresent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentZeroFree => "consistent-zero-free",
            Verdict::ConsistentZerosPresent => "consistent-zeros-present",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// The strongest lower bound `2 delta / |rho - r + 1/2|^2` over located zeros right of the line.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorEvidence {
    pub zero: (Float, Float),
    pub delta: Float,
    pub floor: Float,
    pub min_d_squared: Float,
    pub observed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Satisfied,
    Violated,
    /// The kernel matrix is singular at this order; no bound is available.
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub n: usize,
    pub kernel_order: u64,
    pub bound: Option<Float>,
    pub status: BoundStatus,
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub strip: StripBounds,
    pub zeros: ZeroSet,
    pub constant: ConstantC,
    pub distances: Vec<DistanceResult>,
    pub monotone_decay: bool,
    pub floor: Option<FloorEvidence>,
    pub lower_bounds: Vec<LowerBoundRow>,
    pub verdict: Verdict,
}

impl CriterionReport {
    pub fn lower_bounds_hold(&self) -> bool {
        self.lower_bounds.iter().all(|row| row.status != BoundStatus::Violated)
    }

    pub fn to_json(&self, poly: &DirichletPolynomial) -> Value {
        let strip = match &self.strip {
            StripBounds::NoZeros => json!("no-zeros"),
            StripBounds::Strip { alpha, beta } => json!({"alpha": to_decimal(alpha), "beta": to_decimal(beta)}),
        };
        let floor = self.floor.as_ref().map(|f| {
            json!({
                "zero": {"re": to_decimal(&f.zero.0), "im": to_decimal(&f.zero.1)},
                "delta": to_decimal(&f.delta),
                "floor": to_decimal(&f.floor),
                "min_d_squared": to_decimal(&f.min_d_squared),
                "observed": f.observed,
            })
        });
        let bounds: Vec<Value> = self
            .lower_bounds
            .iter()
            .map(|row| {
                json!({
                    "n": row.n,
                    "kernel_order": row.kernel_order,
                    "bound": row.bound.as_ref().map(to_decimal),
                    "status": match row.status {
                        BoundStatus::Satisfied => "satisfied",
                        BoundStatus::Violated => "violated",
                        BoundStatus::Singular => "singular",
                    },
                })
            })
            .collect();
        json!({
            "poly": poly.to_string(),
            "r": self.constant.r.to_string(),
            "strip": strip,
            "zeros": self.zeros.to_json(poly),
            "C": self.constant.to_json(),
            "distances": distance_table(&self.distances).to_json(),
            "evidence": {
                "monotone_decay": self.monotone_decay,
                "off_line_floor": floor,
                "lower_bound_rows": bounds,
                "lower_bounds_hold": self.lower_bounds_hold(),
            },
            "verdict": self.verdict.to_string(),
        })
    }
}

pub fn run_criterion_report(cfg: &ExperimentConfig) -> Result<CriterionReport> {
    let prec = cfg.precision;
    let strip = strip_bounds(&cfg.poly, prec);
    let zeros = run_zeros(cfg)?;
    let constant = run_constant_c(cfg)?;
    let distances = run_distance_sweep(cfg, Method::Projection)?;
    let slack = prec.half_eps();

    let monotone_decay = distances
        .windows(2)
        .all(|w| w[1].d_squared <= Float::with_val(prec.bits(), &w[0].d_squared + &slack))
        && match (distances.first(), distances.last()) {
            (Some(a), Some(b)) => b.d_squared < a.d_squared || b.d_squared.is_zero(),
            _ => false,
        };

    let min_d = distances.iter().map(|d| d.d_squared.clone()).fold(prec.float(1), |a, b| if b < a { b } else { a });
    let r = prec.float(&cfg.r);
    let mut floor: Option<FloorEvidence> = None;
    for z in &zeros.zeros {
        let delta = Float::with_val(prec.bits(), &z.location.re - &r);
        if delta.to_f64() <= OFF_LINE_MARGIN {
            continue;
        }
        let mut denom = Float::with_val(prec.bits(), &delta + 0.5f64);
        denom.square_mut();
        denom += Float::with_val(prec.bits(), z.location.im.square_ref());
        let value = Float::with_val(prec.bits(), &delta * 2u32) / &denom;
        if floor.as_ref().is_none_or(|f| value > f.floor) {
            let observed = min_d >= Float::with_val(prec.bits(), &value - &slack);
            floor = Some(FloorEvidence {
                zero: (z.location.re.clone(), z.location.im.clone()),
                delta,
                floor: value,
                min_d_squared: min_d.clone(),
                observed,
            });
        }
    }

    let lower_bounds = kernel_bound_rows(cfg, &constant, &distances)?;
    let holds = lower_bounds.iter().all(|row| row.status != BoundStatus::Violated);
    let verdict = match &floor {
        Some(f) if f.observed => Verdict::ConsistentZerosPresent,
        Some(_) => Verdict::Inconclusive,
        None if monotone_decay && holds => Verdict::ConsistentZeroFree,
        None => Verdict::Inconclusive,
    };
    Ok(CriterionReport { strip, zeros, constant, distances, monotone_decay, floor, lower_bounds, verdict })
}

/// `d^2_n >= 1* H^{-1} 1` with `H` the kernel matrix of order `n m` at the
/// on-line ordinates; empty when no zero lies on the line.
fn kernel_bound_rows(cfg: &ExperimentConfig, c: &ConstantC, distances: &[DistanceResult]) -> Result<Vec<LowerBoundRow>> {
    if c.ordinates.is_empty() {
        return Ok(Vec::new());
    }
    let prec = cfg.precision;
    let m = cfg.poly.order() as u64;
    distances
        .iter()
        .map(|d| {
            let order = d.n as u64 * m;
            match min_norm(order, &c.ordinates, prec, false) {
                Ok(sol) => {
                    let ok = d.d_squared >= Float::with_val(prec.bits(), &sol.value - &prec.half_eps());
                    let status = if ok { BoundStatus::Satisfied } else { BoundStatus::Violated };
                    Ok(LowerBoundRow { n: d.n, kernel_order: order, bound: Some(sol.value), status })
                }
                Err(Error::NSingular { .. }) => {
                    Ok(LowerBoundRow { n: d.n, kernel_order: order, bound: None, status: BoundStatus::Singular })
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}
