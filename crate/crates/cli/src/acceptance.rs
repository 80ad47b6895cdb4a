//! The ten acceptance criteria, each with its tolerance and runtime budget.
//! A criterion passes only if the numeric check holds within the budget.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use xdp_core::distance::{distance_squared, mellin_identity_residual, GramEntries, GramSystem, Method, StepInner};
use xdp_core::lubinsky::{kernel_asymptotics_report, min_norm, psi_inner};
use xdp_core::mp::{ln_u64, pi};
use xdp_core::par;
use xdp_core::poly::kappa_partial_sums;
use xdp_core::quadrature::GaussLegendre;
use xdp_core::zeros::{constant_c, find_zeros, zeros_on_line, Rectangle, DEFAULT_LINE_TOL, DEFAULT_RESIDUAL_TOL};
use xdp_core::{Complex, DirichletPolynomial, GaussRational, Precision};

pub const SEED: u64 = 0x5eed_0010;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Outcome {
    pub fn line(&self) -> String {
        let budget = self.budget.map(|b| format!(" / {}s", b.as_secs())).unwrap_or_default();
        format!(
            "[{}] {:>2}. {} ({:.2}s{}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            budget,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String), String>;

const CRITERIA: [(u32, &str, Option<u64>, Check); 10] = [
    (1, "exact-zero baseline", Some(10), exact_zero_baseline),
    (2, "one-dimensional closed form", None, one_dimensional),
    (3, "off-line floor", None, off_line_floor),
    (4, "constant C closed form", Some(60), constant_c_closed_form),
    (5, "kernel lower bound", None, kernel_lower_bound),
    (6, "zero counting", Some(30), zero_counting),
    (7, "orthonormality", Some(5), orthonormality),
    (8, "kernel asymptotic trend", Some(10), kernel_trend),
    (9, "decay rate", Some(600), decay_rate),
    (10, "identity suite", None, identity_suite),
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

pub fn run_one(id: u32) -> Option<Outcome> {
    let &(id, title, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let (passed, mut detail) = match result {
        Ok((ok, d)) => (ok && in_time, d),
        Err(e) => (false, format!("error: {e}")),
    };
    if !in_time {
        detail.push_str("; over runtime budget");
    }
    Some(Outcome { id, title, passed, detail, elapsed, budget })
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run_one(c.0)).collect()
}

fn prec() -> Precision {
    Precision::new(256).expect("256 bits is valid")
}

fn one_minus_two() -> DirichletPolynomial {
    DirichletPolynomial::from_integers(&[1, -1]).expect("valid polynomial")
}

fn sci(x: &Float) -> String {
    format!("{:.3e}", x.to_f64())
}

fn exact_zero_baseline() -> Result<(bool, String), String> {
    let p = DirichletPolynomial::one();
    let bound = Float::with_val(256, Float::parse("1e-40").expect("literal"));
    let mut worst = prec().float(0);
    for r in ["-1", "0", "1/2"] {
        let r: Rational = r.parse().expect("literal");
        let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
        let entries = GramEntries::assemble(&inner, 64);
        for n in 1..=64 {
            let sys = GramSystem::from_entries(&p, &r, entries.leading(n)).map_err(|e| e.to_string())?;
            for method in [Method::DetRatio, Method::Projection] {
                let d = sys.distance(method).d_squared.abs();
                if d > worst {
                    worst = d;
                }
            }
        }
    }
    Ok((worst < bound, format!("max d^2 = {} over r in {{-1, 0, 1/2}}, n <= 64", sci(&worst))))
}

/// Adaptive 16-point Gauss–Legendre on a smooth piece.
fn adaptive(f: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64, depth: u32) -> Complex64 {
    let gl = GaussLegendre::sixteen();
    let mid = 0.5 * (lo + hi);
    let whole: Complex64 = gl.mapped(lo, hi).map(|(x, w)| f(x) * w).sum();
    let halves: Complex64 = gl.mapped(lo, mid).chain(gl.mapped(mid, hi)).map(|(x, w)| f(x) * w).sum();
    if (whole - halves).norm() <= 1e-16 * (hi - lo) || depth == 0 {
        halves
    } else {
        adaptive(f, lo, mid, depth - 1) + adaptive(f, mid, hi, depth - 1)
    }
}

/// Double-precision step function `kappa_r(x) = sum_{k <= x} a_k k^{1/2 - r}`.
fn kappa_f64(a: &[f64], r: f64, x: f64) -> f64 {
    a.iter().enumerate().take_while(|(i, _)| (*i as f64) + 1.0 <= x).map(|(i, c)| c * ((i + 1) as f64).powf(0.5 - r)).sum()
}

fn one_dimensional() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let r = Rational::new();
    let d = distance_squared(&p, &r, 1, Method::Projection, prec()).map_err(|e| e.to_string())?;
    let mut expect = prec().float(2).sqrt();
    expect += 2u32;
    expect /= 4u32;
    let err = Float::with_val(256, &d.d_squared - &expect).abs();
    let closed_ok = err < Float::with_val(256, Float::parse("1e-30").expect("literal"));

    // Independent check of the two inner products: integrate the step
    // functions on (0, 1) with the only breakpoint at x = 1/2 handled by panels.
    let a = [1.0, -1.0];
    let rho = |x: f64| Complex64::new(kappa_f64(&a, 0.0, 1.0 / x), 0.0);
    let gram_q = adaptive(&|x| rho(x) * rho(x), 1e-300, 0.5, 40) + adaptive(&|x| rho(x) * rho(x), 0.5, 1.0, 40);
    let moment_q = adaptive(&rho, 1e-300, 0.5, 40) + adaptive(&rho, 0.5, 1.0, 40);
    let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
    let gram_err = (inner.rho(1, 1).to_f64() - gram_q).norm();
    let moment_err = (inner.indicator(1).to_f64() - moment_q).norm();
    let quad_ok = gram_err < 1e-15 && moment_err < 1e-15;
    Ok((
        closed_ok && quad_ok,
        format!(
            "|d^2 - (2+sqrt 2)/4| = {}; quadrature gaps {:.1e} (Gram), {:.1e} (moment)",
            sci(&err),
            gram_err,
            moment_err
        ),
    ))
}

fn off_line_floor() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let r = Rational::from(-1);
    let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
    let entries = GramEntries::assemble(&inner, 128);
    let mut floor = prec().float(8);
    floor /= 9u32;
    floor -= Float::with_val(256, Float::parse("1e-20").expect("literal"));
    let mut min = prec().float(1);
    for n in 1..=128 {
        let d = GramSystem::from_entries(&p, &r, entries.leading(n)).map_err(|e| e.to_string())?.distance(Method::Projection);
        if d.d_squared < min {
            min = d.d_squared;
        }
    }
    Ok((min >= floor, format!("min d^2 over n <= 128 is {:.20} against 8/9", min.to_f64())))
}

fn constant_c_closed_form() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let r = Rational::new();
    // ln 2 coth(ln 2 / 4), from the cotangent partial-fraction expansion.
    let ln2 = ln_u64(2, prec());
    let quarter = Float::with_val(256, &ln2 / 4u32);
    let target = Float::with_val(256, &ln2 * Float::with_val(256, quarter.coth_ref()));
    let mut rows = Vec::new();
    let mut ok = true;
    for height in [1e2, 1e3, 1e4] {
        let c = constant_c(&p, &r, height, DEFAULT_LINE_TOL, prec()).map_err(|e| e.to_string())?;
        let estimate = Float::with_val(256, &c.partial + c.tail_bound / 2.0);
        let gap = Float::with_val(256, &estimate - &target).abs().to_f64();
        ok &= gap <= c.tail_bound;
        rows.push(format!("T={height:e}: gap {gap:.2e} <= {:.2e}", c.tail_bound));
    }
    Ok((ok, format!("target {:.15}; {}", target.to_f64(), rows.join(", "))))
}

fn kernel_lower_bound() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let r = Rational::new();
    let rect = Rectangle::new(-0.25, 0.25, -20.0, 20.0).map_err(|e| e.to_string())?;
    let zs = find_zeros(&p, &rect, DEFAULT_RESIDUAL_TOL, prec()).map_err(|e| e.to_string())?;
    let ordinates: Vec<Float> = zeros_on_line(&zs, 0.0, DEFAULT_LINE_TOL).into_iter().filter(|t| t.to_f64() >= -DEFAULT_LINE_TOL).collect();
    if ordinates.len() != 3 {
        return Ok((false, format!("expected 3 nonnegative ordinates, found {}", ordinates.len())));
    }
    let slack = Float::with_val(256, Float::parse("1e-20").expect("literal"));
    let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
    let entries = GramEntries::assemble(&inner, 128);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for n in (4..=128).step_by(4) {
        let d = GramSystem::from_entries(&p, &r, entries.leading(n)).map_err(|e| e.to_string())?.distance(Method::Projection);
        let bound = min_norm(2 * n as u64, &ordinates, prec(), false).map_err(|e| format!("n={n}: {e}"))?.value;
        let margin = Float::with_val(256, &d.d_squared - &bound);
        ok &= Float::with_val(256, &margin + &slack) >= 0;
        worst = worst.min(margin.to_f64());
    }
    Ok((ok, format!("smallest d^2 - bound over n in 4..=128 step 4 is {worst:.3e}")))
}

fn zero_counting() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let rect = Rectangle::new(-1.0, 1.0, 0.5, 100.5).map_err(|e| e.to_string())?;
    let zs = find_zeros(&p, &rect, DEFAULT_RESIDUAL_TOL, prec()).map_err(|e| e.to_string())?;
    let step = Float::with_val(256, pi(prec()) * 2u32) / ln_u64(2, prec());
    let tol = Float::with_val(256, Float::parse("1e-20").expect("literal"));
    let mut worst = prec().float(0);
    for z in &zs.zeros {
        let k = Float::with_val(256, &z.location.im / &step).round();
        let gap = Complex::new(z.location.re.clone(), Float::with_val(256, &z.location.im - Float::with_val(256, &step * &k))).abs();
        if gap > worst {
            worst = gap;
        }
    }
    let count_ok = zs.zeros.len() == 11 && zs.multiplicity_sum() == 11;
    let square = p.mul(&p);
    let near_origin = Rectangle::new(-0.5, 0.5, -0.5, 0.5).map_err(|e| e.to_string())?;
    let sq = find_zeros(&square, &near_origin, DEFAULT_RESIDUAL_TOL, prec()).map_err(|e| e.to_string())?;
    let mult = sq.zeros.first().map(|z| z.multiplicity);
    let mult_ok = sq.zeros.len() == 1 && mult == Some(2);
    Ok((
        count_ok && worst < tol && mult_ok,
        format!("{} zeros, worst lattice gap {}, multiplicity at 0 of the square {mult:?}", zs.zeros.len(), sci(&worst)),
    ))
}

fn orthonormality() -> Result<(bool, String), String> {
    const N: u64 = 500;
    let rows = par::map_range(1..N as usize + 1, |n| {
        let mut worst = prec().float(0);
        for m in n as u64..=N {
            let mut v = psi_inner(n as u64, m, prec())?;
            if m == n as u64 {
                v -= 1u32;
            }
            let v = v.abs();
            if v > worst {
                worst = v;
            }
        }
        Ok::<_, xdp_core::Error>(worst)
    });
    let mut worst = prec().float(0);
    for w in rows {
        let w = w.map_err(|e| e.to_string())?;
        if w > worst {
            worst = w;
        }
    }
    let log2 = if worst.is_zero() { f64::NEG_INFINITY } else { worst.to_f64().log2() };
    Ok((worst < prec().pow2_neg(230), format!("max deviation 2^{log2:.1} over n, m <= {N}")))
}

fn kernel_trend() -> Result<(bool, String), String> {
    let rows = kernel_asymptotics_report(&prec().float(0), &[10_000, 100_000, 1_000_000], prec()).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.to_f64()).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = ratios[2];
    Ok((
        decreasing && (1.0..=1.6).contains(&last),
        format!("ratios {:.6} / {:.6} / {:.6} at 1e4 / 1e5 / 1e6", ratios[0], ratios[1], ratios[2]),
    ))
}

fn decay_rate() -> Result<(bool, String), String> {
    let p = one_minus_two();
    let r = Rational::from((1, 2));
    let schedule = crate::config::geometric_schedule(256);
    let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
    let entries = GramEntries::assemble(&inner, 256);
    let results = schedule
        .iter()
        .map(|&n| GramSystem::from_entries(&p, &r, entries.leading(n)).map(|s| s.distance(Method::Projection)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let fit = crate::experiments::decay_fit(&results, None, prec());
    let slope = fit.slope.as_ref().map(Float::to_f64).unwrap_or(f64::NEG_INFINITY);
    Ok((
        fit.strictly_decreasing && slope <= -0.2,
        format!("slope {slope:.4}, strictly decreasing: {}", fit.strictly_decreasing),
    ))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from((rng.gen_range(-9i32..=9), rng.gen_range(1u32..=9)))
}

fn random_polynomial(rng: &mut ChaCha8Rng) -> DirichletPolynomial {
    let m = rng.gen_range(1usize..=6);
    let mut coeffs = Vec::with_capacity(m);
    for k in 0..m {
        let mut re = random_rational(rng);
        if k == 0 && re == 0 {
            re = Rational::from(1);
        }
        let im = if rng.gen_bool(0.3) { random_rational(rng) } else { Rational::new() };
        coeffs.push(GaussRational::new(re, im));
    }
    DirichletPolynomial::new(coeffs).expect("a_1 is nonzero")
}

fn identity_suite() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shifts = [Rational::from((1, 2)), Rational::new(), Rational::from((1, 3)), Rational::from((-1, 4))];
    let points = [(0.5, 0.0), (0.5, 1.0), (0.5, 10.0)];
    let mellin_tol = prec().pow2_neg(200);
    let agree_tol = prec().pow2_neg(128);
    let mut worst_mellin = prec().float(0);
    let mut worst_agree = prec().float(0);
    for _ in 0..20 {
        let p = random_polynomial(&mut rng);
        let r = shifts[rng.gen_range(0..shifts.len())].clone();
        let n = rng.gen_range(1usize..=8);
        let b: Vec<Complex> = (0..n)
            .map(|_| Complex::from_rationals(prec(), &random_rational(&mut rng), &random_rational(&mut rng)))
            .collect();
        for &(re, im) in &points {
            let s = Complex::from_f64(prec(), re, im);
            let res = mellin_identity_residual(&p, &r, &b, &s).map_err(|e| format!("{p}: {e}"))?;
            if res > worst_mellin {
                worst_mellin = res;
            }
        }
        let sys = GramSystem::build(&p, &r, n, prec()).map_err(|e| format!("{p}: {e}"))?;
        let a = sys.distance(Method::DetRatio).d_squared;
        let c = sys.distance(Method::Projection).d_squared;
        let scale = if a.clone().abs() > c.clone().abs() { a.clone().abs() } else { c.clone().abs() };
        let gap = Float::with_val(256, &a - &c).abs();
        let rel = if scale.is_zero() { gap } else { gap / scale };
        if rel > worst_agree {
            worst_agree = rel;
        }
    }
    Ok((
        worst_mellin < mellin_tol && worst_agree <= agree_tol,
        format!("worst Mellin residual {}, worst relative method gap {}", sci(&worst_mellin), sci(&worst_agree)),
    ))
}
