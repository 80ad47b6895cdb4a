//! Zero counting and localization for Dirichlet polynomials in rectangles.
//!
//! Cells are split until each holds no zero, one zero that double-precision
//! Newton can reach, or a tight cluster. Every candidate is then refined at
//! full precision and its multiplicity read off a small circle.

mod constant;
mod contour;

use std::fmt;

use num_complex::Complex64;
use rug::Float;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mp::{pi, to_decimal, Complex, Precision};
use crate::par;
use crate::poly::{DirichletPolynomial, Evaluator, F64Evaluator};
use contour::{Contour, ContourFailure};

pub use constant::{constant_c, ConstantC, DENSITY_MARGIN};

/// Default on-line classification tolerance.
pub const DEFAULT_LINE_TOL: f64 = 1e-9;
/// Default residual target for refined zeros.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-30;
/// Radius of the multiplicity circle.
pub const MULTIPLICITY_RADIUS: f64 = 1e-6;
/// Cells with two or more zeros narrower than this are treated as one cluster.
pub const CLUSTER_DIAMETER: f64 = 1e-5;
/// Ordinates closer than this are the same zero.
pub const ORDINATE_SPACING: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 200;

/// Axis-aligned region `[sigma_lo, sigma_hi] x [t_lo, t_hi]` of the s-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Rectangle {
    pub fn new(sigma_lo: f64, sigma_hi: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        let finite = [sigma_lo, sigma_hi, t_lo, t_hi].iter().all(|x| x.is_finite());
        if !finite || sigma_lo >= sigma_hi || t_lo >= t_hi {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{sigma_lo}, {sigma_hi}] x [{t_lo}, {t_hi}]"
            )));
        }
        Ok(Rectangle { sigma_lo, sigma_hi, t_lo, t_hi })
    }

    pub fn width(&self) -> f64 {
        self.sigma_hi - self.sigma_lo
    }

    pub fn height(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.sigma_lo + self.sigma_hi), 0.5 * (self.t_lo + self.t_hi))
    }

    /// Counterclockwise from the lower-left corner.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.sigma_lo, self.t_lo),
            Complex64::new(self.sigma_hi, self.t_lo),
            Complex64::new(self.sigma_hi, self.t_hi),
            Complex64::new(self.sigma_lo, self.t_hi),
        ]
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.sigma_lo - slack
            && z.re <= self.sigma_hi + slack
            && z.im >= self.t_lo - slack
            && z.im <= self.t_hi + slack
    }

    pub fn expanded(&self, by: f64) -> Rectangle {
        Rectangle {
            sigma_lo: self.sigma_lo - by,
            sigma_hi: self.sigma_hi + by,
            t_lo: self.t_lo - by,
            t_hi: self.t_hi + by,
        }
    }

    /// Splits at `sigma_lo + ratio * width` into left and right halves.
    fn split_sigma(&self, ratio: f64) -> [Rectangle; 2] {
        let cut = self.sigma_lo + ratio * self.width();
        [Rectangle { sigma_hi: cut, ..*self }, Rectangle { sigma_lo: cut, ..*self }]
    }

    fn split_t(&self, ratio: f64) -> [Rectangle; 2] {
        let cut = self.t_lo + ratio * self.height();
        [Rectangle { t_hi: cut, ..*self }, Rectangle { t_lo: cut, ..*self }]
    }

    /// Long-side bisection for elongated cells, quadrisection otherwise.
    fn subdivide(&self, ratio: f64) -> Vec<Rectangle> {
        let (w, h) = (self.width(), self.height());
        if h > 2.0 * w {
            self.split_t(ratio).to_vec()
        } else if w > 2.0 * h {
            self.split_sigma(ratio).to_vec()
        } else {
            self.split_sigma(ratio).iter().flat_map(|c| c.split_t(ratio)).collect()
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi]
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi)
    }
}

/// One located zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Zero {
    pub location: Complex,
    pub multiplicity: u32,
    /// `|P(location)|` after refinement.
    pub residual: Float,
    /// Multiplicity read off the small circle, when it disagreed with the cell count.
    pub circle_count: Option<i64>,
}

/// Zeros of `P` inside a certified rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    /// The rectangle whose contour was certified (possibly perturbed outward).
    pub rectangle: Rectangle,
    pub total_count: u32,
    /// Largest `|P|` over reported zeros.
    pub residual: Float,
}

impl ZeroSet {
    pub fn multiplicity_sum(&self) -> u32 {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    pub fn to_json(&self, poly: &DirichletPolynomial) -> Value {
        json!({
            "poly": poly.to_string(),
            "rect": self.rectangle.to_array(),
            "zeros": self.zeros.iter().map(|z| json!({
                "re": to_decimal(&z.location.re),
                "im": to_decimal(&z.location.im),
                "mult": z.multiplicity,
                "residual": to_decimal(&z.residual),
            })).collect::<Vec<_>>(),
            "count": self.total_count,
        })
    }
}

/// `(1/2 pi i) oint P'/P` over the boundary of `rect`.
pub fn winding_count(p: &DirichletPolynomial, rect: &Rectangle) -> Result<u32> {
    if p.order() == 1 {
        return Ok(0);
    }
    let ev = p.f64_evaluator();
    Contour::new(&ev).count_perturbed(rect).map(|(_, n)| n)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    approx: Complex64,
    cell: Rectangle,
    count: u32,
}

const CUT_RATIOS: [f64; 7] = [0.5, 0.53, 0.47, 0.56, 0.44, 0.59, 0.41];

/// Locates every zero in `rect`, refined to `|P| <= tol` at precision `prec`.
pub fn find_zeros(p: &DirichletPolynomial, rect: &Rectangle, tol: f64, prec: Precision) -> Result<ZeroSet> {
    let empty = |rectangle: Rectangle| ZeroSet { zeros: vec![], rectangle, total_count: 0, residual: prec.float(0) };
    if p.order() == 1 {
        return Ok(empty(*rect));
    }
    let ev = p.f64_evaluator();
    let contour = Contour::new(&ev);
    let (used, total) = contour.count_perturbed(rect)?;
    if total == 0 {
        return Ok(empty(used));
    }
    let candidates = isolate(&contour, used, total, 0)?;
    let mp = p.evaluator(prec);
    let mut zeros = par::map_slice(&candidates, |c| refine(&contour, &mp, c, tol)).into_iter().collect::<Result<Vec<_>>>()?;
    zeros.sort_by(|a, b| {
        a.location.im.partial_cmp(&b.location.im).unwrap().then(a.location.re.partial_cmp(&b.location.re).unwrap())
    });
    let residual = zeros.iter().map(|z| z.residual.clone()).fold(prec.float(0), |a, b| if b > a { b } else { a });
    Ok(ZeroSet { zeros, rectangle: used, total_count: total, residual })
}

fn isolate(contour: &Contour<'_>, cell: Rectangle, count: u32, depth: u32) -> Result<Vec<Candidate>> {
    if count == 0 {
        return Ok(vec![]);
    }
    if count == 1 {
        if let Some(z) = newton_f64(contour.evaluator(), cell.center(), 1.0) {
            if cell.contains(z, 0.0) {
                return Ok(vec![Candidate { approx: z, cell, count }]);
            }
        }
    } else if cell.diameter() < CLUSTER_DIAMETER {
        return Ok(vec![cluster(contour, cell, count)]);
    }
    if depth > 200 || cell.diameter() < 1e-13 {
        return Err(Error::NonConvergent { near: format!("{}", cell.center()) });
    }
    let children = match split_counted(contour, &cell, count) {
        // Every cut line passes within rounding reach of a multiple zero.
        Err(Error::ContourTooClose { .. }) if count >= 2 && cell.diameter() < 10.0 * CLUSTER_DIAMETER => {
            return Ok(vec![cluster(contour, cell, count)]);
        }
        other => other?,
    };
    let found = par::map_slice(&children, |(c, n)| isolate(contour, *c, *n, depth + 1));
    let mut out = Vec::new();
    for f in found {
        out.extend(f?);
    }
    Ok(out)
}

fn cluster(contour: &Contour<'_>, cell: Rectangle, count: u32) -> Candidate {
    let z = newton_f64(contour.evaluator(), cell.center(), count as f64)
        .filter(|z| cell.contains(*z, cell.diameter()))
        .unwrap_or(cell.center());
    Candidate { approx: z, cell, count }
}

/// Children with their counts; cut lines move off zeros until the counts add up.
fn split_counted(contour: &Contour<'_>, cell: &Rectangle, count: u32) -> Result<Vec<(Rectangle, u32)>> {
    let mut last_err = Error::ContourTooClose { attempts: CUT_RATIOS.len() as u32 };
    for ratio in CUT_RATIOS {
        let children = cell.subdivide(ratio);
        let counts: std::result::Result<Vec<u32>, ContourFailure> = children.iter().map(|c| contour.count(c)).collect();
        match counts {
            Ok(ns) if ns.iter().sum::<u32>() == count => {
                return Ok(children.into_iter().zip(ns).filter(|(_, n)| *n > 0).collect());
            }
            Ok(_) => {
                last_err = Error::QuadratureNotConverged(format!("child counts do not add up in {cell}"));
            }
            Err(ContourFailure::TooClose) => {}
            Err(f) => last_err = f.into(),
        }
    }
    Err(last_err)
}

/// Double-precision Newton with step `c P/P'`.
fn newton_f64(ev: &F64Evaluator, start: Complex64, c: f64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..60 {
        let (v, d) = ev.eval_with_derivative(z);
        if d.norm() == 0.0 {
            return None;
        }
        let step = v / d * c;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

/// Full-precision Newton until `|P| <= tol`, then up to three more steps
/// keeping the smallest residual.
fn newton_mp(ev: &Evaluator, start: &Complex, c: u32, tol: &Float, cell: &Rectangle) -> Option<(Complex, Float)> {
    let slack = cell.diameter().max(1e-12);
    let mut z = start.clone();
    let mut best: Option<(Complex, Float)> = None;
    let mut extra = 0;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let (v, d) = ev.eval_with_derivative(&z);
        let res = v.abs();
        if best.as_ref().is_none_or(|(_, b)| res < *b) {
            best = Some((z.clone(), res.clone()));
        }
        if res <= *tol {
            extra += 1;
            if extra > 3 {
                break;
            }
        }
        if d.is_zero() {
            break;
        }
        let mut step = &v / &d;
        if c > 1 {
            step.scale_assign(&Float::with_val(z.prec(), c));
        }
        z -= &step;
        if !cell.contains(z.to_f64(), slack) {
            return None;
        }
    }
    best.filter(|(_, r)| *r <= *tol)
}

fn refine(contour: &Contour<'_>, ev: &Evaluator, cand: &Candidate, tol: f64) -> Result<Zero> {
    let prec = ev.precision();
    let tol_f = prec.float(tol);
    let start = Complex::from_f64(prec, cand.approx.re, cand.approx.im);
    let (location, residual) = match newton_mp(ev, &start, cand.count, &tol_f, &cand.cell) {
        Some(found) => found,
        None => {
            let narrowed = bisect_to(contour, cand.cell, cand.count);
            let c = narrowed.center();
            let start = Complex::from_f64(prec, c.re, c.im);
            newton_mp(ev, &start, cand.count, &tol_f, &narrowed)
                .ok_or_else(|| Error::NonConvergent { near: format!("{c}") })?
        }
    };
    let circle = circle_count(ev, &location, MULTIPLICITY_RADIUS);
    let multiplicity = cand.count;
    let circle_count = (circle != multiplicity as i64).then_some(circle);
    Ok(Zero { location, multiplicity, residual, circle_count })
}

/// Narrows a cell by quadrisection, following the child that keeps all
/// `count` zeros, until it is about `1e-12` wide.
fn bisect_to(contour: &Contour<'_>, mut cell: Rectangle, count: u32) -> Rectangle {
    while cell.diameter() > 1e-12 {
        let next = split_counted(contour, &cell, count)
            .ok()
            .and_then(|ch| ch.into_iter().find(|(_, n)| *n == count).map(|(c, _)| c));
        match next {
            Some(c) => cell = c,
            None => break,
        }
    }
    cell
}

/// Trapezoidal `(1/2 pi i) oint P'/P` on a circle; exponentially accurate for analytic integrands.
pub fn circle_count(ev: &Evaluator, center: &Complex, radius: f64) -> i64 {
    const NODES: u32 = 32;
    let prec = ev.precision();
    let two_pi = Float::with_val(prec.bits(), pi(prec) * 2u32);
    let rad = prec.float(radius);
    let mut acc = Complex::zero(prec);
    for j in 0..NODES {
        let theta = Float::with_val(prec.bits(), &two_pi * j) / NODES;
        let mut e = Complex::cis(&theta);
        e.scale_assign(&rad);
        let s = center + &e;
        let (v, d) = ev.eval_with_derivative(&s);
        acc += &(&(&d / &v) * &e);
    }
    (acc.re.to_f64() / NODES as f64).round() as i64
}

/// Distinct ordinates of zeros with `|Re(rho) - r| <= line_tol`, ascending;
/// multiplicities are dropped.
pub fn zeros_on_line(zs: &ZeroSet, r: f64, line_tol: f64) -> Vec<Float> {
    let mut ts: Vec<Float> = zs
        .zeros
        .iter()
        .filter(|z| (z.location.re.to_f64() - r).abs() <= line_tol)
        .map(|z| z.location.im.clone())
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<Float> = Vec::with_capacity(ts.len());
    for t in ts {
        if out.last().is_none_or(|prev| (t.to_f64() - prev.to_f64()).abs() > ORDINATE_SPACING) {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::strip_bounds;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn one_minus_two() -> DirichletPolynomial {
        DirichletPolynomial::from_integers(&[1, -1]).unwrap()
    }

    fn squared() -> DirichletPolynomial {
        DirichletPolynomial::from_integers(&[1, -2, 0, 1]).unwrap()
    }

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle {
        Rectangle::new(a, b, c, d).unwrap()
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_count(&DirichletPolynomial::one(), &rect(-1.0, 1.0, -5.0, 5.0)).unwrap(), 0);
        assert_eq!(winding_count(&one_minus_two(), &rect(-1.0, 1.0, 0.5, 100.5)).unwrap(), 11);
        assert_eq!(winding_count(&squared(), &rect(-1.0, 1.0, -1.0, 1.0)).unwrap(), 2);
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn finds_first_lattice_zero() {
        let zs = find_zeros(&one_minus_two(), &rect(-1.0, 1.0, 8.0, 10.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        assert_eq!(zs.zeros.len(), 1);
        let expect = 2.0 * PI / LN_2;
        let z = &zs.zeros[0];
        assert!((z.location.im.to_f64() - expect).abs() < 1e-12);
        assert!(z.location.re.to_f64().abs() < 1e-20);
        assert!(z.residual <= prec().float(1e-30));
    }

    #[test]
    fn finds_exact_zero_at_origin() {
        let zs = find_zeros(&one_minus_two(), &rect(-1.0, 1.0, -1.0, 1.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        assert_eq!(zs.total_count, 1);
        assert!(zs.zeros[0].location.abs() < prec().float(1e-30));
    }

    #[test]
    fn detects_double_zero() {
        let zs = find_zeros(&squared(), &rect(-1.0, 1.0, -1.0, 1.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        assert_eq!(zs.zeros.len(), 1);
        assert_eq!(zs.zeros[0].multiplicity, 2);
        assert_eq!(zs.zeros[0].circle_count, None);
        assert_eq!(zs.multiplicity_sum(), zs.total_count);
    }

    #[test]
    fn ordinates_on_line() {
        let zs = find_zeros(&one_minus_two(), &rect(-0.5, 0.5, -0.5, 20.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        let ts: Vec<f64> = zeros_on_line(&zs, 0.0, DEFAULT_LINE_TOL).iter().map(Float::to_f64).collect();
        let step = 2.0 * PI / LN_2;
        assert_eq!(ts.len(), 3);
        for (k, t) in ts.iter().enumerate() {
            assert!((t - k as f64 * step).abs() < 1e-12);
        }
        assert!(zeros_on_line(&zs, 0.3, DEFAULT_LINE_TOL).is_empty());
        let sq = find_zeros(&squared(), &rect(-0.5, 0.5, -0.5, 10.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        assert_eq!(zeros_on_line(&sq, 0.0, DEFAULT_LINE_TOL).len(), 2);
    }

    #[test]
    fn off_line_zeros_and_strip() {
        // 1 + 2^{-s} - 3^{-s} / 2 has zeros off any single vertical line.
        let p: DirichletPolynomial = "1:1,2:1,3:-1/2".parse().unwrap();
        let zs = find_zeros(&p, &rect(-3.0, 3.0, -15.0, 15.0), DEFAULT_RESIDUAL_TOL, prec()).unwrap();
        assert!(zs.total_count > 0);
        let (alpha, beta) = strip_bounds(&p, prec()).as_f64().unwrap();
        for z in &zs.zeros {
            let s = z.location.to_f64();
            assert!(s.re >= alpha - 1e-12 && s.re <= beta + 1e-12);
            assert!(zs.rectangle.contains(s, 0.0));
            assert!(z.residual <= prec().float(1e-30));
        }
        // Real coefficients: the multiset is closed under conjugation.
        let ims: Vec<Float> = zs.zeros.iter().map(|z| z.location.im.clone()).collect();
        for (a, b) in ims.iter().zip(ims.iter().rev()) {
            assert!(Float::with_val(256, a + b).abs() < prec().float(1e-25));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn winding_is_additive(cut in 0.1f64..0.9, coeffs in proptest::collection::vec(-3i64..=3, 2..4)) {
            let mut c = coeffs;
            if c[0] == 0 { c[0] = 1; }
            if c.iter().skip(1).all(|&x| x == 0) { c[1] = 2; }
            let p = DirichletPolynomial::from_integers(&c).unwrap();
            let ev = p.f64_evaluator();
            let contour = Contour::new(&ev);
            let whole = rect(-2.0, 2.0, -6.0, 6.0);
            if let Ok(total) = contour.count(&whole) {
                let [lo, hi] = whole.split_t(cut);
                if let (Ok(a), Ok(b)) = (contour.count(&lo), contour.count(&hi)) {
                    prop_assert_eq!(a + b, total);
                }
            }
        }
    }
}
