//! Argument-principle zero counts on axis-aligned rectangles.
//!
//! The contour integral of `P'/P` is taken in double precision: the target is
//! an integer, so an absolute error far below `0.25` is all that is needed,
//! and the companion refinement step runs at full precision anyway.

use std::f64::consts::PI;
use std::cell::Cell;

use num_complex::Complex64;

use super::Rectangle;
use crate::error::{Error, Result};
use crate::poly::F64Evaluator;
use crate::quadrature::GaussLegendre;

/// Absolute tolerance on `oint P'/P ds` for the first pass.
pub const BASE_TOLERANCE: f64 = 1e-8;
/// Narrowest panel before the contour is declared too close to a zero.
pub const MIN_PANEL: f64 = 1e-9;
/// Relative modulus (against `sum |a_k| k^{-sigma}`) treated as touching a zero.
pub const MIN_MODULUS: f64 = 1e-13;
/// Outward perturbation applied when the contour touches a zero.
pub const PERTURBATION: f64 = 1e-6;
pub const MAX_PERTURBATIONS: u32 = 5;
/// Rounding noise in `P'/P` relative to `eps * majorant / |P|`.
const NOISE_FACTOR: f64 = 64.0;
/// Integrand evaluations allowed for one pass around one contour.
pub const MAX_EVALUATIONS: u64 = 20_000_000;

/// Why a single contour pass failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ContourFailure {
    TooClose,
    Budget,
}

impl From<ContourFailure> for Error {
    fn from(f: ContourFailure) -> Error {
        match f {
            ContourFailure::TooClose => Error::ContourTooClose { attempts: 1 },
            ContourFailure::Budget => Error::QuadratureNotConverged("contour evaluation budget exhausted".into()),
        }
    }
}

pub(crate) struct Contour<'a> {
    ev: &'a F64Evaluator,
    initial_panel: f64,
}

impl<'a> Contour<'a> {
    pub(crate) fn new(ev: &'a F64Evaluator) -> Self {
        let lmax = ev.max_log_frequency();
        // Keeps the phase of every term nearly linear on a panel.
        let initial_panel = if lmax > 0.0 { (PI / (2.0 * lmax)).min(1.0) } else { 1.0 };
        Contour { ev, initial_panel }
    }

    pub(crate) fn evaluator(&self) -> &F64Evaluator {
        self.ev
    }

    /// `P'/P` and a bound on its rounding error, which grows like `majorant / |P|`.
    fn integrand(&self, s: Complex64) -> std::result::Result<(Complex64, f64), ContourFailure> {
        let (v, d) = self.ev.eval_with_derivative(s);
        let scale = self.ev.majorant(s.re);
        let modulus = v.norm();
        if modulus < MIN_MODULUS * scale {
            return Err(ContourFailure::TooClose);
        }
        let f = d / v;
        Ok((f, NOISE_FACTOR * f64::EPSILON * f.norm() * scale / modulus))
    }

    /// 16-point rule on the segment, with its accumulated rounding noise.
    fn rule(&self, a: Complex64, b: Complex64, spent: &Cell<u64>) -> std::result::Result<(Complex64, f64), ContourFailure> {
        spent.set(spent.get() + 16);
        if spent.get() > MAX_EVALUATIONS {
            return Err(ContourFailure::Budget);
        }
        let dz = b - a;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut noise = 0.0;
        for (x, w) in GaussLegendre::sixteen().mapped(0.0, 1.0) {
            let (f, e) = self.integrand(a + dz * x)?;
            acc += f * w;
            noise += e * w;
        }
        Ok((acc * dz, noise * dz.norm()))
    }

    /// Accepts a panel once its two-level difference is below `tol` or at the
    /// rounding floor of the integrand.
    fn panel(
        &self,
        a: Complex64,
        b: Complex64,
        whole: (Complex64, f64),
        tol: f64,
        spent: &Cell<u64>,
    ) -> std::result::Result<Complex64, ContourFailure> {
        let mid = 0.5 * (a + b);
        let left = self.rule(a, mid, spent)?;
        let right = self.rule(mid, b, spent)?;
        let floor = whole.1 + left.1 + right.1;
        if (left.0 + right.0 - whole.0).norm() <= tol + floor {
            return Ok(left.0 + right.0);
        }
        if (b - a).norm() < MIN_PANEL {
            return Err(ContourFailure::TooClose);
        }
        Ok(self.panel(a, mid, left, 0.5 * tol, spent)? + self.panel(mid, b, right, 0.5 * tol, spent)?)
    }

    fn edge(&self, a: Complex64, b: Complex64, tol: f64, spent: &Cell<u64>) -> std::result::Result<Complex64, ContourFailure> {
        let len = (b - a).norm();
        let pieces = (len / self.initial_panel).ceil().max(1.0) as usize;
        let step = (b - a) / pieces as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..pieces {
            let lo = a + step * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + step };
            let whole = self.rule(lo, hi, spent)?;
            acc += self.panel(lo, hi, whole, tol / pieces as f64, spent)?;
        }
        Ok(acc)
    }

    /// `(1/2 pi i) oint P'/P` counterclockwise, to absolute tolerance `tol` on the integral.
    pub(crate) fn winding_value(&self, rect: &Rectangle, tol: f64) -> std::result::Result<f64, ContourFailure> {
        let c = rect.corners();
        let perimeter = rect.perimeter();
        let spent = Cell::new(0);
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            total += self.edge(a, b, tol * (b - a).norm() / perimeter, &spent)?;
        }
        Ok((total / Complex64::new(0.0, 2.0 * PI)).re)
    }

    /// Count accepted only when within 0.25 of an integer and unchanged at a
    /// sixteenfold tighter tolerance.
    pub(crate) fn count(&self, rect: &Rectangle) -> std::result::Result<u32, ContourFailure> {
        let first = self.winding_value(rect, BASE_TOLERANCE)?;
        let n = first.round();
        if (first - n).abs() > 0.25 || n < 0.0 {
            return Err(ContourFailure::Budget);
        }
        let second = self.winding_value(rect, BASE_TOLERANCE / 16.0)?;
        if (second - n).abs() > 0.25 {
            return Err(ContourFailure::Budget);
        }
        Ok(n as u32)
    }

    /// Count with outward perturbation when the contour touches a zero.
    pub(crate) fn count_perturbed(&self, rect: &Rectangle) -> Result<(Rectangle, u32)> {
        let mut current = *rect;
        for attempt in 0..=MAX_PERTURBATIONS {
            match self.count(&current) {
                Ok(n) => return Ok((current, n)),
                Err(ContourFailure::TooClose) if attempt < MAX_PERTURBATIONS => {
                    current = current.expanded(PERTURBATION);
                }
                Err(ContourFailure::TooClose) => {
                    return Err(Error::ContourTooClose { attempts: MAX_PERTURBATIONS });
                }
                Err(f) => return Err(f.into()),
            }
        }
        unreachable!("loop returns on the last attempt")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::DirichletPolynomial;
    use std::f64::consts::LN_2;

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rectangle {
        Rectangle::new(a, b, c, d).unwrap()
    }

    #[test]
    fn counts_lattice_zeros() {
        let p = DirichletPolynomial::from_integers(&[1, -1]).unwrap();
        let ev = p.f64_evaluator();
        let c = Contour::new(&ev);
        assert_eq!(c.count(&rect(-1.0, 1.0, 0.5, 100.5)).unwrap(), 11);
        // The lattice spacing is 2 pi / ln 2; one step below the first zero holds none.
        assert_eq!(c.count(&rect(-1.0, 1.0, 0.5, 2.0 * PI / LN_2 - 0.5)).unwrap(), 0);
    }

    #[test]
    fn double_zero_counts_twice() {
        let p = DirichletPolynomial::from_integers(&[1, -2, 0, 1]).unwrap();
        let ev = p.f64_evaluator();
        assert_eq!(Contour::new(&ev).count(&rect(-1.0, 1.0, -1.0, 1.0)).unwrap(), 2);
    }

    #[test]
    fn zero_on_edge_is_detected_then_perturbed() {
        let p = DirichletPolynomial::from_integers(&[1, -1]).unwrap();
        let ev = p.f64_evaluator();
        let c = Contour::new(&ev);
        // s = 0 sits on the left edge.
        let r = rect(0.0, 1.0, -1.0, 1.0);
        assert_eq!(c.count(&r), Err(ContourFailure::TooClose));
        let (used, n) = c.count_perturbed(&r).unwrap();
        assert_eq!(n, 1);
        assert!(used.sigma_lo < 0.0);
    }
}
