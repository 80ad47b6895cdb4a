//! The on-line zero sum `C = sum 1/|rho - r + 1/2|^2` over distinct zeros on
//! `Re(s) = r`, truncated at height `T` with a reported tail bound.

use std::f64::consts::PI;

use rug::{Float, Rational};

use super::{find_zeros, zeros_on_line, Rectangle, DEFAULT_RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::mp::{to_decimal, Precision};
use crate::poly::{strip_bounds, DirichletPolynomial};

/// Overestimate factor on the zero density `ln(m) / 2 pi` per unit height.
pub const DENSITY_MARGIN: f64 = 0.5;
/// Half-width of the search strip around the line.
const SEARCH_HALF_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantC {
    pub r: Rational,
    /// Sum over distinct on-line ordinates with `|t| <= T`.
    pub partial: Float,
    pub height: f64,
    /// Bound on the omitted `|t| > T` part; reported, never added in.
    pub tail_bound: f64,
    pub line_tolerance: f64,
    pub ordinates: Vec<Float>,
}

impl ConstantC {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "r": self.r.to_string(),
            "partial": to_decimal(&self.partial),
            "T": self.height,
            "tail_bound": self.tail_bound,
            "line_tolerance": self.line_tolerance,
            "ordinates": self.ordinates.iter().map(to_decimal).collect::<Vec<_>>(),
        })
    }
}

/// `N'(2/T)` with `N' = (ln m / 2 pi)(1 + margin)`: each omitted zero above
/// height `T` contributes less than `1/t^2`, on both half-lines.
pub fn tail_bound(order: usize, height: f64) -> f64 {
    let density = (order as f64).ln() / (2.0 * PI) * (1.0 + DENSITY_MARGIN);
    density * 2.0 / height
}

pub fn constant_c(p: &DirichletPolynomial, r: &Rational, height: f64, line_tol: f64, prec: Precision) -> Result<ConstantC> {
    if height.is_nan() || height < 1.0 {
        return Err(Error::InvalidArgument(format!("height T must be at least 1, got {height}")));
    }
    let rf = r.to_f64();
    let on_strip = match strip_bounds(p, prec).as_f64() {
        None => false,
        Some((a, b)) => rf >= a - 1e-12 && rf <= b + 1e-12,
    };
    let ordinates = if on_strip {
        let rect = Rectangle::new(rf - SEARCH_HALF_WIDTH, rf + SEARCH_HALF_WIDTH, -height, height)?;
        let zs = find_zeros(p, &rect, DEFAULT_RESIDUAL_TOL, prec)?;
        zeros_on_line(&zs, rf, line_tol)
            .into_iter()
            .filter(|t| t.to_f64().abs() <= height)
            .collect()
    } else {
        Vec::new()
    };
    let mut partial = prec.float(0);
    let quarter = prec.float(0.25);
    for t in &ordinates {
        let mut d = Float::with_val(prec.bits(), t.square_ref());
        d += &quarter;
        partial += d.recip();
    }
    Ok(ConstantC {
        r: r.clone(),
        partial,
        height,
        tail_bound: tail_bound(p.order(), height),
        line_tolerance: line_tol,
        ordinates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::DEFAULT_LINE_TOL;
    use std::f64::consts::LN_2;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    #[test]
    fn constant_polynomial_has_zero_sum() {
        let c = constant_c(&DirichletPolynomial::one(), &Rational::from(0), 50.0, DEFAULT_LINE_TOL, prec()).unwrap();
        assert!(c.partial.is_zero());
        assert_eq!(c.tail_bound, 0.0);
    }

    #[test]
    fn partial_at_height_ten() {
        let p = DirichletPolynomial::from_integers(&[1, -1]).unwrap();
        let c = constant_c(&p, &Rational::from(0), 10.0, DEFAULT_LINE_TOL, prec()).unwrap();
        let t1 = 2.0 * PI / LN_2;
        let expect = 4.0 + 2.0 / (0.25 + t1 * t1);
        assert_eq!(c.ordinates.len(), 3);
        assert!((c.partial.to_f64() - expect).abs() < 1e-14);
        // Off the line: no zeros on Re(s) = 0.3.
        let off = constant_c(&p, &Rational::from((3, 10)), 10.0, DEFAULT_LINE_TOL, prec()).unwrap();
        assert!(off.partial.is_zero());
    }

    #[test]
    fn partial_is_monotone_and_precision_stable() {
        let p = DirichletPolynomial::from_integers(&[1, -1]).unwrap();
        let r = Rational::from(0);
        let lo = constant_c(&p, &r, 30.0, DEFAULT_LINE_TOL, prec()).unwrap();
        let hi = constant_c(&p, &r, 60.0, DEFAULT_LINE_TOL, prec()).unwrap();
        assert!(hi.partial >= lo.partial);
        assert!(hi.tail_bound <= lo.tail_bound);
        let doubled = constant_c(&p, &r, 60.0, DEFAULT_LINE_TOL, prec().doubled()).unwrap();
        let diff = Float::with_val(512, &doubled.partial - &hi.partial).abs();
        assert!(diff < 1e-20);
        assert!(constant_c(&p, &r, 0.5, DEFAULT_LINE_TOL, prec()).is_err());
    }
}
