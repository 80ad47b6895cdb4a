//! Dirichlet polynomials `P(s) = sum_{k=1}^m a_k k^{-s}` with exact rational
//! coefficients, and the objects derived from them: the step function
//! `kappa_r`, zero strip bounds, and the formal Dirichlet inverse.

mod format;
pub mod inverse;
pub mod kappa;
pub mod strip;

use num_complex::Complex64;
use rug::Float;

use crate::error::{Error, Result};
use crate::exact::GaussRational;
use crate::mp::{ln_u64, Complex, Precision};

pub use inverse::{inverse_coeffs, inverse_partial_sum_error, InverseCoeffs};
pub use kappa::{kappa_partial_sums, KappaProfile};
pub use strip::{strip_bounds, StripBounds};

/// Finite Dirichlet polynomial with `a_1 != 0` and `a_m != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirichletPolynomial {
    coeffs: Vec<GaussRational>,
}

impl DirichletPolynomial {
    /// Builds from the dense list `a_1, ..., a_m`; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<GaussRational>) -> Result<Self> {
        while coeffs.last().is_some_and(GaussRational::is_zero) {
            coeffs.pop();
        }
        match coeffs.first() {
            None => Err(Error::InvalidPolynomial("all coefficients are zero".into())),
            Some(a1) if a1.is_zero() => {
                Err(Error::InvalidPolynomial("leading coefficient a_1 must be nonzero".into()))
            }
            Some(_) => Ok(DirichletPolynomial { coeffs }),
        }
    }

    /// Builds from sparse `(k, a_k)` pairs with `k >= 1`; repeated `k` is rejected.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, GaussRational)>,
    {
        let mut dense: Vec<Option<GaussRational>> = Vec::new();
        for (k, a) in terms {
            if k == 0 {
                return Err(Error::InvalidPolynomial("frequencies start at k = 1".into()));
            }
            if dense.len() < k {
                dense.resize(k, None);
            }
            if dense[k - 1].replace(a).is_some() {
                return Err(Error::InvalidPolynomial(format!("frequency {k} given twice")));
            }
        }
        Self::new(dense.into_iter().map(Option::unwrap_or_default).collect())
    }

    pub fn from_integers(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| GaussRational::from_i64(c)).collect())
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        DirichletPolynomial { coeffs: vec![GaussRational::one()] }
    }

    /// Order `m`, the largest frequency with a nonzero coefficient.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_k` for `1 <= k <= m`.
    pub fn coeff(&self, k: usize) -> Option<&GaussRational> {
        k.checked_sub(1).and_then(|i| self.coeffs.get(i))
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.coeffs
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = (usize, &GaussRational)> {
        self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| (i + 1, a))
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.iter().all(GaussRational::is_real)
    }

    /// Dirichlet convolution, i.e. the pointwise product `P(s) Q(s)`.
    pub fn mul(&self, other: &DirichletPolynomial) -> DirichletPolynomial {
        let m = self.order() * other.order();
        let mut c = vec![GaussRational::zero(); m];
        for (j, a) in self.nonzero_terms() {
            for (k, b) in other.nonzero_terms() {
                c[j * k - 1] += &(a * b);
            }
        }
        DirichletPolynomial::new(c).expect("a_1 b_1 != 0")
    }

    /// `P(s)` at the precision of `s`.
    pub fn eval(&self, s: &Complex) -> Complex {
        self.evaluator(s.precision()).eval(s)
    }

    /// `P'(s) = -sum a_k (ln k) k^{-s}` at the precision of `s`.
    pub fn derivative_eval(&self, s: &Complex) -> Complex {
        self.evaluator(s.precision()).eval_with_derivative(s).1
    }

    /// Evaluator with `ln k` cached at `prec`.
    pub fn evaluator(&self, prec: Precision) -> Evaluator {
        let terms = self
            .nonzero_terms()
            .map(|(k, a)| {
                let ln_k = if k == 1 { None } else { Some(ln_u64(k as u64, prec)) };
                (ln_k, a.to_complex(prec))
            })
            .collect();
        Evaluator { prec, terms }
    }

    pub fn f64_evaluator(&self) -> F64Evaluator {
        let terms: Vec<_> = self
            .nonzero_terms()
            .map(|(k, a)| {
                let a = Complex64::new(a.re.to_f64(), a.im.to_f64());
                ((k as f64).ln(), a, a.norm())
            })
            .collect();
        F64Evaluator { terms }
    }
}

/// Repeated high-precision evaluation of one polynomial.
#[derive(Debug, Clone)]
pub struct Evaluator {
    prec: Precision,
    terms: Vec<(Option<Float>, Complex)>,
}

impl Evaluator {
    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn eval(&self, s: &Complex) -> Complex {
        let mut acc = Complex::zero(self.prec);
        for (ln_k, a) in &self.terms {
            match ln_k {
                None => acc += a,
                Some(l) => acc.add_mul_assign(a, &Complex::pow_neg(l, s)),
            }
        }
        acc
    }

    /// `(P(s), P'(s))` sharing the exponentials.
    pub fn eval_with_derivative(&self, s: &Complex) -> (Complex, Complex) {
        let mut value = Complex::zero(self.prec);
        let mut deriv = Complex::zero(self.prec);
        for (ln_k, a) in &self.terms {
            match ln_k {
                None => value += a,
                Some(l) => {
                    let t = a * &Complex::pow_neg(l, s);
                    value += &t;
                    deriv -= &t.scale(l);
                }
            }
        }
        (value, deriv)
    }
}

/// Double-precision evaluation used by contour quadrature.
#[derive(Debug, Clone)]
pub struct F64Evaluator {
    terms: Vec<(f64, Complex64, f64)>,
}

impl F64Evaluator {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.terms.iter().map(|&(l, a, _)| a * (-s * l).exp()).sum()
    }

    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for &(l, a, _) in &self.terms {
            let t = a * (-s * l).exp();
            v += t;
            d -= t * l;
        }
        (v, d)
    }

    /// `sum |a_k| k^{-sigma}`, an upper bound for `|P|` on `Re(s) = sigma`.
    pub fn majorant(&self, sigma: f64) -> f64 {
        self.terms.iter().map(|&(l, _, m)| m * (-sigma * l).exp()).sum()
    }

    pub fn max_log_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.0).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn one_minus_two() -> DirichletPolynomial {
        DirichletPolynomial::from_integers(&[1, -1]).unwrap()
    }

    #[test]
    fn constructor_enforces_leading_and_trailing_coefficients() {
        assert!(DirichletPolynomial::from_integers(&[0, 1]).is_err());
        assert!(DirichletPolynomial::from_integers(&[]).is_err());
        let p = DirichletPolynomial::from_integers(&[2, 0, 1, 0, 0]).unwrap();
        assert_eq!(p.order(), 3);
        assert!(DirichletPolynomial::from_terms([(1, GaussRational::one()), (1, GaussRational::one())]).is_err());
    }

    #[test]
    fn eval_examples() {
        let p = prec();
        let z = one_minus_two().eval(&Complex::zero(p));
        assert!(z.is_zero());

        let q = DirichletPolynomial::from_integers(&[1, 1, 1]).unwrap();
        let v = q.eval(&Complex::one(p));
        let expected = p.float(11) / 6u32;
        assert!(Float::with_val(256, &v.re - &expected).abs() < p.pow2_neg(250));
        assert!(v.im.is_zero());

        // 2^{-s} = 1 at s = 2 pi i / ln 2.
        let t = Float::with_val(256, rug::float::Constant::Pi) * 2u32 / Float::with_val(256, 2).ln();
        let s = Complex::new(Float::new(256), t);
        let v = one_minus_two().eval(&s);
        assert!(v.abs() < p.pow2_neg(240));
        assert!((2.0 * PI / LN_2 - s.im.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn derivative_examples() {
        let p = prec();
        let d = one_minus_two().derivative_eval(&Complex::zero(p));
        let ln2 = ln_u64(2, p);
        assert!(Float::with_val(256, &d.re - &ln2).abs() < p.pow2_neg(250));

        let c = DirichletPolynomial::from_integers(&[5]).unwrap();
        assert!(c.derivative_eval(&Complex::from_f64(p, 0.3, 7.0)).is_zero());
    }

    #[test]
    fn derivative_matches_central_difference() {
        // Oracle: (P(s+h) - P(s-h)) / 2h with h = 1e-20 at 256 bits.
        let p = prec();
        let poly = DirichletPolynomial::from_integers(&[1, 0, 1]).unwrap();
        let s = Complex::one(p);
        let h = Complex::from_real(p.float(1e-20f64));
        let num = &poly.eval(&(&s + &h)) - &poly.eval(&(&s - &h));
        let two_h = Complex::from_real(Float::with_val(256, &h.re * 2u32));
        let fd = &num / &two_h;
        let d = poly.derivative_eval(&s);
        let expected = -(ln_u64(3, p) / 3u32);
        let rel = (&fd - &d).abs() / d.abs();
        assert!(rel < 1e-10, "relative difference {rel}");
        assert!(Float::with_val(256, &d.re - &expected).abs() < p.pow2_neg(250));
    }

    #[test]
    fn product_is_dirichlet_convolution() {
        let sq = one_minus_two().mul(&one_minus_two());
        assert_eq!(sq, DirichletPolynomial::from_integers(&[1, -2, 0, 1]).unwrap());
        let p = prec();
        let s = Complex::from_f64(p, 0.3, 2.0);
        let lhs = sq.eval(&s);
        let f = one_minus_two().eval(&s);
        let rhs = &f * &f;
        assert!((&lhs - &rhs).abs() < p.pow2_neg(240));
    }

    #[test]
    fn f64_evaluator_agrees_with_high_precision() {
        let poly = DirichletPolynomial::from_integers(&[3, -1, 2, 0, 7]).unwrap();
        let s = Complex64::new(-0.4, 31.0);
        let (v, d) = poly.f64_evaluator().eval_with_derivative(s);
        let p = prec();
        let sp = Complex::from_f64(p, s.re, s.im);
        let vv = poly.eval(&sp).to_f64();
        let dd = poly.derivative_eval(&sp).to_f64();
        assert!((v - vv).norm() < 1e-12);
        assert!((d - dd).norm() < 1e-12);
    }
}
