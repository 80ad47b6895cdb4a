//! The step function `kappa_r(x) = sum_{k <= x} a_k k^{1/2 - r}`.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::DirichletPolynomial;
use crate::error::{Error, Result};
use crate::exact::GaussRational;
use crate::mp::{ln_u64, Complex, Precision};

/// Partial sums `S_j = sum_{i <= j} a_i i^{1/2 - r}` for `j = 1..m`.
#[derive(Debug, Clone)]
pub struct KappaProfile {
    r: Rational,
    prec: Precision,
    sums: Vec<Complex>,
    exact: Option<Vec<GaussRational>>,
}

/// Integer value of `1/2 - r` when it has one.
pub(crate) fn integral_shift(r: &Rational) -> Option<i64> {
    let e = Rational::from((1, 2)) - r.clone();
    if *e.denom() == 1 {
        e.numer().to_i64()
    } else {
        None
    }
}

/// Builds the profile exactly when `r - 1/2` is an integer, otherwise at `prec`.
pub fn kappa_partial_sums(p: &DirichletPolynomial, r: &Rational, prec: Precision) -> KappaProfile {
    let m = p.order();
    if let Some(e) = integral_shift(r) {
        let mut acc = GaussRational::zero();
        let mut exact = Vec::with_capacity(m);
        for (i, a) in p.coeffs().iter().enumerate() {
            if !a.is_zero() {
                let w = Rational::from(Integer::from(i + 1)).pow_exact(e);
                acc += &a.scale(&w);
            }
            exact.push(acc.clone());
        }
        let sums = exact.iter().map(|s| s.to_complex(prec)).collect();
        return KappaProfile { r: r.clone(), prec, sums, exact: Some(exact) };
    }
    let e = prec.float(Rational::from((1, 2)) - r.clone());
    let mut acc = Complex::zero(prec);
    let mut sums = Vec::with_capacity(m);
    for (i, a) in p.coeffs().iter().enumerate() {
        if !a.is_zero() {
            let w = if i == 0 { prec.float(1) } else { (ln_u64(i as u64 + 1, prec) * &e).exp() };
            acc += &a.to_complex(prec).scale(&w);
        }
        sums.push(acc.clone());
    }
    KappaProfile { r: r.clone(), prec, sums, exact: None }
}

trait PowExact {
    fn pow_exact(self, e: i64) -> Rational;
}

impl PowExact for Rational {
    fn pow_exact(self, e: i64) -> Rational {
        let base = if e < 0 { self.recip() } else { self };
        let mag = e.unsigned_abs() as u32;
        let (n, d) = base.into_numer_denom();
        Rational::from((n.pow(mag), d.pow(mag)))
    }
}

impl KappaProfile {
    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// `m`, the number of steps.
    pub fn order(&self) -> usize {
        self.sums.len()
    }

    pub fn partial_sums(&self) -> &[Complex] {
        &self.sums
    }

    /// `S_j` for `1 <= j <= m`.
    pub fn sum(&self, j: usize) -> &Complex {
        &self.sums[j - 1]
    }

    /// Exact partial sums, present when `r - 1/2` is an integer.
    pub fn exact_sums(&self) -> Option<&[GaussRational]> {
        self.exact.as_deref()
    }

    /// `S_m = P(r - 1/2)`, the value of `kappa_r` on `[m, inf)`.
    pub fn tail_value(&self) -> &Complex {
        self.sums.last().expect("order >= 1")
    }

    /// `kappa_r(x)` with right-closed steps: `kappa_r(j) = S_j`.
    pub fn eval(&self, x: &Float) -> Result<Complex> {
        if x.is_nan() || *x <= 0 {
            return Err(Error::InvalidArgument(format!("kappa argument must be positive, got {x}")));
        }
        let m = self.order();
        if *x >= m as u32 {
            return Ok(self.tail_value().clone());
        }
        if *x < 1 {
            return Ok(Complex::zero(self.prec));
        }
        let j = x.to_integer_round(rug::float::Round::Down).map(|(i, _)| i).unwrap_or_default();
        let j = j.to_usize().expect("1 <= floor(x) < m");
        Ok(self.sum(j).clone())
    }

    /// Same profile re-rounded at another precision (exact sums re-rounded, not recomputed).
    pub fn at_precision(&self, p: &DirichletPolynomial, prec: Precision) -> KappaProfile {
        match &self.exact {
            Some(exact) => KappaProfile {
                r: self.r.clone(),
                prec,
                sums: exact.iter().map(|s| s.to_complex(prec)).collect(),
                exact: Some(exact.clone()),
            },
            None => kappa_partial_sums(p, &self.r, prec),
        }
    }
}
