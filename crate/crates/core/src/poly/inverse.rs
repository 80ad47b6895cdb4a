//! Formal Dirichlet inverse `1/P(s) = sum mu_P(n) n^{-s}`.

use rug::{Float, Rational};

use super::DirichletPolynomial;
use crate::error::{Error, Result};
use crate::exact::GaussRational;
use crate::mp::{ln_u64, Complex, Precision};

/// `mu_P(1..=N)`, exact.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCoeffs {
    mu: Vec<GaussRational>,
}

/// Divisor-sum recursion `mu(1) = 1/a_1`,
/// `mu(n) = -(1/a_1) sum_{d | n, 1 < d <= m} a_d mu(n/d)`.
pub fn inverse_coeffs(p: &DirichletPolynomial, n: usize) -> Result<InverseCoeffs> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation length must be at least 1".into()));
    }
    let inv_a1 = p.coeffs()[0].recip();
    let mut mu = Vec::with_capacity(n);
    mu.push(inv_a1.clone());
    let terms: Vec<(usize, &GaussRational)> = p.nonzero_terms().skip(1).collect();
    for idx in 2..=n {
        let mut acc = GaussRational::zero();
        for &(d, a) in &terms {
            if d > idx {
                break;
            }
            if idx % d == 0 {
                let q = &mu[idx / d - 1];
                if !q.is_zero() {
                    acc += &(a * q);
                }
            }
        }
        mu.push(if acc.is_zero() { acc } else { -(&acc * &inv_a1) });
    }
    Ok(InverseCoeffs { mu })
}

impl InverseCoeffs {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// `mu_P(k)` for `1 <= k <= N`.
    pub fn get(&self, k: usize) -> &GaussRational {
        &self.mu[k - 1]
    }

    pub fn exact(&self) -> &[GaussRational] {
        &self.mu
    }

    pub fn to_complex(&self, prec: Precision) -> Vec<Complex> {
        self.mu.iter().map(|q| q.to_complex(prec)).collect()
    }

    /// Exact check of `sum_{d | n, d <= m} a_d mu(n/d) = [n = 1]` for all `n <= N`.
    pub fn satisfies_convolution(&self, p: &DirichletPolynomial) -> bool {
        (1..=self.len()).all(|n| {
            let mut acc = GaussRational::zero();
            for (d, a) in p.nonzero_terms() {
                if d <= n && n % d == 0 {
                    acc += &(a * self.get(n / d));
                }
            }
            if n == 1 {
                acc == GaussRational::one()
            } else {
                acc.is_zero()
            }
        })
    }
}

/// `max_t |sum_{k<=n} mu_f(k) k^{-s} - 1/f(s)|` on `s = 1/2 + eps + it`, where
/// `f(s) = P(s + r - 1/2)`. Since `mu_f(k) = mu_P(k) k^{1/2 - r}`, both terms
/// are evaluated at `w = r + eps + it`.
pub fn inverse_partial_sum_error(
    p: &DirichletPolynomial,
    r: &Rational,
    epsilon: &Rational,
    n: usize,
    t_grid: &[f64],
    prec: Precision,
) -> Result<Float> {
    if epsilon.cmp0().is_le() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let mu = inverse_coeffs(p, n)?;
    let mu_c: Vec<(usize, Complex)> = mu
        .exact()
        .iter()
        .enumerate()
        .filter(|(_, q)| !q.is_zero())
        .map(|(i, q)| (i + 1, q.to_complex(prec)))
        .collect();
    let logs: Vec<Option<Float>> =
        mu_c.iter().map(|(k, _)| (*k > 1).then(|| ln_u64(*k as u64, prec))).collect();
    let ev = p.evaluator(prec);
    let sigma = prec.float(r.clone() + epsilon.clone());
    let mut worst = prec.float(0);
    for &t in t_grid {
        let w = Complex::new(sigma.clone(), prec.float(t));
        let f = ev.eval(&w);
        if f.is_zero() || f.abs() < prec.pow2_neg(prec.bits() - 8) {
            return Err(Error::ZeroOnEvaluationLine(w.to_string()));
        }
        let mut sum = Complex::zero(prec);
        for ((_, c), l) in mu_c.iter().zip(&logs) {
            match l {
                None => sum += c,
                Some(l) => sum.add_mul_assign(c, &Complex::pow_neg(l, &w)),
            }
        }
        let err = (&sum - &f.recip()).abs();
        if err > worst {
            worst = err;
        }
    }
    Ok(worst)
}
