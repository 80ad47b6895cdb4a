//! Vertical strip `alpha <= Re(rho) <= beta` containing every zero.

use rug::Float;

use super::DirichletPolynomial;
use crate::mp::{ln_u64, Precision};

#[derive(Debug, Clone, PartialEq)]
pub enum StripBounds {
    /// `m = 1`: the polynomial is a nonzero constant.
    NoZeros,
    Strip { alpha: Float, beta: Float },
}

impl StripBounds {
    /// Whether `sigma` lies in the strip widened by `slack` on both sides.
    pub fn contains(&self, sigma: f64, slack: f64) -> bool {
        match self {
            StripBounds::NoZeros => false,
            StripBounds::Strip { alpha, beta } => {
                sigma >= alpha.to_f64() - slack && sigma <= beta.to_f64() + slack
            }
        }
    }

    pub fn as_f64(&self) -> Option<(f64, f64)> {
        match self {
            StripBounds::NoZeros => None,
            StripBounds::Strip { alpha, beta } => Some((alpha.to_f64(), beta.to_f64())),
        }
    }
}

/// `beta` solves `sum_{k>=2} |a_k| k^{-sigma} = |a_1|`, `alpha` solves
/// `sum_{k<m} |a_k| (m/k)^sigma = |a_m|`. Both sides are strictly monotone
/// in `sigma`; bisection runs to width `2^{-bits/2}` and reports the outer
/// bracket ends so the enclosure is conservative.
pub fn strip_bounds(p: &DirichletPolynomial, prec: Precision) -> StripBounds {
    let m = p.order();
    if m == 1 {
        return StripBounds::NoZeros;
    }
    let moduli: Vec<(usize, Float)> = p
        .nonzero_terms()
        .map(|(k, a)| (k, prec.float(a.norm_sqr()).sqrt()))
        .collect();
    let a1 = moduli[0].1.clone();
    let am = moduli.last().expect("m >= 2").1.clone();

    // Decreasing in sigma.
    let upper: Vec<(Float, Float)> = moduli[1..]
        .iter()
        .map(|(k, a)| (ln_u64(*k as u64, prec), a.clone()))
        .collect();
    let f_beta = |sigma: &Float| {
        let mut acc = Float::with_val(prec.bits(), -&a1);
        for (ln_k, a) in &upper {
            let t = Float::with_val(prec.bits(), -(Float::with_val(prec.bits(), sigma * ln_k))).exp();
            acc += t * a;
        }
        acc
    };
    // Increasing in sigma.
    let ln_m = ln_u64(m as u64, prec);
    let lower: Vec<(Float, Float)> = moduli[..moduli.len() - 1]
        .iter()
        .map(|(k, a)| (Float::with_val(prec.bits(), &ln_m - ln_u64(*k as u64, prec)), a.clone()))
        .collect();
    let f_alpha = |sigma: &Float| {
        let mut acc = Float::with_val(prec.bits(), -&am);
        for (ln_ratio, a) in &lower {
            let t = Float::with_val(prec.bits(), sigma * ln_ratio).exp();
            acc += t * a;
        }
        acc
    };

    let (_, beta) = bisect(|s| f_beta(s), false, prec);
    let (alpha, _) = bisect(|s| f_alpha(s), true, prec);
    StripBounds::Strip { alpha, beta }
}

/// Bracket `[lo, hi]` of the sign change of a strictly monotone function,
/// grown geometrically from `[-1, 1]`.
fn bisect<F: Fn(&Float) -> Float>(f: F, increasing: bool, prec: Precision) -> (Float, Float) {
    let sign_lo_expected = if increasing { -1 } else { 1 };
    let side = |x: &Float| {
        let v = f(x);
        if v.is_zero() {
            0
        } else if v.is_sign_negative() {
            -1
        } else {
            1
        }
    };
    let mut lo = prec.float(-1);
    let mut hi = prec.float(1);
    while side(&lo) == -sign_lo_expected {
        hi = lo.clone();
        lo *= 2u32;
    }
    while side(&hi) == sign_lo_expected {
        lo = hi.clone();
        hi *= 2u32;
    }
    let tol = prec.half_eps();
    loop {
        let width = Float::with_val(prec.bits(), &hi - &lo);
        if width <= tol {
            break;
        }
        let mid = Float::with_val(prec.bits(), &lo + &hi) / 2u32;
        match side(&mid) {
            0 => return (mid.clone(), mid),
            s if s == sign_lo_expected => lo = mid,
            _ => hi = mid,
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn bounds(coeffs: &[i64]) -> (f64, f64) {
        strip_bounds(&DirichletPolynomial::from_integers(coeffs).unwrap(), prec()).as_f64().unwrap()
    }

    #[test]
    fn constant_has_no_zeros() {
        assert_eq!(strip_bounds(&DirichletPolynomial::one(), prec()), StripBounds::NoZeros);
    }

    #[test]
    fn examples() {
        let (a, b) = bounds(&[1, -1]);
        assert!(a.abs() < 1e-30 && b.abs() < 1e-30);
        let (a, b) = bounds(&[1, -4]);
        assert!((a - 2.0).abs() < 1e-30 && (b - 2.0).abs() < 1e-30);
    }

    #[test]
    fn enclosure_is_ordered_and_conservative() {
        for coeffs in [[1, 3, 0, -2], [5, 1, 1, 1], [1, 0, 0, 9], [2, -7, 1, 1]] {
            let StripBounds::Strip { alpha, beta } =
                strip_bounds(&DirichletPolynomial::from_integers(&coeffs).unwrap(), prec())
            else {
                panic!()
            };
            assert!(alpha <= beta, "{coeffs:?}");
        }
    }
}
