//! Arbitrary-precision real and complex scalars on top of MPFR.
//!
//! `rug::Float` carries its own precision; every [`Complex`] produced by an
//! operation inherits the precision of its left operand. Working precision is
//! chosen per call through [`Precision`], whose default can be changed
//! process-wide with [`Precision::set_global`].

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU32, Ordering};

use num_complex::Complex64;
use rug::float::Round;
use rug::{Assign, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default mantissa length in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

static GLOBAL_PRECISION: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_BITS);

/// Binary mantissa length used for a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS || bits > rug::float::prec_max() {
            return Err(Error::InvalidArgument(format!(
                "precision must be between {} and {} bits, got {bits}",
                Self::MIN_BITS,
                rug::float::prec_max()
            )));
        }
        Ok(Precision(bits))
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Process-wide default, initially 256 bits.
    pub fn global() -> Self {
        Precision(GLOBAL_PRECISION.load(Ordering::Relaxed))
    }

    pub fn set_global(p: Precision) {
        GLOBAL_PRECISION.store(p.0, Ordering::Relaxed);
    }

    pub fn doubled(self) -> Self {
        Precision(self.0.saturating_mul(2).min(rug::float::prec_max()))
    }

    /// `2^{-exp}` at this precision.
    pub fn pow2_neg(self, exp: u32) -> Float {
        let mut x = Float::with_val(self.0, 1);
        x >>= exp;
        x
    }

    /// `2^{-bits/2}`, the agreement tolerance used between independent routes.
    pub fn half_eps(self) -> Float {
        self.pow2_neg(self.0 / 2)
    }

    pub fn float<T>(self, val: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.0, val)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::global()
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Complex number with MPFR real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        Complex::new(Float::new(prec.bits()), Float::new(prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        Complex::new(prec.float(1), Float::new(prec.bits()))
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Complex { re, im }
    }

    pub fn from_f64(prec: Precision, re: f64, im: f64) -> Self {
        Complex::new(prec.float(re), prec.float(im))
    }

    pub fn from_rationals(prec: Precision, re: &Rational, im: &Rational) -> Self {
        Complex::new(prec.float(re), prec.float(im))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn precision(&self) -> Precision {
        Precision(self.re.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), Float::with_val(self.prec(), -&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.prec(), self.re.square_ref());
        n += Float::with_val(self.prec(), self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn scale(&self, k: &Float) -> Self {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_assign(&mut self, k: &Float) {
        self.re *= k;
        self.im *= k;
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        )
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let mag = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Complex::new(c * &mag, s * mag)
    }

    /// `e^{i theta}` at the precision of `theta`.
    pub fn cis(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        Complex::new(c, s)
    }

    /// `k^{-s} = exp(-s ln k)` given `ln k`.
    pub fn pow_neg(ln_k: &Float, s: &Complex) -> Self {
        let p = s.prec();
        let mag = Float::with_val(p, -Float::with_val(p, &s.re * ln_k)).exp();
        let theta = Float::with_val(p, &s.im * ln_k);
        let (sin, cos) = theta.sin_cos(Float::new(p));
        Complex::new(cos * &mag, -(sin * mag))
    }

    /// `self += a * b`.
    pub fn add_mul_assign(&mut self, a: &Complex, b: &Complex) {
        let p = self.prec();
        let mut t = Float::with_val(p, &a.re * &b.re);
        t -= &a.im * &b.im;
        self.re += &t;
        t.assign(&a.re * &b.im);
        t += &a.im * &b.re;
        self.im += &t;
    }

    /// `self -= a * conj(b)`.
    pub fn sub_mul_conj_assign(&mut self, a: &Complex, b: &Complex, scratch: &mut Float) {
        scratch.assign(&a.re * &b.re);
        *scratch += &a.im * &b.im;
        self.re -= &*scratch;
        scratch.assign(&a.im * &b.re);
        *scratch -= &a.re * &b.im;
        self.im -= &*scratch;
    }

    pub fn to_f64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn with_precision(&self, prec: Precision) -> Self {
        Complex::new(prec.float(&self.re), prec.float(&self.im))
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{}-{}i", to_decimal(&self.re), to_decimal(&Float::with_val(self.prec(), -&self.im)))
        } else {
            write!(f, "{}+{}i", to_decimal(&self.re), to_decimal(&self.im))
        }
    }
}

macro_rules! complex_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a Complex> for &'a Complex {
            type Output = Complex;
            fn $method(self, rhs: &'a Complex) -> Complex {
                let f: fn(&Complex, &Complex) -> Complex = $body;
                f(self, rhs)
            }
        }
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &'a Complex) -> Complex {
                (&self).$method(rhs)
            }
        }
    };
}

complex_binop!(Add, add, |a, b| {
    let p = a.prec();
    Complex::new(Float::with_val(p, &a.re + &b.re), Float::with_val(p, &a.im + &b.im))
});
complex_binop!(Sub, sub, |a, b| {
    let p = a.prec();
    Complex::new(Float::with_val(p, &a.re - &b.re), Float::with_val(p, &a.im - &b.im))
});
complex_binop!(Mul, mul, |a, b| {
    let mut out = Complex::zero(a.precision());
    out.add_mul_assign(a, b);
    out
});
complex_binop!(Div, div, |a, b| {
    let p = a.prec();
    let n = b.norm_sqr();
    let mut re = Float::with_val(p, &a.re * &b.re);
    re += &a.im * &b.im;
    let mut im = Float::with_val(p, &a.im * &b.re);
    im -= &a.re * &b.im;
    re /= &n;
    im /= &n;
    Complex::new(re, im)
});

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Complex> for Complex {
    fn mul_assign(&mut self, rhs: &Complex) {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= &self.im * &rhs.im;
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += &self.im * &rhs.re;
        self.re = re;
        self.im = im;
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

/// Shortest decimal string that reads back to the same value at the same
/// precision.
pub fn to_decimal(x: &Float) -> String {
    if x.is_zero() {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    x.to_string_radix(10, None)
}

/// Parses a decimal string at the given precision, rounding to nearest.
pub fn parse_decimal(s: &str, prec: Precision) -> Result<Float> {
    let parsed = Float::parse(s.trim())
        .map_err(|e| Error::Parse(format!("invalid number {s:?}: {e}")))?;
    let (f, _) = Float::with_val_round(prec.bits(), parsed, Round::Nearest);
    Ok(f)
}

/// Natural logarithm of a positive integer.
pub fn ln_u64(k: u64, prec: Precision) -> Float {
    prec.float(k).ln()
}

/// `ln(k / (k - 1))` for `k >= 2`, by the odd series of `2 atanh(1 / (2k - 1))`.
/// Much cheaper than a general logarithm once `k` is moderately large.
pub fn ln_ratio_consecutive(k: u64, prec: Precision) -> Float {
    debug_assert!(k >= 2);
    if k < 64 {
        let mut q = prec.float(k);
        q /= k - 1;
        return q.ln();
    }
    let p = prec.bits() + 16;
    let mut y = Float::with_val(p, 1);
    y /= 2 * k - 1;
    let y2 = Float::with_val(p, y.square_ref());
    let mut sum = y.clone();
    let mut pow = y;
    let mut j = 1u32;
    let limit = Float::with_val(p, sum.abs_ref()) >> p;
    loop {
        pow *= &y2;
        let term = Float::with_val(p, &pow / (2 * j + 1));
        if term.is_zero() || Float::with_val(p, term.abs_ref()) < limit {
            break;
        }
        sum += &term;
        j += 1;
    }
    sum <<= 1;
    prec.float(&sum)
}

/// Pi at the given precision.
pub fn pi(prec: Precision) -> Float {
    prec.float(rug::float::Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_ratio_matches_direct_log() {
        let prec = Precision::new(256).unwrap();
        for k in [2u64, 63, 64, 65, 1000, 123_457, 1_000_000] {
            let fast = ln_ratio_consecutive(k, prec);
            let direct = (prec.float(k) / prec.float(k - 1)).ln();
            let diff = Float::with_val(256, &fast - &direct).abs();
            assert!(diff < prec.pow2_neg(250), "k={k}");
        }
    }

    #[test]
    fn decimal_round_trip() {
        let prec = Precision::new(256).unwrap();
        let x = prec.float(2).sqrt();
        let s = to_decimal(&x);
        assert_eq!(parse_decimal(&s, prec).unwrap(), x);
    }

    #[test]
    fn complex_division_inverts_multiplication() {
        let prec = Precision::new(128).unwrap();
        let a = Complex::from_f64(prec, 1.5, -2.0);
        let b = Complex::from_f64(prec, 0.25, 3.0);
        let q = &(&a * &b) / &b;
        let d = (&q - &a).abs();
        assert!(d < prec.pow2_neg(120));
    }

    #[test]
    fn pow_neg_matches_exp() {
        let prec = Precision::new(128).unwrap();
        let s = Complex::from_f64(prec, 0.5, 14.0);
        let ln2 = ln_u64(2, prec);
        let direct = (-(s.scale(&ln2))).exp();
        let d = (&Complex::pow_neg(&ln2, &s) - &direct).abs();
        assert!(d < prec.pow2_neg(120));
    }

    #[test]
    fn precision_bounds() {
        assert!(Precision::new(32).is_err());
        assert_eq!(Precision::new(256).unwrap().doubled().bits(), 512);
    }
}
