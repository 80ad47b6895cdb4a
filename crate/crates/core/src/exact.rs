//! Exact Gaussian-rational arithmetic and rational literal parsing.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::mp::{Complex, Precision};

/// `re + im i` with rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussRational { re, im: Rational::new() }
    }

    pub fn from_i64(re: i64) -> Self {
        Self::real(Rational::from(re))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0().is_eq()
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), Rational::from(-&self.im))
    }

    pub fn norm_sqr(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        GaussRational::new(Rational::from(&self.re * k), Rational::from(&self.im * k))
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        GaussRational::new(Rational::from(&self.re / &n), Rational::from(-&self.im) / n)
    }

    /// Integer power, negative exponents allowed for nonzero values.
    pub fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = GaussRational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_complex(&self, prec: Precision) -> Complex {
        Complex::from_rationals(prec, &self.re, &self.im)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.cmp0().is_eq() {
            write!(f, "{}", self.re)
        } else if self.im.cmp0().is_lt() {
            write!(f, "{}-{}i", self.re, Rational::from(-&self.im))
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &'a GaussRational) -> GaussRational {
        GaussRational::new(Rational::from(&self.re + &rhs.re), Rational::from(&self.im + &rhs.im))
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &'a GaussRational) -> GaussRational {
        GaussRational::new(Rational::from(&self.re - &rhs.re), Rational::from(&self.im - &rhs.im))
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &'a GaussRational) -> GaussRational {
        if self.is_real() && rhs.is_real() {
            return GaussRational::real(Rational::from(&self.re * &rhs.re));
        }
        let re = Rational::from(&self.re * &rhs.re) - Rational::from(&self.im * &rhs.im);
        let im = Rational::from(&self.re * &rhs.im) + Rational::from(&self.im * &rhs.re);
        GaussRational::new(re, im)
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn div(self, rhs: &'a GaussRational) -> GaussRational {
        self * &rhs.recip()
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &GaussRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

/// Parses `"3"`, `"-1/4"`, `"0.125"`, `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if s.contains('/') {
        let q = Rational::from_str(s).map_err(|_| bad())?;
        return Ok(q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(p) => (&digits[..p], &digits[p + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let numer = Integer::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut q = if scale >= 0 {
        Rational::from(numer * ten.pow(scale as u32))
    } else {
        Rational::from((numer, ten.pow(scale.unsigned_abs())))
    };
    if negative {
        q = -q;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_literals() {
        assert_eq!(parse_rational("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_rational("1.5e-3").unwrap(), Rational::from((3, 2000)));
        assert_eq!(parse_rational("2E2").unwrap(), Rational::from(200));
        assert_eq!(parse_rational("-.5").unwrap(), Rational::from((-1, 2)));
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn gaussian_field_operations() {
        let a = GaussRational::new(Rational::from(1), Rational::from(2));
        let b = GaussRational::new(Rational::from((1, 3)), Rational::from(-1));
        let q = &(&a * &b) / &b;
        assert_eq!(q, a);
        assert_eq!(a.powi(-2), (&a * &a).recip());
        assert_eq!(a.to_string(), "1+2i");
        assert_eq!(b.to_string(), "1/3-1i");
    }
}
