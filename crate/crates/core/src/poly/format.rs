//! Text form `"1:1,2:-1"` and JSON form `{"coeffs": [[k, re, im], ...]}`.

use std::fmt;
use std::str::FromStr;

use rug::Rational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::DirichletPolynomial;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, GaussRational};

impl fmt::Display for DirichletPolynomial {
    /// Canonical form: ascending frequencies, nonzero terms only, exact rationals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in self.nonzero_terms() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{k}:{a}")?;
        }
        Ok(())
    }
}

impl FromStr for DirichletPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
            return Self::from_json_value(&v);
        }
        let mut terms = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, value) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("term {item:?} is not of the form k:value")))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad frequency in {item:?}")))?;
            terms.push((k, parse_complex_literal(value.trim())?));
        }
        if terms.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        Self::from_terms(terms)
    }
}

/// `"re"`, `"re+imi"`, `"re-imi"`, `"imi"`, `"-i"` with rational parts.
pub(crate) fn parse_complex_literal(v: &str) -> Result<GaussRational> {
    let Some(body) = v.strip_suffix('i') else {
        return Ok(GaussRational::real(parse_rational(v)?));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_rational(&body[..i])?, &body[i..]),
        None => (Rational::new(), body),
    };
    let im = match im {
        "" | "+" => Rational::from(1),
        "-" => Rational::from(-1),
        other => parse_rational(other)?,
    };
    Ok(GaussRational::new(re, im))
}

fn rational_from_value(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

impl DirichletPolynomial {
    pub fn to_json_value(&self) -> Value {
        let coeffs: Vec<Value> = self
            .nonzero_terms()
            .map(|(k, a)| json!([k, a.re.to_string(), a.im.to_string()]))
            .collect();
        json!({ "coeffs": coeffs })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let list = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("expected {\"coeffs\": [...]}".into()))?;
        let mut terms = Vec::with_capacity(list.len());
        for entry in list {
            let e = entry
                .as_array()
                .filter(|e| e.len() == 2 || e.len() == 3)
                .ok_or_else(|| Error::Parse(format!("bad coefficient entry {entry}")))?;
            let k = e[0]
                .as_u64()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::Parse(format!("bad frequency in {entry}")))?;
            let re = rational_from_value(&e[1])?;
            let im = match e.get(2) {
                Some(x) => rational_from_value(x)?,
                None => Rational::new(),
            };
            terms.push((k as usize, GaussRational::new(re, im)));
        }
        Self::from_terms(terms)
    }
}

impl Serialize for DirichletPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DirichletPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        match &v {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            _ => Self::from_json_value(&v).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_text_form() {
        let p: DirichletPolynomial = "1:1,2:-1".parse().unwrap();
        assert_eq!(p, DirichletPolynomial::from_integers(&[1, -1]).unwrap());
        let q: DirichletPolynomial = "3:0.5+2i, 1:1, 2:-1/3-i".parse().unwrap();
        assert_eq!(q.order(), 3);
        assert_eq!(q.coeff(2).unwrap().im, Rational::from(-1));
        assert_eq!(q.coeff(3).unwrap().re, Rational::from((1, 2)));
        assert_eq!(q.to_string(), "1:1,2:-1/3-1i,3:1/2+2i");
        let r: DirichletPolynomial = "1:2i,4:1e-2".parse().unwrap();
        assert_eq!(r.coeff(1).unwrap(), &GaussRational::new(Rational::new(), Rational::from(2)));
        assert_eq!(r.coeff(4).unwrap().re, Rational::from((1, 100)));
    }

    #[test]
    fn rejects_malformed_text() {
        assert!("".parse::<DirichletPolynomial>().is_err());
        assert!("1".parse::<DirichletPolynomial>().is_err());
        assert!("0:1".parse::<DirichletPolynomial>().is_err());
        assert!("2:1".parse::<DirichletPolynomial>().is_err());
        assert!("1:x".parse::<DirichletPolynomial>().is_err());
    }

    #[test]
    fn json_form() {
        let p: DirichletPolynomial = r#"{"coeffs": [[1, 1, 0], [2, -1, 0]]}"#.parse().unwrap();
        assert_eq!(p.to_string(), "1:1,2:-1");
        let v = p.to_json_value();
        assert_eq!(DirichletPolynomial::from_json_value(&v).unwrap(), p);
        let q: DirichletPolynomial = serde_json::from_str(r#""1:1,3:2""#).unwrap();
        assert_eq!(q.order(), 3);
    }

    proptest! {
        #[test]
        fn canonical_text_round_trips(
            coeffs in proptest::collection::vec((-50i64..50, 1i64..20, -50i64..50, 1i64..20), 1..7)
        ) {
            let mut dense: Vec<GaussRational> = coeffs
                .iter()
                .map(|&(a, b, c, d)| GaussRational::new(Rational::from((a, b)), Rational::from((c, d))))
                .collect();
            if dense[0].is_zero() {
                dense[0] = GaussRational::one();
            }
            let p = DirichletPolynomial::new(dense).unwrap();
            let back: DirichletPolynomial = p.to_string().parse().unwrap();
            prop_assert_eq!(&back, &p);
            let json = serde_json::to_string(&p).unwrap();
            let back: DirichletPolynomial = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
