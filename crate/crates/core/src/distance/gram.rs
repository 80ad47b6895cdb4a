//! Gram matrix and moment vector of the first `n` generators, plus their
//! decimal JSON form used by on-disk caches.

use rug::{Float, Rational};
use serde_json::{json, Value};

use super::inner::StepInner;
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::mp::{parse_decimal, to_decimal, Complex, Precision};
use crate::par;
use crate::poly::DirichletPolynomial;

pub const CACHE_FORMAT_VERSION: u64 = 1;

/// `G[j][k] = <rho_k, rho_j>` and `g[k] = <1_(0,1), rho_k>` (0-based storage).
#[derive(Debug, Clone, PartialEq)]
pub struct GramEntries {
    matrix: HermitianMatrix,
    moments: Vec<Complex>,
}

impl GramEntries {
    /// Rows are assembled independently, in parallel when enabled.
    pub fn assemble(inner: &StepInner, n: usize) -> Self {
        let prec = inner.precision();
        let rows = par::map_range(0..n, |j| (0..=j).map(|k| inner.rho(k + 1, j + 1)).collect::<Vec<_>>());
        let moments = (1..=n).map(|k| inner.indicator(k).conj()).collect();
        GramEntries { matrix: HermitianMatrix::from_lower_rows(prec, rows), moments }
    }

    pub fn dim(&self) -> usize {
        self.moments.len()
    }

    pub fn precision(&self) -> Precision {
        self.matrix.precision()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn moments(&self) -> &[Complex] {
        &self.moments
    }

    /// First `n` generators of a larger assembly.
    pub fn leading(&self, n: usize) -> GramEntries {
        GramEntries { matrix: self.matrix.leading(n), moments: self.moments[..n].to_vec() }
    }

    /// Incremental mode: appends generator `n + 1` as one bordered row and column.
    pub fn extend(&mut self, inner: &StepInner) {
        let n = self.dim();
        let column: Vec<Complex> = (0..n).map(|k| inner.rho(k + 1, n + 1)).collect();
        let corner = inner.rho(n + 1, n + 1).re;
        self.matrix = self.matrix.bordered(&column, corner);
        self.moments.push(inner.indicator(n + 1).conj());
    }

    /// Versioned JSON with every number as a round-tripping decimal string.
    /// `G` is the lower triangle row by row, `[re, im]` per entry.
    pub fn to_json(&self, poly: &DirichletPolynomial, r: &Rational) -> Value {
        let pair = |z: &Complex| json!([to_decimal(&z.re), to_decimal(&z.im)]);
        let n = self.dim();
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for k in 0..=j {
                lower.push(pair(self.matrix.get(j, k)));
            }
        }
        json!({
            "version": CACHE_FORMAT_VERSION,
            "poly": poly.to_string(),
            "r": r.to_string(),
            "n": n,
            "precision_bits": self.precision().bits(),
            "G": lower,
            "g": self.moments.iter().map(pair).collect::<Vec<_>>(),
        })
    }

    /// Parses [`GramEntries::to_json`] output, checking that it belongs to `(poly, r)`.
    pub fn from_json(v: &Value, poly: &DirichletPolynomial, r: &Rational) -> Result<GramEntries> {
        let bad = |what: &str| Error::CacheFormat(what.to_string());
        if v.get("version").and_then(Value::as_u64) != Some(CACHE_FORMAT_VERSION) {
            return Err(bad("unsupported version"));
        }
        if v.get("poly").and_then(Value::as_str) != Some(poly.to_string().as_str()) {
            return Err(bad("polynomial mismatch"));
        }
        if v.get("r").and_then(Value::as_str) != Some(r.to_string().as_str()) {
            return Err(bad("shift mismatch"));
        }
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing n"))? as usize;
        let bits = v.get("precision_bits").and_then(Value::as_u64).ok_or_else(|| bad("missing precision_bits"))?;
        let prec = Precision::new(bits as u32)?;
        let pair = |z: &Value| -> Result<Complex> {
            let arr = z.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("entry is not a [re, im] pair"))?;
            let part = |x: &Value| -> Result<Float> {
                parse_decimal(x.as_str().ok_or_else(|| bad("entry is not a string"))?, prec)
            };
            Ok(Complex::new(part(&arr[0])?, part(&arr[1])?))
        };
        let lower = v.get("G").and_then(Value::as_array).ok_or_else(|| bad("missing G"))?;
        let moments = v.get("g").and_then(Value::as_array).ok_or_else(|| bad("missing g"))?;
        if lower.len() != n * (n + 1) / 2 || moments.len() != n {
            return Err(bad("dimension mismatch"));
        }
        let mut it = lower.iter();
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let row = (0..=j).map(|_| pair(it.next().expect("length checked"))).collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(GramEntries {
            matrix: HermitianMatrix::from_lower_rows(prec, rows),
            moments: moments.iter().map(pair).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::kappa_partial_sums;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    #[test]
    fn constant_polynomial_matrix() {
        let inner = StepInner::new(kappa_partial_sums(&DirichletPolynomial::one(), &Rational::from(0), prec()));
        let e = GramEntries::assemble(&inner, 2);
        let f = |z: &Complex| z.to_f64();
        assert_eq!(f(e.matrix().get(0, 0)).re, 1.0);
        assert_eq!(f(e.matrix().get(0, 1)).re, 0.5);
        assert_eq!(f(e.matrix().get(1, 1)).re, 0.5);
        assert_eq!(f(&e.moments()[1]).re, 0.5);
    }

    #[test]
    fn extension_matches_assembly() {
        let p = DirichletPolynomial::from_integers(&[1, -2, 1]).unwrap();
        let inner = StepInner::new(kappa_partial_sums(&p, &Rational::from((1, 3)), prec()));
        let mut e = GramEntries::assemble(&inner, 3);
        e.extend(&inner);
        e.extend(&inner);
        assert_eq!(e, GramEntries::assemble(&inner, 5));
        assert_eq!(e.leading(3), GramEntries::assemble(&inner, 3));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let p: DirichletPolynomial = "1:1,2:-1/3+1/2i,3:2".parse().unwrap();
        let r = Rational::from((-1, 4));
        let inner = StepInner::new(kappa_partial_sums(&p, &r, prec()));
        let e = GramEntries::assemble(&inner, 4);
        let v = e.to_json(&p, &r);
        let text = serde_json::to_string(&v).unwrap();
        let back = GramEntries::from_json(&serde_json::from_str(&text).unwrap(), &p, &r).unwrap();
        assert_eq!(back, e);
        assert!(GramEntries::from_json(&v, &p, &Rational::from(0)).is_err());
    }
}
