//! The distance `d_{n,r}` from `1_(0,1)` to the span of the generators
//! `rho_k(x) = kappa_r(1/(kx))`, `k = 1..n`, in `L^2(0, inf)`.
//!
//! Every `rho_k` vanishes on `x > 1/k`, so the `(0, inf)` integrals coincide
//! with `(0, 1]` integrals and `||1_(0,1)||^2 = 1`.

mod gram;
mod inner;

use std::fmt;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner as dot, DropPolicy, HermitianMatrix, Ldl};
use crate::mp::{ln_u64, Complex, Precision};
use crate::poly::{kappa_partial_sums, DirichletPolynomial};

pub use gram::{GramEntries, CACHE_FORMAT_VERSION};
pub use inner::{pieces, Piece, StepInner};

/// Escalations allowed when pivots land in the indeterminate band.
pub const MAX_ESCALATIONS: u32 = 3;

/// `<rho_j, rho_k>` for `P` and `r`.
pub fn rho_inner(p: &DirichletPolynomial, r: &Rational, j: usize, k: usize, prec: Precision) -> Complex {
    StepInner::new(kappa_partial_sums(p, r, prec)).rho(j, k)
}

/// `int_0^inf rho_k(x) dx`.
pub fn indicator_inner(p: &DirichletPolynomial, r: &Rational, k: usize, prec: Precision) -> Complex {
    StepInner::new(kappa_partial_sums(p, r, prec)).indicator(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DetRatio,
    Projection,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DetRatio => "det-ratio",
            Method::Projection => "projection",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det-ratio" => Ok(Method::DetRatio),
            "projection" => Ok(Method::Projection),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// A factorized Gram system; dependent generators have been dropped.
#[derive(Debug, Clone)]
pub struct GramSystem {
    r: Rational,
    entries: GramEntries,
    factor: Ldl,
    escalations: u32,
}

/// Below this fraction of the largest pivot a column counts as dependent.
fn drop_bits(prec: Precision) -> u32 {
    prec.bits() / 2
}

/// Retained pivots below this fraction of the largest are not trusted.
fn trust_bits(prec: Precision) -> u32 {
    prec.bits() / 4
}

impl GramSystem {
    /// Assembles and factorizes, doubling the precision while the smallest
    /// retained pivot sits between the drop and trust thresholds.
    pub fn build(p: &DirichletPolynomial, r: &Rational, n: usize, prec: Precision) -> Result<GramSystem> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let inner = StepInner::new(kappa_partial_sums(p, r, prec));
        Self::from_entries(p, r, GramEntries::assemble(&inner, n))
    }

    /// Factorizes existing entries (for instance loaded from a cache),
    /// reassembling from `p` only if escalation is needed.
    pub fn from_entries(p: &DirichletPolynomial, r: &Rational, entries: GramEntries) -> Result<GramSystem> {
        let n = entries.dim();
        let mut entries = entries;
        let mut escalations = 0;
        loop {
            let prec = entries.precision();
            let factor = Ldl::factor(entries.matrix(), DropPolicy::Relative { bits: drop_bits(prec) });
            if pivots_trusted(&factor, prec) {
                return Ok(GramSystem { r: r.clone(), entries, factor, escalations });
            }
            if escalations == MAX_ESCALATIONS {
                return Err(Error::PrecisionExhausted { bits: prec.bits() });
            }
            escalations += 1;
            let inner = StepInner::new(kappa_partial_sums(p, r, prec.doubled()));
            entries = GramEntries::assemble(&inner, n);
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn entries(&self) -> &GramEntries {
        &self.entries
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        self.entries.matrix()
    }

    pub fn moments(&self) -> &[Complex] {
        self.entries.moments()
    }

    pub fn precision(&self) -> Precision {
        self.entries.precision()
    }

    pub fn escalations(&self) -> u32 {
        self.escalations
    }

    pub fn factor(&self) -> &Ldl {
        &self.factor
    }

    /// 0-based indices of generators removed as numerically dependent, ascending.
    pub fn dropped(&self) -> Vec<usize> {
        let mut d = self.factor.dropped().to_vec();
        d.sort_unstable();
        d
    }

    /// Smallest retained pivot; `None` when every generator is zero.
    pub fn min_pivot(&self) -> Option<Float> {
        self.factor.min_pivot().cloned()
    }

    pub fn max_pivot(&self) -> Option<Float> {
        self.factor.max_pivot().cloned()
    }

    /// `d^2` by the requested route, clamped to `[0, 1]`.
    pub fn distance(&self, method: Method) -> DistanceResult {
        let prec = self.precision();
        let g = self.moments();
        let (raw, coeffs) = match method {
            Method::Projection => {
                let captured = self.factor.inverse_quadratic_form(g);
                (prec.float(1) - captured, Some(self.factor.solve(g)))
            }
            Method::DetRatio => (self.det_ratio(), None),
        };
        DistanceResult {
            n: self.dim(),
            r: self.r.clone(),
            d_squared: clamp_unit(raw),
            method,
            coeffs,
            precision_bits: prec.bits(),
            min_pivot: self.min_pivot(),
            dropped: self.dropped(),
        }
    }

    /// `det [[G_R, g_R], [g_R*, 1]] / det G_R` from an independent
    /// factorization of the bordered matrix.
    fn det_ratio(&self) -> Float {
        let prec = self.precision();
        let mut keep: Vec<usize> = self.factor.order().to_vec();
        keep.sort_unstable();
        let g = self.moments();
        let size = keep.len();
        let bordered = HermitianMatrix::from_lower(size + 1, prec, |j, k| {
            if j < size {
                self.matrix().get(keep[j], keep[k]).clone()
            } else if k < size {
                g[keep[k]].conj()
            } else {
                Complex::one(prec)
            }
        });
        let full = Ldl::factor(&bordered, DropPolicy::KeepAll);
        if full.rank() < size + 1 {
            // The bordered matrix is numerically singular: the indicator lies in the span.
            return prec.float(0);
        }
        let mut ratio = full.retained_det();
        ratio /= self.factor.retained_det();
        ratio
    }
}

fn pivots_trusted(f: &Ldl, prec: Precision) -> bool {
    match (f.min_pivot(), f.max_pivot()) {
        (Some(lo), Some(hi)) => {
            let floor = Float::with_val(prec.bits(), hi >> trust_bits(prec));
            *lo >= floor
        }
        _ => true,
    }
}

fn clamp_unit(x: Float) -> Float {
    if x.is_sign_negative() || x.is_zero() {
        Float::new(x.prec())
    } else if x > 1 {
        Float::with_val(x.prec(), 1)
    } else {
        x
    }
}

/// `d^2_{n,r}` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub n: usize,
    pub r: Rational,
    pub d_squared: Float,
    pub method: Method,
    /// Projection coefficients `b = G^{-1} g` (zero on dropped generators).
    pub coeffs: Option<Vec<Complex>>,
    pub precision_bits: u32,
    pub min_pivot: Option<Float>,
    pub dropped: Vec<usize>,
}

/// One-shot `d^2_{n,r}`.
pub fn distance_squared(
    p: &DirichletPolynomial,
    r: &Rational,
    n: usize,
    method: Method,
    prec: Precision,
) -> Result<DistanceResult> {
    Ok(GramSystem::build(p, r, n, prec)?.distance(method))
}

/// `||1_(0,1) - sum b_k rho_k||^2 = 1 - 2 Re(b* g) + b* G b` on the first `b.len()` generators.
pub fn approximant_distance(entries: &GramEntries, b: &[Complex]) -> Result<Float> {
    let n = b.len();
    if n > entries.dim() {
        return Err(Error::InvalidArgument(format!("{n} coefficients for a {}-generator system", entries.dim())));
    }
    let prec = entries.precision();
    if n == 0 {
        return Ok(prec.float(1));
    }
    let e = entries.leading(n);
    let cross = dot(e.moments(), b).re;
    let quad = e.matrix().quadratic_form(b);
    let mut v = prec.float(1);
    v -= Float::with_val(prec.bits(), &cross * 2u32);
    v += quad;
    Ok(v)
}

/// Coefficients `b_k = mu_P(k) / k^{r + eps - 1/2}` of the constructive approximant.
pub fn constructive_coefficients(
    p: &DirichletPolynomial,
    r: &Rational,
    epsilon: &Rational,
    n: usize,
    prec: Precision,
) -> Result<Vec<Complex>> {
    let mu = crate::poly::inverse_coeffs(p, n)?;
    let e = prec.float(Rational::from(r + epsilon) - Rational::from((1, 2)));
    Ok(mu
        .exact()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let c = m.to_complex(prec);
            if i == 0 || c.is_zero() {
                return c;
            }
            let w = Float::with_val(prec.bits(), -Float::with_val(prec.bits(), ln_u64(i as u64 + 1, prec) * &e)).exp();
            c.scale(&w)
        })
        .collect())
}

/// `|int_0^1 h(x) x^{s-1} dx - P(s + r - 1/2)/s * sum b_k k^{-s}|` for `h = sum b_k rho_k`.
/// The left side is integrated piece by piece over each generator's steps.
pub fn mellin_identity_residual(
    p: &DirichletPolynomial,
    r: &Rational,
    b: &[Complex],
    s: &Complex,
) -> Result<Float> {
    if s.re.is_zero() || s.re.is_sign_negative() {
        return Err(Error::InvalidArgument("Mellin identity needs Re(s) > 0".into()));
    }
    let prec = s.precision();
    let profile = kappa_partial_sums(p, r, prec);
    let m = profile.order();
    // x^s at x = 1/N for every breakpoint N = k a.
    let ln_cache: std::collections::BTreeMap<u64, Complex> = (1..=b.len() as u64)
        .flat_map(|k| (1..=m as u64).chain(std::iter::once(m as u64 + 1)).map(move |a| k * a))
        .map(|nn| (nn, if nn == 1 { Complex::one(prec) } else { Complex::pow_neg(&ln_u64(nn, prec), s) }))
        .collect();
    let mut lhs = Complex::zero(prec);
    for (ki, bk) in b.iter().enumerate() {
        if bk.is_zero() {
            continue;
        }
        let k = ki as u64 + 1;
        let mut piece_sum = Complex::zero(prec);
        for a in 1..=m as u64 {
            let upper = &ln_cache[&(k * a)];
            let level = profile.sum(a as usize);
            if a < m as u64 {
                let lower = &ln_cache[&(k * (a + 1))];
                piece_sum.add_mul_assign(level, &(upper - lower));
            } else {
                piece_sum.add_mul_assign(level, upper);
            }
        }
        lhs.add_mul_assign(bk, &piece_sum);
    }
    lhs = &lhs / s;

    let shift = prec.float(r - Rational::from((1, 2)));
    let w = Complex::new(Float::with_val(prec.bits(), &s.re + &shift), s.im.clone());
    let mut series = Complex::zero(prec);
    for (ki, bk) in b.iter().enumerate() {
        let k = ki as u64 + 1;
        if k == 1 {
            series += bk;
        } else {
            series.add_mul_assign(bk, &Complex::pow_neg(&ln_u64(k, prec), s));
        }
    }
    let rhs = &(&p.eval(&w) * &series) / s;
    Ok((&lhs - &rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn one_minus_two() -> DirichletPolynomial {
        DirichletPolynomial::from_integers(&[1, -1]).unwrap()
    }

    fn f(x: &Float) -> f64 {
        x.to_f64()
    }

    #[test]
    fn constant_polynomial_has_zero_distance() {
        for r in [Rational::from(-1), Rational::from(0), Rational::from((1, 2))] {
            for n in [1, 2, 7] {
                for method in [Method::Projection, Method::DetRatio] {
                    let d = distance_squared(&DirichletPolynomial::one(), &r, n, method, prec()).unwrap();
                    assert!(d.d_squared < prec().pow2_neg(200), "r={r} n={n} {method}");
                }
            }
        }
    }

    #[test]
    fn one_dimensional_closed_form() {
        let d = distance_squared(&one_minus_two(), &Rational::from(0), 1, Method::Projection, prec()).unwrap();
        let sqrt2 = prec().float(2).sqrt();
        let expect = (sqrt2 + 2u32) / 4u32;
        assert!(Float::with_val(256, &d.d_squared - &expect).abs() < prec().pow2_neg(240));
        let b = d.coeffs.unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn methods_agree_and_decrease() {
        let p: DirichletPolynomial = "1:1,2:-1/2,3:1/3+1/4i".parse().unwrap();
        let r = Rational::from((1, 3));
        let sys = GramSystem::build(&p, &r, 12, prec()).unwrap();
        let mut last = prec().float(1);
        for n in 1..=12 {
            let leading = GramSystem::from_entries(&p, &r, sys.entries().leading(n)).unwrap();
            let a = leading.distance(Method::Projection).d_squared;
            let b = leading.distance(Method::DetRatio).d_squared;
            assert!(Float::with_val(256, &a - &b).abs() < prec().half_eps(), "n={n}");
            assert!(a <= Float::with_val(256, &last + prec().half_eps()));
            last = a;
        }
    }

    #[test]
    fn approximant_reproduces_projection() {
        let p = one_minus_two();
        let r = Rational::from(0);
        let sys = GramSystem::build(&p, &r, 6, prec()).unwrap();
        let d = sys.distance(Method::Projection);
        let v = approximant_distance(sys.entries(), d.coeffs.as_ref().unwrap()).unwrap();
        assert!(Float::with_val(256, &v - &d.d_squared).abs() < prec().pow2_neg(200));
        assert_eq!(approximant_distance(sys.entries(), &[]).unwrap(), 1);
    }

    #[test]
    fn constructive_approximant_improves() {
        let p = one_minus_two();
        let r = Rational::from((1, 2));
        let eps = Rational::from((1, 4));
        let b = constructive_coefficients(&p, &r, &eps, 64, prec()).unwrap();
        let sys = GramSystem::build(&p, &r, 64, prec()).unwrap();
        let at8 = approximant_distance(sys.entries(), &b[..8]).unwrap();
        let at64 = approximant_distance(sys.entries(), &b).unwrap();
        assert!(at64 < at8, "{} vs {}", f(&at64), f(&at8));
    }

    #[test]
    fn mellin_identity_examples() {
        let one = Complex::one(prec());
        let r0 = mellin_identity_residual(&DirichletPolynomial::one(), &Rational::from(0), std::slice::from_ref(&one), &one).unwrap();
        assert!(r0 < prec().pow2_neg(240));
        let half = Complex::from_f64(prec(), 0.5, 0.0);
        let r1 = mellin_identity_residual(&one_minus_two(), &Rational::from(0), &[one], &half).unwrap();
        assert!(r1 < prec().pow2_neg(200));
        assert!(mellin_identity_residual(&one_minus_two(), &Rational::from(0), &[], &Complex::zero(prec())).is_err());
    }

    #[test]
    fn off_line_floor_bounds_distance() {
        // Zero at 0 with r = -1: delta = 1, floor 2/(3/2)^2 = 8/9.
        let p = one_minus_two();
        let r = Rational::from(-1);
        let floor = prec().float(8) / 9u32;
        let sys = GramSystem::build(&p, &r, 24, prec()).unwrap();
        for n in [1, 5, 24] {
            let d = GramSystem::from_entries(&p, &r, sys.entries().leading(n)).unwrap().distance(Method::Projection);
            assert!(d.d_squared >= Float::with_val(256, &floor - prec().half_eps()), "n={n}");
        }
    }

    #[test]
    fn generic_inputs_keep_every_generator() {
        // S_m = 0 here, so every generator has compact support away from 0.
        let sys = GramSystem::build(&one_minus_two(), &Rational::from((1, 2)), 16, prec()).unwrap();
        assert!(sys.dropped().is_empty());
        assert_eq!(sys.escalations(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gram_is_hermitian_psd(
            coeffs in proptest::collection::vec(-5i64..=5, 1..5),
            rnum in -4i64..=4,
            xs in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let mut c = coeffs;
            if c[0] == 0 { c[0] = 1; }
            let p = DirichletPolynomial::from_integers(&c).unwrap();
            let r = Rational::from((rnum, 4));
            let sys = GramSystem::build(&p, &r, 6, Precision::new(128).unwrap()).unwrap();
            prop_assert!(sys.matrix().is_hermitian());
            let x: Vec<Complex> = xs.chunks(2).map(|z| Complex::from_f64(sys.precision(), z[0], z[1])).collect();
            prop_assert!(sys.matrix().quadratic_form(&x) > -sys.precision().pow2_neg(100));
            for d in sys.factor().pivots() {
                prop_assert!(d.is_sign_positive() && !d.is_zero());
            }
        }

        #[test]
        fn distance_is_monotone(coeffs in proptest::collection::vec(-3i64..=3, 2..4), rnum in -2i64..=2) {
            let mut c = coeffs;
            if c[0] == 0 { c[0] = 2; }
            let p = DirichletPolynomial::from_integers(&c).unwrap();
            let r = Rational::from((rnum, 2));
            let prec = Precision::new(128).unwrap();
            let sys = GramSystem::build(&p, &r, 8, prec).unwrap();
            let mut last = prec.float(1);
            for n in 1..=8 {
                let d = GramSystem::from_entries(&p, &r, sys.entries().leading(n)).unwrap().distance(Method::Projection).d_squared;
                prop_assert!(d <= Float::with_val(128, &last + prec.half_eps()));
                last = d;
            }
        }
    }
}
