//! Closed-form `L^2(0, inf)` inner products of the generators
//! `rho_k(x) = kappa_r(1/(kx))` and of the indicator of `(0, 1)`.
//!
//! `rho_k` equals `S_a` on `(1/(k(a+1)), 1/(ka)]` for `a < m`, `S_m` on
//! `(0, 1/(km)]` and vanishes for `x > 1/k`, so every integral is a finite sum
//! over the merged breakpoints `1/N`.

use rug::{Assign, Float, Rational};

use crate::exact::GaussRational;
use crate::mp::{Complex, Precision};
use crate::poly::KappaProfile;

/// Inner products of one profile, with the products `S_a conj(S_b)` cached.
#[derive(Debug, Clone)]
pub struct StepInner {
    profile: KappaProfile,
    pairs: Vec<Complex>,
    exact_pairs: Option<Vec<GaussRational>>,
    // int_0^1 kappa_r(1/y) dy
    base: Complex,
    exact_base: Option<GaussRational>,
}

/// One constant piece `(1/N_hi, 1/N_lo]` where both generators sit on fixed levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub lo: u64,
    /// `None` for the last piece, which extends to `0`.
    pub hi: Option<u64>,
    pub level_j: usize,
    pub level_k: usize,
}

/// Pieces of `(0, 1/max(j, k)]` on which `rho_j` and `rho_k` are both constant.
pub fn pieces(m: usize, j: u64, k: u64) -> Vec<Piece> {
    let floor = j.max(k);
    let mut cuts: Vec<u64> = (1..=m as u64)
        .flat_map(|a| [j * a, k * a])
        .filter(|&n| n >= floor)
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let level = |n: u64, g: u64| ((n / g) as usize).min(m);
    cuts.iter()
        .enumerate()
        .map(|(i, &lo)| Piece { lo, hi: cuts.get(i + 1).copied(), level_j: level(lo, j), level_k: level(lo, k) })
        .collect()
}

impl StepInner {
    pub fn new(profile: KappaProfile) -> Self {
        let m = profile.order();
        let prec = profile.precision();
        let sums = profile.partial_sums();
        let mut pairs = Vec::with_capacity(m * m);
        for a in sums {
            for b in sums {
                pairs.push(a * &b.conj());
            }
        }
        let exact_pairs = profile.exact_sums().map(|s| {
            s.iter().flat_map(|a| s.iter().map(move |b| a * &b.conj())).collect::<Vec<_>>()
        });

        let exact_base = profile.exact_sums().map(|s| {
            let mut acc = GaussRational::zero();
            for (i, sj) in s.iter().enumerate() {
                let j = i as i64 + 1;
                let w = if i + 1 < m { Rational::from((1, j * (j + 1))) } else { Rational::from((1, j)) };
                acc += &sj.scale(&w);
            }
            acc
        });
        let base = match &exact_base {
            Some(e) => e.to_complex(prec),
            None => {
                let mut acc = Complex::zero(prec);
                for (i, sj) in sums.iter().enumerate() {
                    let j = i as u64 + 1;
                    let w = if i + 1 < m { prec.float(1) / (j * (j + 1)) } else { prec.float(1) / j };
                    acc += &sj.scale(&w);
                }
                acc
            }
        };
        StepInner { profile, pairs, exact_pairs, base, exact_base }
    }

    pub fn profile(&self) -> &KappaProfile {
        &self.profile
    }

    pub fn precision(&self) -> Precision {
        self.profile.precision()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_pairs.is_some()
    }

    fn order(&self) -> usize {
        self.profile.order()
    }

    /// `<rho_j, rho_k> = int rho_j conj(rho_k)`.
    pub fn rho(&self, j: usize, k: usize) -> Complex {
        if let Some(q) = self.rho_exact(j, k) {
            return q.to_complex(self.precision());
        }
        let m = self.order();
        let p = self.precision().bits();
        let mut acc = Complex::zero(self.precision());
        let mut len = Float::new(p);
        for piece in pieces(m, j as u64, k as u64) {
            let pair = &self.pairs[(piece.level_j - 1) * m + piece.level_k - 1];
            if pair.is_zero() {
                continue;
            }
            match piece.hi {
                Some(hi) => {
                    len.assign(hi - piece.lo);
                    len /= Float::with_val(p, piece.lo) * hi;
                }
                None => {
                    len.assign(1);
                    len /= piece.lo;
                }
            }
            acc.re += Float::with_val(p, &pair.re * &len);
            acc.im += Float::with_val(p, &pair.im * &len);
        }
        acc
    }

    /// Exact `<rho_j, rho_k>` when the profile is exact.
    pub fn rho_exact(&self, j: usize, k: usize) -> Option<GaussRational> {
        let exact = self.exact_pairs.as_ref()?;
        let m = self.order();
        let mut acc = GaussRational::zero();
        for piece in pieces(m, j as u64, k as u64) {
            let pair = &exact[(piece.level_j - 1) * m + piece.level_k - 1];
            if pair.is_zero() {
                continue;
            }
            let len = match piece.hi {
                Some(hi) => Rational::from((hi - piece.lo, piece.lo)) / hi,
                None => Rational::from((1, piece.lo)),
            };
            acc += &pair.scale(&len);
        }
        Some(acc)
    }

    /// `int_0^inf rho_k(x) dx = (1/k) int_0^1 kappa_r(1/y) dy`.
    pub fn indicator(&self, k: usize) -> Complex {
        let mut v = self.base.clone();
        v.re /= k as u64;
        v.im /= k as u64;
        v
    }

    pub fn indicator_exact(&self, k: usize) -> Option<GaussRational> {
        self.exact_base.as_ref().map(|b| b.scale(&Rational::from((1, k as u64))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{kappa_partial_sums, DirichletPolynomial};
    use crate::quadrature::GaussLegendre;
    use num_complex::Complex64;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn inner_for(p: &DirichletPolynomial, r: Rational) -> StepInner {
        StepInner::new(kappa_partial_sums(p, &r, prec()))
    }

    fn close(a: &Complex, re: f64, im: f64, tol: f64) -> bool {
        let z = a.to_f64();
        (z - Complex64::new(re, im)).norm() < tol
    }

    // Pointwise kappa_r(1/(kx)) from the coefficients, independent of the profile code.
    fn generator_f64(a: &[(f64, f64)], r: f64, k: f64, x: f64) -> Complex64 {
        let y = 1.0 / (k * x);
        let top = (y.floor() as usize).min(a.len());
        (1..=top).map(|i| Complex64::new(a[i - 1].0, a[i - 1].1) * (i as f64).powf(0.5 - r)).sum()
    }

    // Adaptive Gauss-Legendre on [lo, hi]; panels that straddle a jump are bisected until tiny.
    fn adaptive<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64, depth: u32) -> Complex64 {
        let gl = GaussLegendre::sixteen();
        let whole: Complex64 = gl.mapped(lo, hi).map(|(x, w)| f(x) * w).sum();
        let mid = 0.5 * (lo + hi);
        let halves: Complex64 =
            gl.mapped(lo, mid).chain(gl.mapped(mid, hi)).map(|(x, w)| f(x) * w).sum();
        if (whole - halves).norm() <= 1e-15 * halves.norm() + 1e-18 * (hi - lo) || depth == 0 {
            halves
        } else {
            adaptive(f, lo, mid, depth - 1) + adaptive(f, mid, hi, depth - 1)
        }
    }

    fn quadrature_rho(a: &[(f64, f64)], r: f64, j: usize, k: usize) -> Complex64 {
        let m = a.len() as f64;
        let top = 1.0 / (j.max(k) as f64);
        let tail = 1.0 / (j.max(k) as f64 * m);
        let f = |x: f64| generator_f64(a, r, j as f64, x) * generator_f64(a, r, k as f64, x).conj();
        // (0, tail] is constant; quadrature handles the rest.
        f(tail * 0.5) * tail + adaptive(&f, tail, top, 56)
    }

    #[test]
    fn constant_polynomial_gives_min_kernel() {
        let s = inner_for(&DirichletPolynomial::one(), Rational::from(0));
        for j in 1..6 {
            for k in 1..6 {
                let q = s.rho_exact(j, k);
                assert!(q.is_none(), "r = 0 takes the float path");
                assert!(close(&s.rho(j, k), 1.0 / j.max(k) as f64, 0.0, 1e-15));
            }
            assert!(close(&s.indicator(j), 1.0 / j as f64, 0.0, 1e-15));
        }
    }

    #[test]
    fn one_minus_two_examples() {
        let p = DirichletPolynomial::from_integers(&[1, -1]).unwrap();
        let s = inner_for(&p, Rational::from(0));
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!(close(&s.rho(1, 1), 2.0 - sqrt2, 0.0, 1e-15));
        assert!(close(&s.indicator(1), 1.0 - sqrt2 / 2.0, 0.0, 1e-15));
        let half = inner_for(&p, Rational::from((1, 2)));
        assert_eq!(half.indicator_exact(1), Some(GaussRational::real(Rational::from((1, 2)))));
    }

    #[test]
    fn agrees_with_adaptive_quadrature() {
        let cases: Vec<(Vec<(f64, f64)>, Vec<i64>, f64)> = vec![
            (vec![(1.0, 0.0), (-1.0, 0.0)], vec![1, -1], 0.0),
            (vec![(1.0, 0.0), (2.0, 0.0), (-3.0, 0.0)], vec![1, 2, -3], -0.75),
            (vec![(2.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)], vec![2, 0, 1, -1], 0.3),
        ];
        for (a, ints, r) in cases {
            let p = DirichletPolynomial::from_integers(&ints).unwrap();
            let rq = Rational::from_f64(r).unwrap();
            let s = inner_for(&p, rq);
            for (j, k) in [(1, 1), (1, 2), (2, 3), (3, 5), (4, 4)] {
                let q = quadrature_rho(&a, r, j, k);
                let v = s.rho(j, k).to_f64();
                assert!((q - v).norm() < 1e-15 * (1.0 + q.norm()), "j={j} k={k} q={q} v={v}");
            }
        }
    }

    #[test]
    fn exact_and_float_paths_agree() {
        let p = DirichletPolynomial::from_integers(&[3, -1, 4, -1, 5]).unwrap();
        // r = 1/2 is exact; the float profile is built by hand at the same r.
        let s = inner_for(&p, Rational::from((1, 2)));
        assert!(s.is_exact());
        for (j, k) in [(1, 1), (2, 7), (6, 3)] {
            let e = s.rho_exact(j, k).unwrap();
            let f = s.rho(j, k);
            assert_eq!(e.to_complex(prec()), f);
            assert_eq!(s.rho_exact(k, j).unwrap(), e.conj());
        }
    }

    #[test]
    fn pieces_cover_support() {
        for (m, j, k) in [(1usize, 1u64, 1u64), (2, 1, 1), (3, 2, 5), (6, 7, 4)] {
            let ps = pieces(m, j, k);
            assert_eq!(ps[0].lo, j.max(k));
            let last = ps.last().unwrap();
            assert!(last.hi.is_none());
            assert_eq!((last.level_j, last.level_k), (m, m));
            for w in ps.windows(2) {
                assert_eq!(w[0].hi, Some(w[1].lo));
            }
        }
    }
}
