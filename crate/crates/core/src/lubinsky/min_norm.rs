//! Kernel matrices `H = (K_n(t_i, t_j))` and the problem
//! `min sum |b_k|^2` subject to `sum_k b_k psi_k(t_i) = 1` for every `i`.
//!
//! With `A[i][k] = psi_k(t_i)` we have `H = A A*`; the minimizer is
//! `A* H^{-1} 1` and the minimum is `1* H^{-1} 1`.

use rug::Float;
use serde_json::{json, Value};

use super::{kernel, psi_eval};
use crate::error::{Error, Result};
use crate::linalg::{factor_definite, HermitianMatrix, Ldl};
use crate::mp::{to_decimal, Complex, Precision};
use crate::par;

/// Ordinates closer than this are rejected.
pub const DUPLICATE_GAP: f64 = 1e-9;
/// Above this order the coefficient vector is not materialized by default.
pub const COEFFS_LIMIT: u64 = 20_000;

#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub n: u64,
    pub t: Vec<Float>,
    pub h: HermitianMatrix,
    factor: Ldl,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn factor(&self) -> &Ldl {
        &self.factor
    }

    pub fn det(&self) -> Float {
        self.factor.retained_det()
    }
}

pub fn kernel_matrix(n: u64, t: &[Float], prec: Precision) -> Result<KernelMatrix> {
    if n == 0 || t.is_empty() {
        return Err(Error::InvalidArgument("kernel matrix needs n >= 1 and at least one ordinate".into()));
    }
    for (i, a) in t.iter().enumerate() {
        for b in &t[..i] {
            if Float::with_val(prec.bits(), a - b).abs() <= DUPLICATE_GAP {
                return Err(Error::DuplicateOrdinates(to_decimal(b), to_decimal(a)));
            }
        }
    }
    let t: Vec<Float> = t.iter().map(|x| prec.float(x)).collect();
    let pairs: Vec<(usize, usize)> = (0..t.len()).flat_map(|j| (0..=j).map(move |k| (j, k))).collect();
    let entries = par::map_slice(&pairs, |&(j, k)| kernel(n, &t[j], &t[k], prec));
    let mut h = HermitianMatrix::zeros(t.len(), prec);
    for (&(j, k), e) in pairs.iter().zip(entries) {
        h.set(j, k, e?);
    }
    let factor = factor_definite(&h, n as usize, prec.bits() / 2)?;
    Ok(KernelMatrix { n, t, h, factor })
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub n: u64,
    pub t: Vec<Float>,
    /// `1* H^{-1} 1`.
    pub value: Float,
    /// `lambda = H^{-1} 1`.
    pub multipliers: Vec<Complex>,
    /// `A* lambda`, when materialized.
    pub coeffs: Option<Vec<Complex>>,
    /// `max_i |sum_k b_k psi_k(t_i) - 1|`, from the coefficients when present
    /// and from `H lambda` otherwise.
    pub interp_residual: Float,
}

impl MinNormSolution {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "t": self.t.iter().map(to_decimal).collect::<Vec<_>>(),
            "value": to_decimal(&self.value),
            "interp_residual": to_decimal(&self.interp_residual),
        })
    }
}

pub fn min_norm(n: u64, t: &[Float], prec: Precision, with_coeffs: bool) -> Result<MinNormSolution> {
    let km = kernel_matrix(n, t, prec)?;
    let ones = vec![Complex::one(prec); km.dim()];
    let lambda = km.factor.solve(&ones);
    let value = km.factor.inverse_quadratic_form(&ones);
    let (coeffs, interp_residual) = if with_coeffs {
        let b = coefficients(n, &km.t, &lambda, prec)?;
        let residual = interpolation_residual(n, &km.t, &b, prec)?;
        let mut norm = prec.float(0);
        for bk in &b {
            norm += bk.norm_sqr();
        }
        let gap = Float::with_val(prec.bits(), &norm - &value).abs();
        if gap > Float::with_val(prec.bits(), &value * &prec.half_eps()) {
            return Err(Error::PrecisionExhausted { bits: prec.bits() });
        }
        (Some(b), residual)
    } else {
        let hl = km.h.mul_vec(&lambda);
        (None, max_deviation_from_one(&hl, prec))
    };
    Ok(MinNormSolution { n, t: km.t, value, multipliers: lambda, coeffs, interp_residual })
}

/// `B_k = sum_i conj(psi_k(t_i)) lambda_i`.
fn coefficients(n: u64, t: &[Float], lambda: &[Complex], prec: Precision) -> Result<Vec<Complex>> {
    par::map_range(0..n as usize, |k| {
        let mut acc = Complex::zero(prec);
        for (ti, li) in t.iter().zip(lambda) {
            acc.add_mul_assign(&psi_eval(k as u64 + 1, ti, prec)?.conj(), li);
        }
        Ok(acc)
    })
    .into_iter()
    .collect()
}

fn interpolation_residual(n: u64, t: &[Float], b: &[Complex], prec: Precision) -> Result<Float> {
    let rows = par::map_slice(t, |ti| {
        let mut acc = Complex::zero(prec);
        for k in 1..=n {
            acc.add_mul_assign(&psi_eval(k, ti, prec)?, &b[k as usize - 1]);
        }
        Ok(acc)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(max_deviation_from_one(&rows, prec))
}

fn max_deviation_from_one(v: &[Complex], prec: Precision) -> Float {
    let one = Complex::one(prec);
    v.iter().map(|x| (x - &one).abs()).fold(prec.float(0), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;
    use crate::lubinsky::kernel_sum;
    use std::f64::consts::{LN_2, PI};

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn lattice(ks: &[i32]) -> Vec<Float> {
        let p = prec();
        let step = Float::with_val(p.bits(), 2 * crate::mp::pi(p)) / p.float(2).ln();
        ks.iter().map(|&k| Float::with_val(p.bits(), &step * k)).collect()
    }

    #[test]
    fn scalar_case_is_reciprocal_kernel() {
        for (n, t) in [(1u64, 0.0), (7, 2.5), (300, -9.0)] {
            let t = [prec().float(t)];
            let s = min_norm(n, &t, prec(), true).unwrap();
            let k = kernel(n, &t[0], &t[0], prec()).unwrap().re;
            let d = Float::with_val(256, &s.value * &k) - 1u32;
            assert!(d.abs() < prec().pow2_neg(240));
            assert!(s.interp_residual < prec().half_eps());
        }
    }

    #[test]
    fn matrix_equals_a_a_star() {
        let n = 40u64;
        let t = lattice(&[0, 1, -2]);
        let km = kernel_matrix(n, &t, prec()).unwrap();
        let rows: Vec<Vec<Complex>> =
            t.iter().map(|ti| (1..=n).map(|k| psi_eval(k, ti, prec()).unwrap()).collect()).collect();
        for i in 0..t.len() {
            for j in 0..t.len() {
                let aa = inner(&rows[i], &rows[j]);
                assert!((&aa - km.h.get(i, j)).abs() < prec().pow2_neg(230));
            }
        }
        assert!(km.h.is_hermitian());
    }

    #[test]
    fn two_point_example() {
        let t = [prec().float(0), prec().float(9.0647)];
        let km = kernel_matrix(2, &t, prec()).unwrap();
        let k00 = 4u32 - prec().float(8).sqrt();
        assert!(Float::with_val(256, &km.h.get(0, 0).re - &k00).abs() < prec().pow2_neg(250));
        let k11 = kernel(2, &t[1], &t[1], prec()).unwrap();
        assert_eq!(km.h.get(1, 1), &k11);
    }

    #[test]
    fn rejects_duplicates_and_reports_singular() {
        let t = [prec().float(1.0), prec().float(1.0 + 1e-10)];
        assert!(matches!(kernel_matrix(10, &t, prec()), Err(Error::DuplicateOrdinates(..))));
        // Three constraints cannot be met by a single coefficient.
        let t = lattice(&[0, 1, 2]);
        assert!(matches!(kernel_matrix(1, &t, prec()), Err(Error::NSingular { n: 1, .. })));
    }

    #[test]
    fn coefficients_interpolate_and_match_value() {
        let t = lattice(&[0, 1, 2]);
        let s = min_norm(64, &t, prec(), true).unwrap();
        assert!(s.interp_residual < prec().half_eps());
        let b = s.coeffs.as_ref().unwrap();
        let norm: Float = b.iter().fold(prec().float(0), |a, x| a + x.norm_sqr());
        assert!(Float::with_val(256, &norm - &s.value).abs() < prec().pow2_neg(200));
        let cheap = min_norm(64, &t, prec(), false).unwrap();
        assert_eq!(cheap.value, s.value);
        assert!(cheap.interp_residual < prec().half_eps());
    }

    #[test]
    fn value_decreases_in_n() {
        let t = lattice(&[0, 1]);
        // psi_1 and psi_2 coincide at both points: 2^{-it} = 1 on the lattice.
        assert!(matches!(min_norm(2, &t, prec(), false), Err(Error::NSingular { n: 2, .. })));
        let mut prev: Option<Float> = None;
        for n in [3u64, 4, 16, 64, 256, 1024] {
            let v = min_norm(n, &t, prec(), false).unwrap().value;
            assert!(v > 0);
            if let Some(p) = prev {
                assert!(v <= p);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn value_times_log_grows_toward_four() {
        let t = [prec().float(0)];
        let mut prev = 0.0;
        for n in [100u64, 10_000, 1_000_000] {
            let v = min_norm(n, &t, prec(), false).unwrap().value.to_f64() * (n as f64).ln();
            assert!(v > prev && v < 4.0, "n={n}: {v}");
            prev = v;
        }
    }

    #[test]
    fn determinant_trend() {
        // det H / (ln n)^2 against (1/4)(1/4 + t^2) for t = (0, 2 pi / ln 2).
        let t = lattice(&[0, 1]);
        let t1 = 2.0 * PI / LN_2;
        let target = 0.25 * (0.25 + t1 * t1);
        let mut gaps = Vec::new();
        for n in [1_000u64, 10_000, 100_000] {
            let det = kernel_matrix(n, &t, prec()).unwrap().det().to_f64();
            let ln = (n as f64).ln();
            gaps.push((det / (ln * ln) - target).abs() / target);
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn off_diagonal_is_small_against_log() {
        let (u, v) = (prec().float(0), prec().float(1.0));
        let mut ratios = Vec::new();
        for n in [1_000u64, 10_000, 100_000] {
            let k = kernel_sum(n, &u, &v, prec()).unwrap().value.abs().to_f64();
            ratios.push(k / (n as f64).ln());
        }
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }
}
