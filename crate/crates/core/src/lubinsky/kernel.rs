//! `K_n(u, v) = sum_{k <= n} psi_k(u) conj(psi_k(v))`.
//!
//! The sum is split at fixed multiples of [`BLOCK_SIZE`] whatever the thread
//! count, and blocks are combined in index order, so results are
//! bit-reproducible with or without the `parallel` feature.

use num_complex::Complex64;
use rug::Float;

use super::{psi_eval, reduced_factor};
use crate::compensated::CompensatedComplexSum;
use crate::error::{Error, Result};
use crate::mp::{ln_ratio_consecutive, ln_u64, Complex, Precision};
use crate::par;

pub const BLOCK_SIZE: u64 = 1 << 16;
/// Terms with index up to this are summed at full precision.
pub const MP_TERM_LIMIT: u64 = 1_000_000;
/// Double-precision terms are checked against full precision at this stride.
pub const AUDIT_STRIDE: u64 = 1 << 20;
/// Extra working bits carried through each block.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSum {
    pub value: Complex,
    pub mp_terms: u64,
    pub f64_terms: u64,
    /// Largest audited relative error of a double-precision term, 0 when none ran.
    pub audit_error: f64,
}

impl KernelSum {
    fn empty(prec: Precision) -> Self {
        KernelSum { value: Complex::zero(prec), mp_terms: 0, f64_terms: 0, audit_error: 0.0 }
    }

    fn absorb(&mut self, other: &KernelSum) {
        self.value += &other.value;
        self.mp_terms += other.mp_terms;
        self.f64_terms += other.f64_terms;
        self.audit_error = self.audit_error.max(other.audit_error);
    }
}

pub fn kernel(n: u64, u: &Float, v: &Float, prec: Precision) -> Result<Complex> {
    Ok(kernel_sum(n, u, v, prec)?.value)
}

pub fn kernel_sum(n: u64, u: &Float, v: &Float, prec: Precision) -> Result<KernelSum> {
    if n == 0 {
        return Err(Error::InvalidArgument("kernel order must be at least 1".into()));
    }
    kernel_range(1, n, u, v, prec)
}

/// Terms `lo..=hi` of the kernel sum.
pub fn kernel_range(lo: u64, hi: u64, u: &Float, v: &Float, prec: Precision) -> Result<KernelSum> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("invalid kernel term range {lo}..={hi}")));
    }
    let work = Precision::new(prec.bits() + GUARD_BITS)?;
    let u = work.float(u);
    let v = work.float(v);
    let first = lo / BLOCK_SIZE;
    let last = hi / BLOCK_SIZE;
    let parts = par::map_range(first as usize..last as usize + 1, |b| {
        let start = (b as u64 * BLOCK_SIZE).max(lo);
        let end = ((b as u64 + 1) * BLOCK_SIZE - 1).min(hi);
        block(start, end, &u, &v, work)
    });
    let mut total = KernelSum::empty(work);
    for part in &parts {
        total.absorb(part);
    }
    let mut value = total.value.with_precision(prec);
    if u == v {
        value.im = prec.float(0);
    }
    Ok(KernelSum { value, ..total })
}

fn block(lo: u64, hi: u64, u: &Float, v: &Float, work: Precision) -> KernelSum {
    let mut out = KernelSum::empty(work);
    let mut lo = lo;
    if lo == 1 {
        out.value.re += 1u32;
        out.mp_terms += 1;
        lo = 2;
    }
    if lo > hi {
        return out;
    }
    let mp_hi = hi.min(MP_TERM_LIMIT);
    if lo <= mp_hi {
        out.value += &mp_block(lo, mp_hi, u, v, work);
        out.mp_terms += mp_hi - lo + 1;
    }
    let f_lo = lo.max(MP_TERM_LIMIT + 1);
    if f_lo <= hi {
        let (sum, audit) = f64_block(f_lo, hi, u, v, work);
        let (re_hi, re_lo) = sum.re.parts();
        let (im_hi, im_lo) = sum.im.parts();
        out.value.re += re_hi;
        out.value.re += re_lo;
        out.value.im += im_hi;
        out.value.im += im_lo;
        out.f64_terms += hi - f_lo + 1;
        out.audit_error = audit;
    }
    out
}

fn mp_block(lo: u64, hi: u64, u: &Float, v: &Float, work: Precision) -> Complex {
    let p = work.bits();
    let diagonal = u == v;
    let needs_ratio = !(u.is_zero() && v.is_zero());
    let shift = Float::with_val(p, u - v);
    let mut ln_k = ln_u64(lo - 1, work);
    let mut sqrt_prev = work.float(lo - 1).sqrt();
    let mut acc = Complex::zero(work);
    let zero = work.float(0);
    for k in lo..=hi {
        let ratio = if needs_ratio { ln_ratio_consecutive(k, work) } else { zero.clone() };
        let sqrt_k = work.float(k).sqrt();
        let qu = reduced_factor(&sqrt_k, &sqrt_prev, &ratio, u);
        if diagonal {
            acc.re += qu.norm_sqr();
        } else {
            let qv = reduced_factor(&sqrt_k, &sqrt_prev, &ratio, v);
            ln_k += &ratio;
            let phase = Complex::cis(&(-Float::with_val(p, &shift * &ln_k)));
            acc += &(&phase * &(&qu * &qv.conj()));
        }
        sqrt_prev = sqrt_k;
    }
    acc
}

/// The reduced factor of `psi_k(t)` in double precision.
fn reduced_factor_f64(k: u64, t: f64) -> Complex64 {
    let s = ((k - 1) as f64).sqrt();
    let a = 1.0 / ((k as f64).sqrt() + s);
    let ratio = (1.0 / (k - 1) as f64).ln_1p();
    let (sin, cos) = (0.5 * t * ratio).sin_cos();
    Complex64::new(a + 2.0 * s * sin * sin, -2.0 * s * sin * cos)
}

fn f64_block(lo: u64, hi: u64, u: &Float, v: &Float, work: Precision) -> (CompensatedComplexSum, f64) {
    let (uf, vf) = (u.to_f64(), v.to_f64());
    let diagonal = u == v;
    let mut acc = CompensatedComplexSum::default();
    let mut audit = 0.0f64;
    for k in lo..=hi {
        let qu = reduced_factor_f64(k, uf);
        let qv = if diagonal { qu } else { reduced_factor_f64(k, vf) };
        let term = if diagonal {
            Complex64::new(qu.norm_sqr(), 0.0)
        } else {
            Complex64::from_polar(1.0, -(uf - vf) * (k as f64).ln()) * qu * qv.conj()
        };
        acc.add(term);
        if k % AUDIT_STRIDE == 0 {
            audit = audit.max(audit_term(k, u, v, term, qu.norm() * qv.norm(), work));
        }
    }
    (acc, audit)
}

/// Relative error of a double-precision term against the direct full-precision
/// product `psi_k(u) conj(psi_k(v))`.
fn audit_term(k: u64, u: &Float, v: &Float, term: Complex64, scale: f64, work: Precision) -> f64 {
    let (Ok(pu), Ok(pv)) = (psi_eval(k, u, work), psi_eval(k, v, work)) else {
        return f64::INFINITY;
    };
    let exact = (&pu * &pv.conj()).to_f64();
    (exact - term).norm() / scale.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRow {
    pub n: u64,
    pub u: Float,
    pub kernel: Float,
    /// `K_n(u,u) / ((1/4 + u^2) ln n)`.
    pub ratio: Float,
    pub audit_error: f64,
}

/// Diagonal kernel along an ascending grid, summing each increment once.
pub fn kernel_asymptotics_report(u: &Float, n_grid: &[u64], prec: Precision) -> Result<Vec<AsymptoticRow>> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n grid must be strictly ascending".into()));
    }
    if n_grid.first().is_some_and(|&n| n < 2) {
        return Err(Error::InvalidArgument("ratio needs n >= 2 (ln 1 = 0)".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut running = prec.float(0);
    let mut audit = 0.0f64;
    let mut done = 0u64;
    let mut weight = Float::with_val(prec.bits(), u.square_ref());
    weight += 0.25;
    for &n in n_grid {
        let part = kernel_range(done + 1, n, u, u, prec)?;
        running += &part.value.re;
        audit = audit.max(part.audit_error);
        done = n;
        let mut denom = ln_u64(n, prec);
        denom *= &weight;
        rows.push(AsymptoticRow {
            n,
            u: prec.float(u),
            kernel: running.clone(),
            ratio: Float::with_val(prec.bits(), &running / &denom),
            audit_error: audit,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compensated::CompensatedSum;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn f(x: f64) -> Float {
        prec().float(x)
    }

    #[test]
    fn small_order_examples() {
        assert_eq!(kernel(1, &f(0.3), &f(-2.0), prec()).unwrap(), Complex::one(prec()));
        let k2 = kernel(2, &f(0.0), &f(0.0), prec()).unwrap();
        let expect = 4u32 - prec().float(8).sqrt();
        assert!(Float::with_val(256, &k2.re - &expect).abs() < prec().pow2_neg(250));
        assert!(k2.im.is_zero());
    }

    #[test]
    fn matches_direct_psi_products() {
        let (u, v) = (f(0.0), f(9.0647));
        for n in [3u64, 50, 300] {
            let mut direct = Complex::zero(prec());
            for k in 1..=n {
                let a = psi_eval(k, &u, prec()).unwrap();
                let b = psi_eval(k, &v, prec()).unwrap();
                direct += &(&a * &b.conj());
            }
            let d = &kernel(n, &u, &v, prec()).unwrap() - &direct;
            assert!(d.abs() < prec().pow2_neg(240), "n={n}");
        }
    }

    #[test]
    fn conjugate_symmetric_and_cauchy_schwarz() {
        let pts = [f(-3.0), f(0.0), f(1.5), f(18.13)];
        for n in [5u64, 200, 5000] {
            for a in &pts {
                for b in &pts {
                    let kab = kernel(n, a, b, prec()).unwrap();
                    let kba = kernel(n, b, a, prec()).unwrap();
                    assert!((&kab - &kba.conj()).abs() < prec().pow2_neg(230));
                    let kaa = kernel(n, a, a, prec()).unwrap().re;
                    let kbb = kernel(n, b, b, prec()).unwrap().re;
                    assert!(kab.norm_sqr() <= Float::with_val(256, &kaa * &kbb));
                }
            }
        }
    }

    #[test]
    fn range_split_is_consistent() {
        let (u, v) = (f(0.7), f(-1.1));
        let whole = kernel_range(1, 200_000, &u, &v, prec()).unwrap();
        let mut parts = kernel_range(1, 70_001, &u, &v, prec()).unwrap();
        parts.absorb(&kernel_range(70_002, 200_000, &u, &v, prec()).unwrap());
        assert!((&whole.value - &parts.value.with_precision(prec())).abs() < prec().pow2_neg(230));
        assert_eq!(whole.mp_terms, 200_000);
    }

    #[test]
    fn diagonal_ratio_trend() {
        let rows = kernel_asymptotics_report(&f(0.0), &[10_000, 100_000, 1_000_000], prec()).unwrap();
        // Independent oracle: naive differences of square roots, compensated.
        let mut oracle = CompensatedSum::new();
        oracle.add(1.0);
        let mut at = Vec::new();
        for k in 2..=1_000_000u64 {
            let d = (k as f64).sqrt() - ((k - 1) as f64).sqrt();
            oracle.add(d * d);
            if k == 10_000 || k == 100_000 || k == 1_000_000 {
                at.push(oracle.value());
            }
        }
        for (row, o) in rows.iter().zip(&at) {
            assert!((row.kernel.to_f64() - o).abs() < 1e-8 * o);
        }
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.to_f64()).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        assert!(ratios[2] >= 1.0 && ratios[2] <= 1.6);
        assert!(kernel_asymptotics_report(&f(0.0), &[10, 5], prec()).is_err());
    }

    #[test]
    fn double_precision_tail_is_audited() {
        let u = f(2.5);
        let lo = AUDIT_STRIDE - 10;
        let s = kernel_range(lo, AUDIT_STRIDE + 10, &u, &f(-0.5), prec()).unwrap();
        assert_eq!(s.f64_terms, 21);
        assert!(s.audit_error < 1e-9, "{}", s.audit_error);
        // Same terms at full precision through the public psi evaluator.
        let mut direct = Complex::zero(prec());
        for k in lo..=AUDIT_STRIDE + 10 {
            let a = psi_eval(k, &u, prec()).unwrap();
            let b = psi_eval(k, &f(-0.5), prec()).unwrap();
            direct += &(&a * &b.conj());
        }
        let d = (&s.value - &direct).abs().to_f64();
        assert!(d < 1e-13 * direct.abs().to_f64(), "{d}");
    }

    #[test]
    fn diagonal_strictly_increases() {
        let u = f(4.0);
        let mut prev = prec().float(0);
        for n in [1u64, 2, 3, 10, 100, 1000] {
            let k = kernel(n, &u, &u, prec()).unwrap().re;
            assert!(k > prev);
            prev = k;
        }
    }
}
