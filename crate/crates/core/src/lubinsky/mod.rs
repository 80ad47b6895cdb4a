//! The orthonormal Dirichlet system `psi_1 = 1`,
//! `psi_n(t) = n^{1/2 - it} - (n-1)^{1/2 - it}`, under the weight
//! `w(t) = 1 / (2 pi (1/4 + t^2))`, with its kernels and the minimum-norm
//! interpolation problem built on them.

mod kernel;
mod min_norm;

use rug::Float;

use crate::error::{Error, Result};
use crate::mp::{ln_ratio_consecutive, ln_u64, Complex, Precision};

pub use kernel::{
    kernel, kernel_asymptotics_report, kernel_range, kernel_sum, AsymptoticRow, KernelSum, AUDIT_STRIDE, BLOCK_SIZE,
    MP_TERM_LIMIT,
};
pub use min_norm::{kernel_matrix, min_norm, KernelMatrix, MinNormSolution, COEFFS_LIMIT, DUPLICATE_GAP};

/// `psi_n(t)`. The difference of the two powers is rewritten so that nothing
/// cancels when `n` is large and `t ln(n/(n-1))` is small.
pub fn psi_eval(n: u64, t: &Float, prec: Precision) -> Result<Complex> {
    if n == 0 {
        return Err(Error::InvalidArgument("psi index starts at 1".into()));
    }
    if n == 1 {
        return Ok(Complex::one(prec));
    }
    let work = Precision::new(prec.bits() + 32)?;
    let sqrt_n = work.float(n).sqrt();
    let sqrt_prev = work.float(n - 1).sqrt();
    let q = reduced_factor(&sqrt_n, &sqrt_prev, &ln_ratio_consecutive(n, work), t);
    let phase = Complex::cis(&(-Float::with_val(work.bits(), t * &ln_u64(n, work))));
    Ok((&phase * &q).with_precision(prec))
}

/// `psi_n(t) e^{i t ln n} = sqrt(n) - sqrt(n-1) e^{i theta}`, `theta = t ln(n/(n-1))`,
/// written as `1/(sqrt n + sqrt(n-1)) + 2 sqrt(n-1) sin^2(theta/2) - i sqrt(n-1) sin(theta)`.
pub(crate) fn reduced_factor(sqrt_n: &Float, sqrt_prev: &Float, ln_ratio: &Float, t: &Float) -> Complex {
    let p = sqrt_n.prec();
    let mut re = Float::with_val(p, sqrt_n + sqrt_prev);
    re.recip_mut();
    if t.is_zero() {
        return Complex::from_real(re);
    }
    let mut half = Float::with_val(p, t * ln_ratio);
    half >>= 1;
    let (s, c) = half.sin_cos(Float::new(p));
    let mut sq = Float::with_val(p, s.square_ref());
    sq *= sqrt_prev;
    sq <<= 1;
    re += &sq;
    let mut im = Float::with_val(p, &s * &c);
    im *= sqrt_prev;
    im <<= 1;
    im = -im;
    Complex::new(re, im)
}

/// `(1/2 pi) int x^{it} dt / (1/4 + t^2) = min(x, 1/x)^{1/2}`.
pub fn monomial_weighted_inner(x: &Float) -> Result<Float> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::InvalidArgument(format!("monomial ratio must be positive, got {x}")));
    }
    let p = x.prec();
    let m = if *x > 1 { Float::with_val(p, x.recip_ref()) } else { x.clone() };
    Ok(m.sqrt())
}

/// `(1/2 pi) int psi_n conj(psi_m) dt / (1/4 + t^2)` in closed form.
pub fn psi_inner(n: u64, m: u64, prec: Precision) -> Result<Float> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("psi index starts at 1".into()));
    }
    let terms = |k: u64| if k == 1 { vec![(1u64, 1i32)] } else { vec![(k, 1), (k - 1, -1)] };
    let mut acc = prec.float(0);
    for (a, ca) in terms(n) {
        for (b, cb) in terms(m) {
            // a^{1/2-it} conj(b^{1/2-it}) = sqrt(ab) (b/a)^{it}
            let mut ratio = prec.float(b);
            ratio /= a;
            let mut term = monomial_weighted_inner(&ratio)?;
            term *= prec.float(a * b).sqrt();
            if ca * cb < 0 {
                acc -= &term;
            } else {
                acc += &term;
            }
        }
    }
    Ok(acc)
}
