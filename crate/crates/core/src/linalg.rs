//! Dense Hermitian matrices and a diagonally pivoted `L D L*` factorization
//! that drops numerically dependent columns instead of regularizing them.

use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::mp::{Complex, Precision};

/// Full row-major storage; only the lower triangle is read by the factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    prec: Precision,
    data: Vec<Complex>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize, prec: Precision) -> Self {
        HermitianMatrix { n, prec, data: vec![Complex::zero(prec); n * n] }
    }

    /// Builds from the lower triangle `f(j, k)`, `k <= j`, mirroring by conjugation.
    pub fn from_lower<F>(n: usize, prec: Precision, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex,
    {
        let mut m = Self::zeros(n, prec);
        for j in 0..n {
            for k in 0..=j {
                m.set(j, k, f(j, k));
            }
        }
        m
    }

    /// Builds from complete rows `row[j][k]` for `k <= j`.
    pub fn from_lower_rows(prec: Precision, rows: Vec<Vec<Complex>>) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n, prec);
        for (j, row) in rows.into_iter().enumerate() {
            debug_assert_eq!(row.len(), j + 1);
            for (k, v) in row.into_iter().enumerate() {
                m.set(j, k, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn get(&self, j: usize, k: usize) -> &Complex {
        &self.data[j * self.n + k]
    }

    /// Sets `(j, k)` and its mirror `(k, j)`; diagonal entries keep only the real part.
    pub fn set(&mut self, j: usize, k: usize, v: Complex) {
        if j == k {
            self.data[j * self.n + j] = Complex::from_real(v.re);
        } else {
            self.data[k * self.n + j] = v.conj();
            self.data[j * self.n + k] = v;
        }
    }

    /// Leading `n x n` block.
    pub fn leading(&self, n: usize) -> HermitianMatrix {
        assert!(n <= self.n);
        HermitianMatrix::from_lower(n, self.prec, |j, k| self.get(j, k).clone())
    }

    /// Grows by one row and column: `column[k] = (n, k)` for `k < n`, then the diagonal.
    pub fn bordered(&self, column: &[Complex], corner: Float) -> HermitianMatrix {
        assert_eq!(column.len(), self.n);
        let n = self.n + 1;
        HermitianMatrix::from_lower(n, self.prec, |j, k| {
            if j < self.n {
                self.get(j, k).clone()
            } else if k < self.n {
                column[k].clone()
            } else {
                Complex::from_real(corner.clone())
            }
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|j| {
                let mut acc = Complex::zero(self.prec);
                for (k, xk) in x.iter().enumerate() {
                    acc.add_mul_assign(self.get(j, k), xk);
                }
                acc
            })
            .collect()
    }

    /// Real part of `x* A x`, exact up to rounding for Hermitian `A`.
    pub fn quadratic_form(&self, x: &[Complex]) -> Float {
        let ax = self.mul_vec(x);
        inner(&ax, x).re
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|j| {
            self.get(j, j).im.is_zero() && (0..j).all(|k| *self.get(j, k) == self.get(k, j).conj())
        })
    }
}

/// `sum_i a_i conj(b_i)`.
pub fn inner(a: &[Complex], b: &[Complex]) -> Complex {
    let prec = a.first().map(Complex::precision).unwrap_or_default();
    let mut acc = Complex::zero(prec);
    for (x, y) in a.iter().zip(b) {
        acc.add_mul_assign(x, &y.conj());
    }
    acc
}

/// When to stop pivoting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropPolicy {
    /// Keep every positive pivot; stop at the first nonpositive one.
    KeepAll,
    /// Drop all remaining columns once the largest remaining pivot falls
    /// below `2^{-bits}` times the first pivot.
    Relative { bits: u32 },
}

/// `P A P* = L D L*` on the retained columns, with `P` the pivot order.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    prec: Precision,
    /// `order[i]` is the original index eliminated at step `i`.
    order: Vec<usize>,
    /// Strictly lower part of `L`, row-major `rank x rank`.
    l: Vec<Complex>,
    d: Vec<Float>,
    dropped: Vec<usize>,
}

impl Ldl {
    /// Diagonal pivoting on the Schur complement: the largest remaining
    /// diagonal is eliminated next.
    pub fn factor(a: &HermitianMatrix, policy: DropPolicy) -> Ldl {
        let n = a.dim();
        let prec = a.precision();
        let p = prec.bits();
        // Working copy of the lower triangle, permuted in place.
        let mut w: Vec<Vec<Complex>> = (0..n).map(|j| (0..=j).map(|k| a.get(j, k).clone()).collect()).collect();
        let mut idx: Vec<usize> = (0..n).collect();
        let mut d: Vec<Float> = Vec::with_capacity(n);
        let mut max_pivot: Option<Float> = None;
        let mut scratch = Float::new(p);
        let mut rank = n;

        for i in 0..n {
            let mut piv = i;
            for j in i + 1..n {
                if w[j][j].re > w[piv][piv].re {
                    piv = j;
                }
            }
            if piv != i {
                symmetric_swap(&mut w, i, piv);
                idx.swap(i, piv);
            }
            let pivot = w[i][i].re.clone();
            let nonpositive = pivot.is_zero() || pivot.is_sign_negative();
            let drop_here = match (policy, &max_pivot) {
                (DropPolicy::Relative { bits }, Some(maxp)) => nonpositive || pivot < Float::with_val(p, maxp >> bits),
                _ => nonpositive,
            };
            if drop_here {
                rank = i;
                break;
            }
            if max_pivot.is_none() {
                max_pivot = Some(pivot.clone());
            }
            // Column i of L: l_ji = w_ji / d_i.
            for j in i + 1..n {
                w[j][i].re /= &pivot;
                w[j][i].im /= &pivot;
            }
            // Schur update on the trailing lower triangle:
            // w_jk -= l_ji d_i conj(l_ki).
            for j in i + 1..n {
                let (head, tail) = w.split_at_mut(j);
                let row = &mut tail[0];
                let mut lj = row[i].clone();
                lj.scale_assign(&pivot);
                for k in i + 1..j {
                    let lk = &head[k][i];
                    row[k].sub_mul_conj_assign(&lj, lk, &mut scratch);
                }
                // Diagonal: w_jj -= d_i |l_ji|^2.
                let lji = &row[i];
                scratch.assign(lji.re.square_ref());
                scratch += &lji.im * &lji.im;
                scratch *= &pivot;
                row[j].re -= &scratch;
            }
            d.push(pivot);
        }

        let mut l = Vec::with_capacity(rank * rank);
        for j in 0..rank {
            for k in 0..rank {
                l.push(if k < j { w[j][k].clone() } else { Complex::zero(prec) });
            }
        }
        let dropped = idx[rank..].to_vec();
        idx.truncate(rank);
        Ldl { n, prec, order: idx, l, d, dropped }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.order.len()
    }

    pub fn pivots(&self) -> &[Float] {
        &self.d
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Original indices of dropped columns, in the order they would have been eliminated.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn is_full_rank(&self) -> bool {
        self.dropped.is_empty()
    }

    pub fn max_pivot(&self) -> Option<&Float> {
        self.d.first()
    }

    pub fn min_pivot(&self) -> Option<&Float> {
        self.d.iter().min_by(|a, b| a.partial_cmp(b).expect("pivots are finite"))
    }

    fn l_at(&self, j: usize, k: usize) -> &Complex {
        &self.l[j * self.rank() + k]
    }

    /// `y = L^{-1} P b` restricted to retained indices.
    pub fn forward(&self, b: &[Complex]) -> Vec<Complex> {
        assert_eq!(b.len(), self.n);
        let r = self.rank();
        let mut y: Vec<Complex> = self.order.iter().map(|&i| b[i].clone()).collect();
        for j in 0..r {
            let (done, rest) = y.split_at_mut(j);
            let yj = &mut rest[0];
            for (k, yk) in done.iter().enumerate() {
                let t = self.l_at(j, k) * yk;
                *yj -= &t;
            }
        }
        y
    }

    /// Solves `A_R x_R = b_R` on the retained indices; dropped entries of `x` are zero.
    pub fn solve(&self, b: &[Complex]) -> Vec<Complex> {
        let r = self.rank();
        let mut z = self.forward(b);
        for (zi, di) in z.iter_mut().zip(&self.d) {
            zi.re /= di;
            zi.im /= di;
        }
        // Back substitution with L*.
        for j in (0..r).rev() {
            let (head, tail) = z.split_at_mut(j + 1);
            let zj = &mut head[j];
            for (off, zk) in tail.iter().enumerate() {
                let k = j + 1 + off;
                let t = &self.l_at(k, j).conj() * zk;
                *zj -= &t;
            }
        }
        let mut x = vec![Complex::zero(self.prec); self.n];
        for (i, &orig) in self.order.iter().enumerate() {
            x[orig] = z[i].clone();
        }
        x
    }

    /// `b* A_R^{-1} b` computed as `sum |y_i|^2 / d_i`.
    pub fn inverse_quadratic_form(&self, b: &[Complex]) -> Float {
        let y = self.forward(b);
        let mut acc = Float::new(self.prec.bits());
        for (yi, di) in y.iter().zip(&self.d) {
            acc += yi.norm_sqr() / di;
        }
        acc
    }

    /// Determinant of the retained block.
    pub fn retained_det(&self) -> Float {
        let mut acc = self.prec.float(1);
        for di in &self.d {
            acc *= di;
        }
        acc
    }
}

fn symmetric_swap(w: &mut [Vec<Complex>], a: usize, b: usize) {
    debug_assert!(a < b);
    // Entries are stored for k <= j only; read the logical (j, k) through conjugation.
    let n = w.len();
    let get = |w: &[Vec<Complex>], j: usize, k: usize| -> Complex {
        if k <= j {
            w[j][k].clone()
        } else {
            w[k][j].conj()
        }
    };
    let mut updates: Vec<(usize, usize, Complex)> = Vec::with_capacity(2 * n);
    let map = |i: usize| if i == a { b } else if i == b { a } else { i };
    for j in 0..n {
        for k in 0..=j {
            if j == a || j == b || k == a || k == b {
                updates.push((j, k, get(w, map(j), map(k))));
            }
        }
    }
    for (j, k, v) in updates {
        w[j][k] = v;
    }
}

/// Factorization that must keep every column, for matrices that are positive
/// definite in exact arithmetic; names the first failing original index.
pub fn factor_definite(a: &HermitianMatrix, order: usize, drop_bits: u32) -> Result<Ldl> {
    let f = Ldl::factor(a, DropPolicy::Relative { bits: drop_bits });
    match f.dropped().first() {
        Some(&pivot) => Err(Error::NSingular { n: order, pivot }),
        None => Ok(f),
    }
}
