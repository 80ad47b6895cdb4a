//! Error-free-transform accumulation in double precision.

use num_complex::Complex64;

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Running sum carrying its rounding error separately.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err += e;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.err += other.err;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.err
    }

    /// Unevaluated pair `(hi, lo)`.
    pub fn parts(&self) -> (f64, f64) {
        two_sum(self.sum, self.err)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedComplexSum {
    pub re: CompensatedSum,
    pub im: CompensatedSum,
}

impl CompensatedComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &CompensatedComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
