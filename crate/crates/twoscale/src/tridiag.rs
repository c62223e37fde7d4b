//! Complex tridiagonal systems solved by the Thomas algorithm.
//!
//! The matrices here are discretized Schrödinger operators shifted by a
//! non-real spectral parameter; their leading minors are then never singular,
//! so elimination without pivoting is safe.

use num_complex::Complex64;

/// Tridiagonal matrix with `sub[i] = M[i+1][i]`, `diag[i] = M[i][i]`,
/// `sup[i] = M[i][i+1]`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    pub sub: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub sup: Vec<Complex64>,
}

impl Tridiag {
    pub fn new(n: usize, diag_value: Complex64, off_value: Complex64) -> Self {
        Self {
            sub: vec![off_value; n.saturating_sub(1)],
            diag: vec![diag_value; n],
            sup: vec![off_value; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Conjugate transpose: swap the off-diagonals and conjugate everything.
    pub fn adjoint(&self) -> Tridiag {
        Tridiag {
            sub: self.sup.iter().map(|z| z.conj()).collect(),
            diag: self.diag.iter().map(|z| z.conj()).collect(),
            sup: self.sub.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `M x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Solves `M x = b` by forward elimination and back substitution.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(b.len(), n);
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let mut pivot = self.diag[0];
        debug_assert!(pivot.norm() > 0.0, "singular pivot");
        c[0] = if n > 1 {
            self.sup[0] / pivot
        } else {
            Complex64::new(0.0, 0.0)
        };
        d[0] = b[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.sub[i - 1] * c[i - 1];
            debug_assert!(pivot.norm() > 0.0, "singular pivot at row {i}");
            if i + 1 < n {
                c[i] = self.sup[i] / pivot;
            }
            d[i] = (b[i] - self.sub[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        d
    }
}
