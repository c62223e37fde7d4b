//! Functions sampled on a grid of real nodes.

use num_complex::Complex64;

use crate::{Error, Result};

/// A complex-valued function known at sorted real nodes, with linear
/// interpolation between them and zero extension outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub xs: Vec<f64>,
    pub ys: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<Complex64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidGrid(format!(
                "{} nodes but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_real(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let ys = ys.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::new(xs, ys)
    }

    /// Uniform grid on `[-l, l]` with an exact node at 0, sampled from `f`.
    pub fn on_symmetric_grid(l: f64, n_half: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let h = l / n_half as f64;
        let xs: Vec<f64> = (0..=2 * n_half).map(|i| (i as f64 - n_half as f64) * h).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self { xs, ys }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            j if j >= n => n - 2,
            j => j - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let s = (x - x0) / (x1 - x0);
        self.ys[i] * (1.0 - s) + self.ys[i + 1] * s
    }

    /// Discrete L² norm with trapezoid weights.
    pub fn norm_l2(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.xs.len() - 1 {
            let h = self.xs[i + 1] - self.xs[i];
            acc += 0.5 * h * (self.ys[i].norm_sqr() + self.ys[i + 1].norm_sqr());
        }
        acc.sqrt()
    }
}
