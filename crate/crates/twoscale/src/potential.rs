//! Piecewise-polynomial potentials of compact support.
//!
//! A [`PiecewisePotential`] is a real function that is a polynomial of degree
//! at most 3 between consecutive breakpoints and identically zero outside the
//! support. Inputs of class 𝒫 (the admissible short-range shapes) must be
//! supported inside `[-1, 1]`; assembled two-scale potentials live on
//! `[-max(ε,ν), max(ε,ν)]`. Moments are evaluated from exact antiderivatives,
//! never by quadrature.

use crate::{Error, Result};

/// Maximum moment order accepted by [`PiecewisePotential::moment`].
pub const MAX_MOMENT: u32 = 4;

const DEDUP_REL_TOL: f64 = 1e-15;

/// A compactly supported real potential stored as polynomial pieces.
///
/// Piece `i` holds coefficients `[c0, c1, c2, c3]` of the polynomial
/// `c0 + c1 t + c2 t² + c3 t³` in the global variable `t`, valid on
/// `[breakpoints[i], breakpoints[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    pieces: Vec<[f64; 4]>,
}

impl PiecewisePotential {
    /// Builds a potential from breakpoints and per-interval coefficients.
    ///
    /// Breakpoints must be finite and strictly increasing, with exactly one
    /// piece per interval.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<[f64; 4]>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPotential(
                "need at least two breakpoints".into(),
            ));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints require {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPotential("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPotential(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    /// Indicator of `[-1, 1]`: the unit square well shape.
    pub fn square_well() -> Self {
        Self::new(vec![-1.0, 1.0], vec![[1.0, 0.0, 0.0, 0.0]]).unwrap()
    }

    /// `+1` on `[-1, 0)`, `-1` on `(0, 1]`: zero mean, first moment −1.
    pub fn dipole() -> Self {
        Self::new(
            vec![-1.0, 0.0, 1.0],
            vec![[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]],
        )
        .unwrap()
    }

    /// `½·χ_[-1,1]`: a unit-mass box, the simplest delta-like shape.
    pub fn box_delta() -> Self {
        Self::new(vec![-1.0, 1.0], vec![[0.5, 0.0, 0.0, 0.0]]).unwrap()
    }

    /// Converts equally spaced samples on `[lo, hi]` to a piecewise-constant
    /// potential, one cell per sample (midpoint rule).
    pub fn from_samples(lo: f64, hi: f64, samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidPotential("no samples".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidPotential("empty sample interval".into()));
        }
        let n = samples.len();
        let width = (hi - lo) / n as f64;
        let breakpoints = (0..=n).map(|i| lo + i as f64 * width).collect();
        let pieces = samples.iter().map(|&v| [v, 0.0, 0.0, 0.0]).collect();
        Self::new(breakpoints, pieces)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[[f64; 4]] {
        &self.pieces
    }

    /// Support bounds `(first breakpoint, last breakpoint)`.
    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Whether the support is contained in `[-1, 1]` (class 𝒫).
    pub fn is_class_p(&self) -> bool {
        let (lo, hi) = self.support();
        lo >= -1.0 && hi <= 1.0
    }

    /// Value at `t`. Zero outside the support; at an interior breakpoint the
    /// right-hand piece wins (a measure-zero convention).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.breakpoints.len();
        if t < self.breakpoints[0] || t > self.breakpoints[n - 1] {
            return 0.0;
        }
        let idx = match self
            .breakpoints
            .partition_point(|&b| b <= t)
        {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        poly_eval(&self.pieces[idx], t)
    }

    /// Largest polynomial degree actually present in piece `idx`.
    pub(crate) fn piece_degree(&self, idx: usize) -> usize {
        let c = &self.pieces[idx];
        (0..4).rev().find(|&k| c[k] != 0.0).unwrap_or(0)
    }

    /// The piece containing `t`, if any (right-continuous at breakpoints).
    pub(crate) fn piece_at(&self, t: f64) -> Option<(usize, &[f64; 4])> {
        piece_index(self, t).map(|i| (i, &self.pieces[i]))
    }

    /// Sup norm over the support (exact for degree ≤ 3 via critical points).
    pub fn sup_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, c) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
            best = best.max(poly_eval(c, lo).abs()).max(poly_eval(c, hi).abs());
            // p' = c1 + 2 c2 t + 3 c3 t²
            let (a, b, d) = (3.0 * c[3], 2.0 * c[2], c[1]);
            if a == 0.0 {
                if b != 0.0 {
                    let t = -d / b;
                    if t > lo && t < hi {
                        best = best.max(poly_eval(c, t).abs());
                    }
                }
            } else {
                let disc = b * b - 4.0 * a * d;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    for t in [(-b + s) / (2.0 * a), (-b - s) / (2.0 * a)] {
                        if t > lo && t < hi {
                            best = best.max(poly_eval(c, t).abs());
                        }
                    }
                }
            }
        }
        best
    }

    /// Exact n-th moment `∫ tⁿ P(t) dt` over the support.
    pub fn moment(&self, n: u32) -> Result<f64> {
        let (lo, hi) = self.support();
        self.moment_between(n, lo, hi)
    }

    /// Exact `∫_{lo}^{hi} tⁿ P(t) dt`, clipped to the support. Infinite bounds
    /// are allowed and clip to the support edge.
    pub fn moment_between(&self, n: u32, lo: f64, hi: f64) -> Result<f64> {
        if n > MAX_MOMENT {
            return Err(Error::MomentDegree(n));
        }
        if !(lo < hi) {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (i, c) in self.pieces.iter().enumerate() {
            let a = self.breakpoints[i].max(lo);
            let b = self.breakpoints[i + 1].min(hi);
            if a >= b {
                continue;
            }
            // ∫ tⁿ Σ c_k t^k dt = Σ c_k (b^{n+k+1} − a^{n+k+1})/(n+k+1)
            for (k, &ck) in c.iter().enumerate() {
                if ck == 0.0 {
                    continue;
                }
                let p = (n as i32 + k as i32 + 1) as f64;
                total += ck * (b.powf(p) - a.powf(p)) / p;
            }
        }
        Ok(total)
    }

    /// The potential `α·P` (same breakpoints, scaled coefficients).
    pub fn scale_coupling(&self, alpha: f64) -> PiecewisePotential {
        PiecewisePotential {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|c| [alpha * c[0], alpha * c[1], alpha * c[2], alpha * c[3]])
                .collect(),
        }
    }
}

pub(crate) fn poly_eval(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

/// Rescales the coefficients of `p(t)` so the result represents
/// `amp · p(x/s)` as a polynomial in `x`.
fn rescale_piece(c: &[f64; 4], s: f64, amp: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    let mut sk = 1.0;
    for k in 0..4 {
        out[k] = amp * c[k] / sk;
        sk *= s;
    }
    out
}

/// Assembles the two-scale potential `V(x) = (α/ε²) Φ(x/ε) + (β/ν) Ψ(x/ν)`.
///
/// The breakpoint set of `V` is the union of the rescaled breakpoints of both
/// inputs (deduplicated at relative tolerance `1e-15·max(ε,ν)` so collisions
/// never produce zero-length pieces). Each resulting piece is the sum of the
/// two rescaled polynomials.
pub fn assemble_scaled(
    phi: &PiecewisePotential,
    psi: &PiecewisePotential,
    alpha: f64,
    beta: f64,
    eps: f64,
    nu: f64,
) -> Result<PiecewisePotential> {
    if !(eps > 0.0) || !(nu > 0.0) {
        return Err(Error::NonpositiveScale { eps, nu });
    }
    let mut cuts: Vec<f64> = phi
        .breakpoints()
        .iter()
        .map(|&b| eps * b)
        .chain(psi.breakpoints().iter().map(|&b| nu * b))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = DEDUP_REL_TOL * eps.max(nu);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);

    let amp_phi = alpha / (eps * eps);
    let amp_psi = beta / nu;
    let mut pieces = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut c = [0.0; 4];
        if let Some(idx) = piece_index(phi, mid / eps) {
            let r = rescale_piece(&phi.pieces()[idx], eps, amp_phi);
            for k in 0..4 {
                c[k] += r[k];
            }
        }
        if let Some(idx) = piece_index(psi, mid / nu) {
            let r = rescale_piece(&psi.pieces()[idx], nu, amp_psi);
            for k in 0..4 {
                c[k] += r[k];
            }
        }
        pieces.push(c);
    }
    PiecewisePotential::new(cuts, pieces)
}

fn piece_index(p: &PiecewisePotential, t: f64) -> Option<usize> {
    let bps = p.breakpoints();
    let n = bps.len();
    if t < bps[0] || t > bps[n - 1] {
        return None;
    }
    Some(match bps.partition_point(|&b| b <= t) {
        0 => 0,
        i if i >= n => n - 2,
        i => i - 1,
    })
}
