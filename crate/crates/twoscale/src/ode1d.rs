//! Propagation of `(u, u')` across piecewise-polynomial potentials at fixed
//! spectral energy.
//!
//! The equation is `-u'' + q(t) u = E u`, rewritten as `u'' = w(t) u` with
//! `w = q - E`. Constant pieces propagate by the exact entire-function
//! formulas `cosh(√w ℓ)` and `sinh(√w ℓ)/√w`; nonconstant pieces use an
//! 8th-order Runge–Kutta stepper with step halving driven by the transfer
//! matrix determinant defect (the Wronskian is conserved exactly by the
//! equation, so any defect is pure truncation error).

use num_complex::Complex64;

use crate::potential::{poly_eval, PiecewisePotential};
use crate::sampled::SampledFunction;
use crate::{Error, Result};

pub(crate) type Mat2 = [[Complex64; 2]; 2];

/// Relative determinant defect target for a single piece.
const PIECE_DET_TOL: f64 = 1e-13;
/// Below this value of `|w|·ℓ²` the hyperbolic functions are evaluated by
/// their Taylor series to avoid cancellation near `w = 0`.
const SERIES_THRESHOLD: f64 = 1e-4;
/// Endpoint tolerance for inhomogeneous Richardson step control.
const IVP_STEP_TOL: f64 = 1e-12;

/// 2×2 unimodular matrix propagating `(u, u')` from the left to the right
/// endpoint of an interval at fixed energy.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix {
    pub m: Mat2,
    pub interval: (f64, f64),
    pub energy: Complex64,
}

impl TransferMatrix {
    pub fn identity(interval: (f64, f64), energy: Complex64) -> Self {
        Self {
            m: mat_identity(),
            interval,
            energy,
        }
    }

    /// Free propagation over `[a, b]` at energy `E` (`w = -E`).
    pub fn free(energy: Complex64, a: f64, b: f64) -> Self {
        Self {
            m: const_propagator(-energy, b - a),
            interval: (a, b),
            energy,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `|det - 1|` relative to the matrix scale. In deep tunneling regimes the
    /// entries reach `e^{√w ℓ}` and the determinant is a difference of huge
    /// products, so an absolute defect would be meaningless there.
    pub fn det_defect(&self) -> f64 {
        let scale = frobenius_sq(&self.m) / 2.0;
        (self.det() - 1.0).norm() / scale.max(1.0)
    }

    /// `other ∘ self`: first cross `self`'s interval, then `other`'s.
    pub fn then(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m: mat_mul(&other.m, &self.m),
            interval: (self.interval.0, other.interval.1),
            energy: self.energy,
        }
    }

    pub fn apply(&self, u: Complex64, du: Complex64) -> (Complex64, Complex64) {
        (
            self.m[0][0] * u + self.m[0][1] * du,
            self.m[1][0] * u + self.m[1][1] * du,
        )
    }

    /// Inverse using unimodularity: `[[d, -b], [-c, a]]`.
    pub fn inverse(&self) -> TransferMatrix {
        TransferMatrix {
            m: [
                [self.m[1][1], -self.m[0][1]],
                [-self.m[1][0], self.m[0][0]],
            ],
            interval: (self.interval.1, self.interval.0),
            energy: self.energy,
        }
    }
}

/// Solution values `(u, u')` recorded at sorted nodes.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub nodes: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
}

impl SolutionTrace {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(u, u')` at the first node.
    pub fn left(&self) -> (Complex64, Complex64) {
        (self.u[0], self.du[0])
    }

    /// `(u, u')` at the last node.
    pub fn right(&self) -> (Complex64, Complex64) {
        (*self.u.last().unwrap(), *self.du.last().unwrap())
    }

    /// Value at the node closest to `x` (nodes are dense enough for the
    /// callers in this crate; no interpolation fallback).
    pub fn at_node(&self, x: f64) -> Option<(Complex64, Complex64)> {
        let i = self
            .nodes
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - x).abs().partial_cmp(&(**b - x).abs()).unwrap()
            })?
            .0;
        ((self.nodes[i] - x).abs() < 1e-12).then(|| (self.u[i], self.du[i]))
    }
}

/// Transfer matrix of `-u'' + q u = E u` across `[a, b]`.
pub fn transfer_matrix(
    q: &PiecewisePotential,
    energy: Complex64,
    a: f64,
    b: f64,
) -> Result<TransferMatrix> {
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if !energy.re.is_finite() || !energy.im.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let cuts = segment_cuts(q, a, b, &[]);
    let mut m = mat_identity();
    for w in cuts.windows(2) {
        let seg = segment_propagator(q, energy, w[0], w[1]);
        m = mat_mul(&seg, &m);
    }
    Ok(TransferMatrix {
        m,
        interval: (a, b),
        energy,
    })
}

/// Initial-value solve of `-u'' + q u - E u = -rhs` with data `(u0, du0)` at
/// `t0`, traced over `[a, b]`.
///
/// Trace nodes are the q-breakpoints and rhs sample nodes inside `[a, b]`
/// together with `a`, `t0`, `b`. With `rhs = None` the endpoints agree with
/// the transfer-matrix action on the initial vector.
pub fn solve_ivp(
    q: &PiecewisePotential,
    energy: Complex64,
    rhs: Option<&SampledFunction>,
    t0: f64,
    u0: Complex64,
    du0: Complex64,
    a: f64,
    b: f64,
) -> Result<SolutionTrace> {
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if t0 < a || t0 > b {
        return Err(Error::InitialPointOutside { t0, a, b });
    }
    let extra: Vec<f64> = std::iter::once(t0)
        .chain(rhs.iter().flat_map(|f| f.xs.iter().copied()))
        .collect();
    let nodes = segment_cuts(q, a, b, &extra);
    let i0 = nodes
        .iter()
        .position(|&x| (x - t0).abs() < 1e-14)
        .expect("t0 is a node by construction");

    let n = nodes.len();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut du = vec![Complex64::new(0.0, 0.0); n];
    u[i0] = u0;
    du[i0] = du0;

    // Rightward sweep.
    for i in i0..n - 1 {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (nu, ndu) = advance_segment(q, energy, rhs, x0, x1, u[i], du[i]);
        u[i + 1] = nu;
        du[i + 1] = ndu;
    }
    // Leftward sweep.
    for i in (1..=i0).rev() {
        let (x0, x1) = (nodes[i - 1], nodes[i]);
        let (nu, ndu) = retreat_segment(q, energy, rhs, x0, x1, u[i], du[i]);
        u[i - 1] = nu;
        du[i - 1] = ndu;
    }
    Ok(SolutionTrace { nodes, u, du })
}

/// Sorted unique cut points: interval ends, q-breakpoints and extras inside.
fn segment_cuts(q: &PiecewisePotential, a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = vec![a, b];
    cuts.extend(
        q.breakpoints()
            .iter()
            .copied()
            .filter(|&x| x > a && x < b),
    );
    cuts.extend(extra.iter().copied().filter(|&x| x >= a && x <= b));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (b - a).max(1.0));
    cuts
}

/// Propagator across one segment lying inside a single piece (or outside the
/// support entirely).
pub(crate) fn segment_propagator(
    q: &PiecewisePotential,
    energy: Complex64,
    x0: f64,
    x1: f64,
) -> Mat2 {
    let mid = 0.5 * (x0 + x1);
    match q.piece_at(mid) {
        None => const_propagator(-energy, x1 - x0),
        Some((idx, coeffs)) => {
            if q.piece_degree(idx) == 0 {
                const_propagator(Complex64::new(coeffs[0], 0.0) - energy, x1 - x0)
            } else {
                let c = *coeffs;
                rk8_propagator(move |t| Complex64::new(poly_eval(&c, t), 0.0) - energy, x0, x1)
            }
        }
    }
}

fn advance_segment(
    q: &PiecewisePotential,
    energy: Complex64,
    rhs: Option<&SampledFunction>,
    x0: f64,
    x1: f64,
    u: Complex64,
    du: Complex64,
) -> (Complex64, Complex64) {
    let forced = rhs.map_or(false, |f| {
        f.eval(0.5 * (x0 + x1)).norm() > 0.0 || f.eval(x0).norm() > 0.0 || f.eval(x1).norm() > 0.0
    });
    if !forced {
        let m = segment_propagator(q, energy, x0, x1);
        return (
            m[0][0] * u + m[0][1] * du,
            m[1][0] * u + m[1][1] * du,
        );
    }
    let f = rhs.unwrap();
    rk8_forced(q, energy, f, x0, x1, u, du)
}

fn retreat_segment(
    q: &PiecewisePotential,
    energy: Complex64,
    rhs: Option<&SampledFunction>,
    x0: f64,
    x1: f64,
    u: Complex64,
    du: Complex64,
) -> (Complex64, Complex64) {
    let forced = rhs.map_or(false, |f| {
        f.eval(0.5 * (x0 + x1)).norm() > 0.0 || f.eval(x0).norm() > 0.0 || f.eval(x1).norm() > 0.0
    });
    if !forced {
        let m = segment_propagator(q, energy, x0, x1);
        // Inverse via unimodularity.
        let inv = [
            [m[1][1], -m[0][1]],
            [-m[1][0], m[0][0]],
        ];
        return (
            inv[0][0] * u + inv[0][1] * du,
            inv[1][0] * u + inv[1][1] * du,
        );
    }
    let f = rhs.unwrap();
    // Integrate from x1 down to x0 (negative step).
    rk8_forced(q, energy, f, x1, x0, u, du)
}

// ---------------------------------------------------------------------------
// Constant-piece propagator.
// ---------------------------------------------------------------------------

/// Exact propagator of `u'' = w u` over length `len`:
/// `[[cosh(√w ℓ), sinh(√w ℓ)/√w], [√w sinh(√w ℓ), cosh(√w ℓ)]]`,
/// with the `w → 0` continuation handled by Taylor series.
pub(crate) fn const_propagator(w: Complex64, len: f64) -> Mat2 {
    let l = Complex64::new(len, 0.0);
    let z = w * len * len;
    let (c, s) = if z.norm() < SERIES_THRESHOLD {
        // C = Σ zⁿ/(2n)!,  S = ℓ Σ zⁿ/(2n+1)!
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut term_c = Complex64::new(1.0, 0.0);
        let mut term_s = Complex64::new(1.0, 0.0);
        for n in 0..8u32 {
            c += term_c;
            s += term_s;
            let k = 2.0 * n as f64;
            term_c = term_c * z / ((k + 1.0) * (k + 2.0));
            term_s = term_s * z / ((k + 2.0) * (k + 3.0));
        }
        (c, s * l)
    } else {
        let r = w.sqrt();
        ((r * l).cosh(), (r * l).sinh() / r)
    };
    [[c, s], [w * s, c]]
}

// ---------------------------------------------------------------------------
// Cooper–Verner 8th-order Runge–Kutta (11 stages, coefficients in √21).
// ---------------------------------------------------------------------------

pub(crate) const RK8_STAGES: usize = 11;

pub(crate) fn rk8_tableau() -> (&'static [[f64; RK8_STAGES]], &'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static TABLEAU: OnceLock<([[f64; RK8_STAGES]; RK8_STAGES], [f64; RK8_STAGES], [f64; RK8_STAGES])> =
        OnceLock::new();
    let (a, b, c) = TABLEAU.get_or_init(|| {
        let s = 21.0f64.sqrt();
        let mut a = [[0.0; RK8_STAGES]; RK8_STAGES];
        a[1][0] = 0.5;
        a[2][0] = 0.25;
        a[2][1] = 0.25;
        a[3][0] = 1.0 / 7.0;
        a[3][1] = -(7.0 + 3.0 * s) / 98.0;
        a[3][2] = (21.0 + 5.0 * s) / 49.0;
        a[4][0] = (11.0 + s) / 84.0;
        a[4][2] = (18.0 + 4.0 * s) / 63.0;
        a[4][3] = (21.0 - s) / 252.0;
        a[5][0] = (5.0 + s) / 48.0;
        a[5][2] = (9.0 + s) / 36.0;
        a[5][3] = (-231.0 + 14.0 * s) / 360.0;
        a[5][4] = (63.0 - 7.0 * s) / 80.0;
        a[6][0] = (10.0 - s) / 42.0;
        a[6][2] = (-432.0 + 92.0 * s) / 315.0;
        a[6][3] = (633.0 - 145.0 * s) / 90.0;
        a[6][4] = (-504.0 + 115.0 * s) / 70.0;
        a[6][5] = (63.0 - 13.0 * s) / 35.0;
        a[7][0] = 1.0 / 14.0;
        a[7][4] = (14.0 - 3.0 * s) / 126.0;
        a[7][5] = (13.0 - 3.0 * s) / 63.0;
        a[7][6] = 1.0 / 9.0;
        a[8][0] = 1.0 / 32.0;
        a[8][4] = (91.0 - 21.0 * s) / 576.0;
        a[8][5] = 11.0 / 72.0;
        a[8][6] = -(385.0 + 75.0 * s) / 1152.0;
        a[8][7] = (63.0 + 13.0 * s) / 128.0;
        a[9][0] = 1.0 / 14.0;
        a[9][4] = 1.0 / 9.0;
        a[9][5] = -(733.0 + 147.0 * s) / 2205.0;
        a[9][6] = (515.0 + 111.0 * s) / 504.0;
        a[9][7] = -(51.0 + 11.0 * s) / 56.0;
        a[9][8] = (132.0 + 28.0 * s) / 245.0;
        a[10][4] = (-42.0 + 7.0 * s) / 18.0;
        a[10][5] = (-18.0 + 28.0 * s) / 45.0;
        a[10][6] = -(273.0 + 53.0 * s) / 72.0;
        a[10][7] = (301.0 + 53.0 * s) / 72.0;
        a[10][8] = (28.0 - 28.0 * s) / 45.0;
        a[10][9] = (49.0 - 7.0 * s) / 18.0;
        let b = [
            1.0 / 20.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            49.0 / 180.0,
            16.0 / 45.0,
            49.0 / 180.0,
            1.0 / 20.0,
        ];
        let mut c = [0.0; RK8_STAGES];
        for (i, row) in a.iter().enumerate() {
            c[i] = row.iter().sum();
        }
        (a, b, c)
    });
    (a.as_slice(), b.as_slice(), c.as_slice())
}

/// One RK8 step of the matrix equation `M' = A(t) M`, `A = [[0,1],[w,0]]`.
fn rk8_matrix_step(w: &impl Fn(f64) -> Complex64, t: f64, h: f64, m: &Mat2) -> Mat2 {
    let (a, b, c) = rk8_tableau();
    let mut k: [Mat2; RK8_STAGES] = [mat_zero(); RK8_STAGES];
    for i in 0..RK8_STAGES {
        let mut y = *m;
        for j in 0..i {
            if a[i][j] != 0.0 {
                mat_axpy(&mut y, h * a[i][j], &k[j]);
            }
        }
        let wi = w(t + c[i] * h);
        // A·y with A = [[0,1],[w,0]]: top row ← y bottom row, bottom ← w·top.
        k[i] = [
            [y[1][0], y[1][1]],
            [wi * y[0][0], wi * y[0][1]],
        ];
    }
    let mut out = *m;
    for i in 0..RK8_STAGES {
        if b[i] != 0.0 {
            mat_axpy(&mut out, h * b[i], &k[i]);
        }
    }
    out
}

/// Integrates `M' = A(t) M` across `[x0, x1]`, doubling the step count until
/// the determinant defect of the segment matrix drops below target.
pub(crate) fn rk8_propagator(w: impl Fn(f64) -> Complex64, x0: f64, x1: f64) -> Mat2 {
    let len = x1 - x0;
    let wmax = [x0, 0.5 * (x0 + x1), x1, x0 + 0.25 * len, x0 + 0.75 * len]
        .iter()
        .map(|&t| w(t).norm())
        .fold(0.0f64, f64::max);
    let mut n = ((len * wmax.sqrt().max(1.0) * 2.0).ceil() as usize).clamp(8, 1 << 20);
    for round in 0..22 {
        let h = len / n as f64;
        let mut m = mat_identity();
        for i in 0..n {
            m = rk8_matrix_step(&w, x0 + i as f64 * h, h, &m);
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = (frobenius_sq(&m) / 2.0).max(1.0);
        if (det - 1.0).norm() / scale < PIECE_DET_TOL {
            return m;
        }
        if round == 21 {
            log::warn!(
                "rk8 propagator hit the refinement cap on [{x0}, {x1}] (det defect {:.2e})",
                (det - 1.0).norm() / scale
            );
            return m;
        }
        n *= 2;
    }
    unreachable!()
}

/// RK8 on the forced 2-vector system `v' = A(t)v + (0, r(t))` with Richardson
/// step control on the endpoint values. Handles `x1 < x0` (backward sweep).
fn rk8_forced(
    q: &PiecewisePotential,
    energy: Complex64,
    rhs: &SampledFunction,
    x0: f64,
    x1: f64,
    u: Complex64,
    du: Complex64,
) -> (Complex64, Complex64) {
    let wfun = |t: f64| Complex64::new(q.eval(clamp_inside(t, x0, x1)), 0.0) - energy;
    let rfun = |t: f64| rhs.eval(clamp_inside(t, x0, x1));
    let run = |n: usize| -> (Complex64, Complex64) {
        let h = (x1 - x0) / n as f64;
        let (a, b, c) = rk8_tableau();
        let mut v = [u, du];
        for i in 0..n {
            let t = x0 + i as f64 * h;
            let mut k = [[Complex64::new(0.0, 0.0); 2]; RK8_STAGES];
            for s in 0..RK8_STAGES {
                let mut y = v;
                for j in 0..s {
                    if a[s][j] != 0.0 {
                        y[0] += h * a[s][j] * k[j][0];
                        y[1] += h * a[s][j] * k[j][1];
                    }
                }
                let ts = t + c[s] * h;
                k[s] = [y[1], wfun(ts) * y[0] + rfun(ts)];
            }
            for s in 0..RK8_STAGES {
                if b[s] != 0.0 {
                    v[0] += h * b[s] * k[s][0];
                    v[1] += h * b[s] * k[s][1];
                }
            }
        }
        (v[0], v[1])
    };
    let mut n = 16;
    let mut prev = run(n);
    for _ in 0..16 {
        n *= 2;
        let cur = run(n);
        let scale = 1.0 + cur.0.norm().max(cur.1.norm());
        let diff = (cur.0 - prev.0).norm().max((cur.1 - prev.1).norm());
        if diff <= IVP_STEP_TOL * scale {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Keeps stage abscissae strictly inside the segment so that piecewise
/// evaluation never leaks into the neighbouring piece at a breakpoint.
fn clamp_inside(t: f64, x0: f64, x1: f64) -> f64 {
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let nudge = 1e-15 * (hi - lo).max(1.0);
    t.clamp(lo, hi - nudge)
}

// ---------------------------------------------------------------------------
// Small dense 2×2 helpers.
// ---------------------------------------------------------------------------

fn mat_identity() -> Mat2 {
    [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]
}

fn mat_zero() -> Mat2 {
    [[Complex64::new(0.0, 0.0); 2]; 2]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = mat_zero();
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_axpy(y: &mut Mat2, alpha: f64, x: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            y[i][j] += alpha * x[i][j];
        }
    }
}

pub(crate) fn frobenius_sq(m: &Mat2) -> f64 {
    m.iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PiecewisePotential;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn zero_potential() -> PiecewisePotential {
        PiecewisePotential::new(vec![-1.0, 1.0], vec![[0.0; 4]]).unwrap()
    }

    #[test]
    fn tableau_satisfies_quadrature_conditions() {
        let (a, b, c) = rk8_tableau();
        for (i, row) in a.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert_relative_eq!(sum, c[i], epsilon = 1e-13);
        }
        for p in 0..8u32 {
            let lhs: f64 = b
                .iter()
                .zip(c.iter())
                .map(|(&bi, &ci)| bi * ci.powi(p as i32))
                .sum();
            assert_relative_eq!(lhs, 1.0 / (p as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn rk8_is_eighth_order_on_oscillator() {
        // Error against the exact constant-w propagator should drop by ~2^8
        // per step halving before rounding takes over.
        let w = Complex64::new(-9.0, 0.0);
        let exact = const_propagator(w, 1.0);
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut m = mat_identity();
            for i in 0..n {
                m = rk8_matrix_step(&|_| w, i as f64 * h, h, &m);
            }
            (0..2)
                .flat_map(|r| (0..2).map(move |c| (m[r][c] - exact[r][c]).norm()))
                .fold(0.0f64, f64::max)
        };
        let e1 = err(4);
        let e2 = err(8);
        let ratio = e1 / e2;
        assert!(
            e1 > 1e-13 && ratio > 120.0 && ratio < 600.0,
            "e1={e1:.3e} e2={e2:.3e} ratio={ratio:.1}"
        );
    }

    #[test]
    fn free_propagation_matches_trig_formulas() {
        let k = 1.7;
        let l = 2.3;
        let m = transfer_matrix(&zero_potential(), Complex64::new(k * k, 0.0), 0.0, l).unwrap();
        assert_relative_eq!(m.m[0][0].re, (k * l).cos(), epsilon = 1e-12);
        assert_relative_eq!(m.m[0][1].re, (k * l).sin() / k, epsilon = 1e-12);
        assert_relative_eq!(m.m[1][0].re, -k * (k * l).sin(), epsilon = 1e-12);
        assert_relative_eq!(m.m[1][1].re, (k * l).cos(), epsilon = 1e-12);
    }

    #[test]
    fn near_zero_w_reduces_to_shear() {
        let m = const_propagator(Complex64::new(1e-9, 0.0), 0.5);
        assert_relative_eq!(m[0][0].re, 1.0, epsilon = 1e-9);
        assert_relative_eq!(m[0][1].re, 0.5, epsilon = 1e-9);
        assert_relative_eq!(m[1][0].re, 5e-10, epsilon = 1e-12);
    }

    #[test]
    fn cosine_half_bound_state_of_unit_well() {
        // q = -(π/2)²·χ: u = cos(π(t+1)/2) maps (1,0) at t=-1 to (-1,0) at t=1.
        let alpha = -(PI / 2.0) * (PI / 2.0);
        let q = PiecewisePotential::square_well().scale_coupling(alpha);
        let m = transfer_matrix(&q, Complex64::new(0.0, 0.0), -1.0, 1.0).unwrap();
        let (u, du) = m.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert_relative_eq!(u.re, -1.0, epsilon = 1e-12);
        assert!(du.norm() < 1e-12);
    }

    #[test]
    fn determinant_and_composition() {
        let q = PiecewisePotential::new(
            vec![-1.0, -0.2, 0.4, 1.0],
            vec![
                [2.0, 1.0, 0.0, 0.0],
                [-3.0, 0.0, 2.0, 0.5],
                [1.0, -1.0, 0.0, 0.0],
            ],
        )
        .unwrap();
        let e = Complex64::new(3.0, 1.5);
        let m = transfer_matrix(&q, e, -1.0, 1.0).unwrap();
        assert!(m.det_defect() < 1e-12, "defect {:.2e}", m.det_defect());

        let left = transfer_matrix(&q, e, -1.0, 0.1).unwrap();
        let right = transfer_matrix(&q, e, 0.1, 1.0).unwrap();
        let composed = left.then(&right);
        let scale = (frobenius_sq(&m.m) / 2.0).max(1.0).sqrt();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (composed.m[i][j] - m.m[i][j]).norm() / scale < 1e-10,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn continuity_in_energy() {
        let q = PiecewisePotential::dipole().scale_coupling(4.0);
        let e = Complex64::new(7.0, 0.0);
        let d = 1e-8;
        let m0 = transfer_matrix(&q, e, -1.0, 1.0).unwrap();
        let m1 = transfer_matrix(&q, e + d, -1.0, 1.0).unwrap();
        let diff = (0..2)
            .flat_map(|i| (0..2).map(move |j| (m0.m[i][j] - m1.m[i][j]).norm()))
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-6, "jump in E: {diff:.3e}");
    }

    #[test]
    fn homogeneous_ivp_matches_transfer_matrix() {
        let q = PiecewisePotential::new(
            vec![-1.0, 0.0, 1.0],
            vec![[1.0, 2.0, 0.0, 0.0], [0.5, 0.0, -1.0, 0.0]],
        )
        .unwrap();
        let e = Complex64::new(2.0, 0.0);
        let (u0, du0) = (Complex64::new(0.3, 0.0), Complex64::new(-1.1, 0.0));
        let trace = solve_ivp(&q, e, None, -1.0, u0, du0, -1.0, 1.0).unwrap();
        let m = transfer_matrix(&q, e, -1.0, 1.0).unwrap();
        let (ue, due) = m.apply(u0, du0);
        let (ut, dut) = trace.right();
        assert!((ue - ut).norm() < 1e-10);
        assert!((due - dut).norm() < 1e-10);
    }

    #[test]
    fn ivp_with_interior_start_recovers_cosine() {
        let alpha = -(PI / 2.0) * (PI / 2.0);
        let q = PiecewisePotential::square_well().scale_coupling(alpha);
        // Start at t0 = 0 with the cosine's data there and recover both ends.
        let trace = solve_ivp(
            &q,
            Complex64::new(0.0, 0.0),
            None,
            0.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(-PI / 2.0, 0.0),
            -1.0,
            1.0,
        )
        .unwrap();
        let (ul, dul) = trace.left();
        let (ur, dur) = trace.right();
        assert_relative_eq!(ul.re, 1.0, epsilon = 1e-10);
        assert!(dul.norm() < 1e-10);
        assert_relative_eq!(ur.re, -1.0, epsilon = 1e-10);
        assert!(dur.norm() < 1e-10);
    }

    #[test]
    fn zero_data_zero_solution() {
        let q = PiecewisePotential::dipole();
        let trace = solve_ivp(
            &q,
            Complex64::new(0.0, 0.0),
            None,
            -0.3,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            -1.0,
            1.0,
        )
        .unwrap();
        assert!(trace.u.iter().all(|v| v.norm() == 0.0));
        assert!(trace.du.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn double_integration_of_unit_forcing() {
        // -u'' + 0 - 0 = -rhs with rhs ≡ 1 gives u'' = 1, so u = t²/2.
        let q = zero_potential();
        let t_end = 1.5;
        let rhs = SampledFunction::from_real(vec![0.0, t_end], vec![1.0, 1.0]).unwrap();
        let trace = solve_ivp(
            &q,
            Complex64::new(0.0, 0.0),
            Some(&rhs),
            0.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            0.0,
            t_end,
        )
        .unwrap();
        let (u, du) = trace.right();
        assert_relative_eq!(u.re, t_end * t_end / 2.0, epsilon = 1e-10);
        assert_relative_eq!(du.re, t_end, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        let q = zero_potential();
        assert!(transfer_matrix(&q, Complex64::new(0.0, 0.0), 1.0, -1.0).is_err());
        assert!(transfer_matrix(&q, Complex64::new(f64::NAN, 0.0), -1.0, 1.0).is_err());
        assert!(solve_ivp(
            &q,
            Complex64::new(0.0, 0.0),
            None,
            2.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            -1.0,
            1.0
        )
        .is_err());
    }
}
