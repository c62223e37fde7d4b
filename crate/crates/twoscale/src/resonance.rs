//! Resonant couplings, half-bound states, and the coupling maps that feed the
//! limit interface condition.
//!
//! A coupling `α` is resonant for a shape `Φ` when the zero-energy equation
//! `-u'' + αΦu = 0` has a bounded nontrivial solution on the line; restricted
//! to `[-1, 1]` this is the Neumann problem `u'(-1) = u'(1) = 0`. The solution
//! normalized to `u(-1) = 1` is the half-bound state; its right plateau value
//! `θ = u(1)` is the jump factor of the limit interface condition, and the
//! maps [`zeta`], [`kappa`], [`mu`] give the regime-dependent coupling that
//! multiplies `β` there.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ode1d::{segment_propagator, solve_ivp, transfer_matrix, SolutionTrace};
use crate::potential::PiecewisePotential;
use crate::quad::{gauss15, integrate};
use crate::{Error, Result};

/// Default tolerance on the relative shooting defect for resonance membership.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-10;

const ROOT_REFINE_REL: f64 = 1e-12;
const MAX_REFINE_ITER: usize = 200;

/// Scaling regime of the two-scale family, classified by the limit of
/// `η = ν/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    /// `η → ∞`: the delta-like term contracts slowly relative to the
    /// delta-prime-like one.
    SlowDelta,
    /// `η → λ` with `0 < λ < ∞`: both scales comparable.
    Comparable { lambda: f64 },
    /// `η → 0`: the delta-like term contracts fast.
    FastDelta,
}

impl Regime {
    /// Validates the finite-ratio payload.
    pub fn validate(&self) -> Result<()> {
        match self {
            Regime::Comparable { lambda } if !(*lambda > 0.0) => {
                Err(Error::NonpositiveLambda(*lambda))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::SlowDelta => write!(f, "slow"),
            Regime::Comparable { lambda } => write!(f, "comparable({lambda})"),
            Regime::FastDelta => write!(f, "fast"),
        }
    }
}

/// A resonant coupling together with its normalized half-bound state.
#[derive(Debug, Clone)]
pub struct HalfBoundState {
    /// The resonant coupling.
    pub alpha: f64,
    /// Dense trace of `(u, u')` on `[-1, 1]`, normalized `u(-1) = 1`.
    pub trace: SolutionTrace,
    /// Right plateau value `θ = u(1)`.
    pub theta: f64,
    /// `u(0)`.
    pub u_at_zero: f64,
    /// Shooting defect `|u'(1)|`.
    pub residual: f64,
    /// The scaled potential `αΦ`, kept for exact pointwise evaluation.
    scaled: PiecewisePotential,
    /// `(u, u')` cached at the evaluation nodes (support breakpoints and ±1).
    cache_nodes: Vec<f64>,
    cache_values: Vec<(f64, f64)>,
}

impl HalfBoundState {
    /// Exact value of the half-bound state at any `x`, extended by its
    /// plateau constants outside `[-1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.cache_nodes[0] {
            return 1.0;
        }
        if x >= *self.cache_nodes.last().unwrap() {
            return self.theta;
        }
        let j = match self.cache_nodes.partition_point(|&b| b <= x) {
            0 => 0,
            i => i - 1,
        };
        let x0 = self.cache_nodes[j];
        let (u, du) = self.cache_values[j];
        if x == x0 {
            return u;
        }
        let m = segment_propagator(&self.scaled, Complex64::new(0.0, 0.0), x0, x);
        (m[0][0] * u + m[0][1] * du).re
    }

    /// Sup norm of `u` over the line (plateaus included), from the dense trace.
    pub fn sup_norm(&self) -> f64 {
        self.trace
            .u
            .iter()
            .map(|v| v.re.abs())
            .fold(1.0f64.max(self.theta.abs()), f64::max)
    }

    /// `max(‖u‖_∞, ‖u'‖_∞)` over `[-1, 1]`, used to scale defect tolerances.
    pub fn c1_norm(&self) -> f64 {
        self.trace
            .u
            .iter()
            .chain(self.trace.du.iter())
            .map(|v| v.re.abs())
            .fold(0.0f64, f64::max)
    }
}

/// Shoots the Neumann data across `[-1, 1]`: returns `(u(1), u'(1))` for the
/// solution of `-u'' + αΦu = 0` with `u(-1) = 1`, `u'(-1) = 0`.
///
/// `α` is resonant exactly when the derivative component vanishes.
pub fn shoot(phi: &PiecewisePotential, alpha: f64) -> (f64, f64) {
    assert!(
        phi.is_class_p(),
        "shoot requires a class-P potential supported in [-1, 1]"
    );
    let q = phi.scale_coupling(alpha);
    let m = transfer_matrix(&q, Complex64::new(0.0, 0.0), -1.0, 1.0)
        .expect("fixed interval is valid");
    let (u, du) = m.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    (u.re, du.re)
}

/// Finds the resonant couplings in `[amin, amax]` by scanning the shooting
/// defect on a uniform grid and refining every sign change with a bracketed
/// secant/bisection hybrid. Zero is always included when the range contains
/// it (the constant solution makes it resonant for every shape).
///
/// Two roots inside one scan cell cannot be bracketed; a midpoint probe
/// recovers the detectable cases and logs a warning for the suspicious ones.
/// Increase `scan_points` if that warning fires.
pub fn find_resonances(
    phi: &PiecewisePotential,
    amin: f64,
    amax: f64,
    scan_points: usize,
) -> Result<Vec<f64>> {
    if !(amin < amax) {
        return Err(Error::InvalidScan(format!("empty range [{amin}, {amax}]")));
    }
    if scan_points < 2 {
        return Err(Error::InvalidScan("need at least 2 scan points".into()));
    }
    let n = scan_points;
    let step = (amax - amin) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| amin + i as f64 * step).collect();
    let defect: Vec<f64> = grid.par_iter().map(|&a| shoot(phi, a).1).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n - 1 {
        let (a0, a1) = (grid[i], grid[i + 1]);
        let (g0, g1) = (defect[i], defect[i + 1]);
        if g0 == 0.0 {
            roots.push(a0);
            continue;
        }
        if i == n - 2 && g1 == 0.0 {
            roots.push(a1);
        }
        if g0 * g1 < 0.0 {
            roots.push(refine_root(phi, a0, a1, g0, g1));
        } else {
            // Same sign at both ends: probe the midpoint for a hidden pair.
            let mid = 0.5 * (a0 + a1);
            let gm = shoot(phi, mid).1;
            if gm != 0.0 && gm.signum() != g0.signum() {
                roots.push(refine_root(phi, a0, mid, g0, gm));
                roots.push(refine_root(phi, mid, a1, gm, g1));
            } else if gm.abs() < 1e-3 * g0.abs().min(g1.abs()) {
                log::warn!(
                    "possible unresolved resonance pair in [{a0:.6}, {a1:.6}]; \
                     increase scan_points"
                );
            }
        }
    }

    if amin <= 0.0 && 0.0 <= amax {
        // Snap near-zero artifacts onto the exact root at 0.
        roots.retain(|r| r.abs() > 0.5 * step.abs().min(1e-6));
        roots.push(0.0);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-8 * (1.0 + amax.abs().max(amin.abs())));
    Ok(roots)
}

fn refine_root(phi: &PiecewisePotential, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> f64 {
    debug_assert!(ga * gb < 0.0);
    let mut best = if ga.abs() < gb.abs() { a } else { b };
    let mut best_g = ga.abs().min(gb.abs());
    for _ in 0..MAX_REFINE_ITER {
        // Secant candidate, falling back to bisection when it leaves the
        // bracket or fails to shrink it decisively.
        let secant = a - ga * (b - a) / (gb - ga);
        let mid = 0.5 * (a + b);
        let width = b - a;
        let c = if secant > a + 0.01 * width && secant < b - 0.01 * width {
            secant
        } else {
            mid
        };
        let (uc, gc) = shoot(phi, c);
        let scale = 1.0 + uc.abs();
        if gc.abs() < best_g {
            best = c;
            best_g = gc.abs();
        }
        if gc == 0.0
            || gc.abs() <= ROOT_REFINE_REL * scale
            || width <= f64::EPSILON * (1.0 + c.abs())
        {
            return if gc.abs() <= best_g { c } else { best };
        }
        if ga * gc < 0.0 {
            b = c;
            gb = gc;
        } else {
            a = c;
            ga = gc;
        }
    }
    best
}

/// Builds the normalized half-bound state at a resonant coupling.
///
/// Fails with [`Error::NotResonant`] when the shooting defect exceeds
/// `tol · max(‖u‖_∞, ‖u'‖_∞)`: membership of the resonant set is a declared,
/// checked input, not an inference.
pub fn half_bound_state(
    phi: &PiecewisePotential,
    alpha: f64,
    tol: f64,
) -> Result<HalfBoundState> {
    assert!(
        phi.is_class_p(),
        "half_bound_state requires a class-P potential"
    );
    let scaled = phi.scale_coupling(alpha);
    let trace = dense_trace(&scaled)?;
    let (u1, du1) = trace.right();
    let c1 = trace
        .u
        .iter()
        .chain(trace.du.iter())
        .map(|v| v.re.abs())
        .fold(0.0f64, f64::max);
    let residual = du1.re.abs();
    if residual > tol * c1.max(1.0) {
        return Err(Error::NotResonant {
            alpha,
            residual,
            tol: tol * c1.max(1.0),
        });
    }
    let theta = u1.re;
    if theta.abs() < 1e-9 * c1.max(1.0) {
        return Err(Error::DegenerateHalfBoundState(alpha));
    }
    let u_at_zero = trace
        .at_node(0.0)
        .map(|(u, _)| u.re)
        .expect("0 is a trace node");

    // Cache (u, u') at the evaluation nodes: -1, breakpoints, 1.
    let mut cache_nodes: Vec<f64> = vec![-1.0, 1.0];
    cache_nodes.extend(scaled.breakpoints().iter().copied());
    let cache_nodes = dedup_sorted(cache_nodes);
    let mut cache_values = Vec::with_capacity(cache_nodes.len());
    for &x in &cache_nodes {
        let (u, du) = trace.at_node(x).expect("breakpoints are trace nodes");
        cache_values.push((u.re, du.re));
    }

    Ok(HalfBoundState {
        alpha,
        trace,
        theta,
        u_at_zero,
        residual,
        scaled,
        cache_nodes,
        cache_values,
    })
}

fn dense_trace(scaled: &PiecewisePotential) -> Result<SolutionTrace> {
    // solve_ivp inserts q-breakpoints automatically; route the uniform grid
    // (plus 0) in through a zero forcing function so its nodes land in the
    // trace as well.
    let nodes: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
    let zeros = vec![0.0; nodes.len()];
    let zero_rhs = crate::sampled::SampledFunction::from_real(nodes, zeros)?;
    solve_ivp(
        scaled,
        Complex64::new(0.0, 0.0),
        Some(&zero_rhs),
        -1.0,
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        -1.0,
        1.0,
    )
}

fn dedup_sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    xs
}

/// Slow-regime coupling map: `θ·∫_{ℝ₊}Ψ + θ⁻¹·∫_{ℝ₋}Ψ` (exact moments).
pub fn zeta(h: &HalfBoundState, psi: &PiecewisePotential) -> f64 {
    let pos = psi
        .moment_between(0, 0.0, f64::INFINITY)
        .expect("moment 0 is always valid");
    let neg = psi
        .moment_between(0, f64::NEG_INFINITY, 0.0)
        .expect("moment 0 is always valid");
    h.theta * pos + neg / h.theta
}

/// Comparable-regime coupling map: `θ⁻¹·∫ Ψ(t) u²(λt) dt` by composite Gauss
/// quadrature on the merged kink grid of `Ψ` and the rescaled half-bound
/// state.
pub fn kappa(h: &HalfBoundState, psi: &PiecewisePotential, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonpositiveLambda(lambda));
    }
    let (lo, hi) = psi.support();
    // Kinks of t ↦ u(λt) sit at the cached nodes divided by λ.
    let mut cuts: Vec<f64> = vec![lo, hi];
    cuts.extend(psi.breakpoints().iter().copied());
    cuts.extend(
        h.cache_nodes
            .iter()
            .map(|&b| b / lambda)
            .filter(|&t| t > lo && t < hi),
    );
    let cuts = dedup_sorted(cuts);
    let rule = gauss15();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= lo || t0 >= hi {
            continue;
        }
        // u(λ·) is constant once the argument leaves [-1, 1]; no need to
        // subdivide those stretches.
        let chunks = if lambda * t0 >= 1.0 || lambda * t1 <= -1.0 {
            1
        } else {
            ((lambda * (t1 - t0) / 0.5).ceil() as usize).clamp(1, 256)
        };
        let step = (t1 - t0) / chunks as f64;
        for c in 0..chunks {
            let a = t0 + c as f64 * step;
            let b = a + step;
            total += integrate(rule, a, b, |t| {
                let u = h.eval(lambda * t);
                psi.eval(t) * u * u
            });
        }
    }
    Ok(total / h.theta)
}

/// Fast-regime coupling map: `θ⁻¹·u(0)²·∫Ψ`.
pub fn mu(h: &HalfBoundState, psi: &PiecewisePotential) -> f64 {
    let m0 = psi.moment(0).expect("moment 0 is always valid");
    h.u_at_zero * h.u_at_zero * m0 / h.theta
}

/// Regime dispatch: [`zeta`] for [`Regime::SlowDelta`], [`kappa`] for
/// [`Regime::Comparable`], [`mu`] for [`Regime::FastDelta`].
pub fn omega(h: &HalfBoundState, psi: &PiecewisePotential, regime: &Regime) -> Result<f64> {
    regime.validate()?;
    match regime {
        Regime::SlowDelta => Ok(zeta(h, psi)),
        Regime::Comparable { lambda } => kappa(h, psi, *lambda),
        Regime::FastDelta => Ok(mu(h, psi)),
    }
}
