//! Zero-energy resonances and point-interaction limits of one-dimensional
//! Schrödinger operators with two-scale short-range potentials.
//!
//! The library works with operators of the form
//!
//! ```text
//!     S = -d²/dx² + (α/ε²) Φ(x/ε) + (β/ν) Ψ(x/ν)
//! ```
//!
//! where `Φ` and `Ψ` are bounded potentials supported in `[-1, 1]` and the
//! scales `ε`, `ν` shrink to zero. Depending on whether the coupling `α` is
//! resonant for `Φ` (the zero-energy equation `-u'' + αΦu = 0` has a bounded
//! nontrivial solution), the family converges to a point interaction at the
//! origin or to a pair of decoupled Dirichlet half-line operators. The ratio
//! `η = ν/ε` selects which coupling map (`zeta`, `kappa`, `mu`) feeds the
//! limit interface condition.
//!
//! Modules:
//!
//! - [`potential`] — piecewise-polynomial potentials, moments, two-scale assembly
//! - [`ode1d`] — transfer matrices and initial-value solves at fixed energy
//! - [`resonance`] — resonant couplings, half-bound states, the coupling maps
//! - [`pointmodel`] — the limit operators, their scattering data and resolvents
//! - [`scatter`] — exact scattering for the full two-scale operator
//! - [`limits`] — convergence experiments: transmission sweeps, resolvent gaps,
//!   rate fits, profile validators
//! - [`cli`] — the command-line front end used by the `twoscale` binary
//!
//! Every computational routine is pure and thread-safe; parameter sweeps are
//! parallelized with rayon where it pays off. See the crate examples for one
//! runnable program per capability.

pub mod cli;
pub mod limits;
pub mod ode1d;
pub mod pointmodel;
pub mod potential;
pub mod resonance;
pub mod sampled;
pub mod scatter;

mod quad;
mod tridiag;

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("moment degree {0} unsupported (max 4)")]
    MomentDegree(u32),

    #[error("scale parameters must be positive (got eps={eps}, nu={nu})")]
    NonpositiveScale { eps: f64, nu: f64 },

    #[error("invalid interval: require a < b (got a={a}, b={b})")]
    InvalidInterval { a: f64, b: f64 },

    #[error("energy must be finite")]
    NonFiniteEnergy,

    #[error("initial point t0={t0} outside [{a}, {b}]")]
    InitialPointOutside { t0: f64, a: f64, b: f64 },

    #[error("coupling {alpha} is not resonant: shooting defect {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotResonant { alpha: f64, residual: f64, tol: f64 },

    #[error("degenerate half-bound state: plateau value theta vanishes at alpha={0}")]
    DegenerateHalfBoundState(f64),

    #[error("scan range invalid or too coarse: {0}")]
    InvalidScan(String),

    #[error("scale ratio lambda must be positive (got {0})")]
    NonpositiveLambda(f64),

    #[error("momentum must be positive (got {0})")]
    NonpositiveMomentum(f64),

    #[error("interface factor gamma1 must be nonzero")]
    SingularInterface,

    #[error("spectral point must have nonzero imaginary part")]
    RealSpectralPoint,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("rate fit needs at least 3 usable points (got {0})")]
    RateFitTooFew(usize),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
