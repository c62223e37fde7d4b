//! Exact scattering for the full two-scale operator at positive energy.
//!
//! The assembled potential is supported in `[-a, a]` with `a = max(ε, ν)`;
//! a transfer matrix across the support converts to transmission/reflection
//! amplitudes by plane-wave matching at `±a`, with all phases referenced to
//! the origin so the amplitudes are directly comparable with the point-model
//! ones.

use num_complex::Complex64;

use crate::ode1d::transfer_matrix;
use crate::pointmodel::ScatteringData;
use crate::potential::{assemble_scaled, PiecewisePotential};
use crate::{Error, Result};

/// Scattering data of `-d²/dx² + (α/ε²)Φ(x/ε) + (β/ν)Ψ(x/ν)` at momentum
/// `k > 0` (energy `k²`).
pub fn scattering_full(
    phi: &PiecewisePotential,
    psi: &PiecewisePotential,
    alpha: f64,
    beta: f64,
    eps: f64,
    nu: f64,
    k: f64,
) -> Result<ScatteringData> {
    if !(k > 0.0) {
        return Err(Error::NonpositiveMomentum(k));
    }
    let v = assemble_scaled(phi, psi, alpha, beta, eps, nu)?;
    let (lo, hi) = v.support();
    let a = lo.abs().max(hi.abs()).max(eps.max(nu));
    let m = transfer_matrix(&v, Complex64::new(k * k, 0.0), -a, a)?;
    Ok(amplitudes_from_matrix(&m.m, k, a))
}

/// Converts a transfer matrix over `[-a, a]` to scattering amplitudes with
/// phases referenced to `x = 0`.
///
/// Left incidence: `e^{ikx} + r e^{-ikx}` for `x < -a`, `t e^{ikx}` beyond.
/// Right incidence mirrors it. Both linear systems are solved directly; the
/// translation bookkeeping `e^{±ika}` is applied explicitly.
pub(crate) fn amplitudes_from_matrix(
    m: &[[Complex64; 2]; 2],
    k: f64,
    a: f64,
) -> ScatteringData {
    let i = Complex64::new(0.0, 1.0);
    let ik = i * k;
    let ep = (ik * a).exp(); // e^{+ika}
    let em = (-ik * a).exp(); // e^{-ika}

    // Left incidence. Unknowns (t, r):
    //   M · (em + r·ep, ik(em - r·ep))ᵀ = (t·ep, ik·t·ep)ᵀ
    let a11 = -ep;
    let a21 = -ik * ep;
    let b11 = m[0][0] * ep - m[0][1] * ik * ep;
    let b21 = m[1][0] * ep - m[1][1] * ik * ep;
    let rhs1 = -(m[0][0] * em + m[0][1] * ik * em);
    let rhs2 = -(m[1][0] * em + m[1][1] * ik * em);
    let (t_left, r_left) = solve2(a11, b11, a21, b21, rhs1, rhs2);

    // Right incidence. Unknowns (t', r'):
    //   M · (t'·ep, -ik·t'·ep)ᵀ = (em + r'·ep, ik(-em + r'·ep))ᵀ
    let c11 = m[0][0] * ep - m[0][1] * ik * ep;
    let c21 = m[1][0] * ep - m[1][1] * ik * ep;
    let d11 = -ep;
    let d21 = -ik * ep;
    let e1 = em;
    let e2 = -ik * em;
    let (t_right, r_right) = solve2(c11, d11, c21, d21, e1, e2);

    // Transmission moduli agree for real potentials; keep the left amplitude
    // and record the defect of the left channel.
    debug_assert!((t_left.norm() - t_right.norm()).abs() < 1e-6 * (1.0 + t_left.norm()));
    let _ = t_right;
    ScatteringData::with_defect(k, t_left, r_left, r_right)
}

/// Solves `[[a, b], [c, d]]·(x, y)ᵀ = (e, f)ᵀ`.
fn solve2(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    e: Complex64,
    f: Complex64,
) -> (Complex64, Complex64) {
    let det = a * d - b * c;
    ((e * d - b * f) / det, (a * f - e * c) / det)
}

/// `| |t|² + |r_left|² - 1 |`: flux conservation defect, zero for exact
/// scattering by a real potential.
pub fn unitarity_defect(sd: &ScatteringData) -> f64 {
    (sd.t_amp.norm_sqr() + sd.r_left.norm_sqr() - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointmodel::{scattering_point, PointInteraction};
    use approx::assert_relative_eq;

    fn well() -> PiecewisePotential {
        PiecewisePotential::square_well()
    }

    fn half_box() -> PiecewisePotential {
        PiecewisePotential::box_delta()
    }

    #[test]
    fn zero_couplings_are_transparent() {
        let sd = scattering_full(&well(), &half_box(), 0.0, 0.0, 0.2, 0.1, 1.0).unwrap();
        assert!((sd.t_amp - 1.0).norm() < 1e-12, "t = {}", sd.t_amp);
        assert!(sd.r_left.norm() < 1e-12);
        assert!(sd.unitarity_defect < 1e-12);
    }

    #[test]
    fn shrinking_psi_term_approaches_delta_amplitude() {
        let (beta, k) = (2.0, 1.0);
        let sd = scattering_full(&well(), &half_box(), 0.0, beta, 0.5, 1e-4, k).unwrap();
        let limit = scattering_point(
            &PointInteraction::Connected {
                gamma1: 1.0,
                gamma2: beta * half_box().moment(0).unwrap(),
            },
            k,
        )
        .unwrap();
        assert!(
            (sd.t_amp - limit.t_amp).norm() < 1e-2,
            "full {} vs limit {}",
            sd.t_amp,
            limit.t_amp
        );
    }

    #[test]
    fn square_barrier_matches_textbook_transmission() {
        // α/ε²·χ(x/ε) with ε=1 is a barrier of height α on [-1,1]; for
        // E=k² > α the transmission modulus has the classic closed form.
        let (alpha, k) = (0.4, 1.1);
        let sd = scattering_full(&well(), &half_box(), alpha, 0.0, 1.0, 1.0, k).unwrap();
        let kp = (k * k - alpha).sqrt();
        let width: f64 = 2.0;
        let s = (kp * width).sin();
        let t_sq = 1.0 / (1.0 + (k * k - kp * kp).powi(2) * s * s / (4.0 * k * k * kp * kp));
        assert_relative_eq!(sd.t_amp.norm_sqr(), t_sq, epsilon = 1e-10);
        assert!(sd.unitarity_defect < 1e-11);
    }

    #[test]
    fn dilation_rescaling_preserves_transmission_modulus() {
        let (alpha, beta, eps, nu, k, s) = (-2.2066, 0.8, 0.3, 0.15, 1.3, 2.0);
        let sd1 = scattering_full(&well(), &half_box(), alpha, beta, eps, nu, k).unwrap();
        let sd2 =
            scattering_full(&well(), &half_box(), alpha, beta / s, s * eps, s * nu, k / s)
                .unwrap();
        assert_relative_eq!(sd1.t_amp.norm(), sd2.t_amp.norm(), epsilon = 1e-9);
        assert_relative_eq!(sd1.r_left.norm(), sd2.r_left.norm(), epsilon = 1e-9);
    }

    #[test]
    fn transmission_reciprocity() {
        let sd = scattering_full(&PiecewisePotential::dipole(), &half_box(), 1.5, -0.7, 0.4, 0.2, 0.9)
            .unwrap();
        // |t| is incidence-independent; check via right-channel unitarity.
        let right_defect = (sd.t_amp.norm_sqr() + sd.r_right.norm_sqr() - 1.0).abs();
        assert!(right_defect < 1e-10);
        assert!(sd.unitarity_defect < 1e-10);
    }

    #[test]
    fn defect_examples() {
        let transparent = ScatteringData::with_defect(
            1.0,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        assert_eq!(unitarity_defect(&transparent), 0.0);
        let wall = ScatteringData::with_defect(
            1.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        );
        assert_eq!(unitarity_defect(&wall), 0.0);
    }

    #[test]
    fn rejects_nonpositive_momentum_and_scales() {
        assert!(scattering_full(&well(), &half_box(), 1.0, 1.0, 0.1, 0.1, 0.0).is_err());
        assert!(scattering_full(&well(), &half_box(), 1.0, 1.0, 0.0, 0.1, 1.0).is_err());
    }
}
