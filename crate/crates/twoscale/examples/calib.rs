// Scratch calibration runs for the convergence experiments.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;
use twoscale::limits::{rate_fit, resolvent_gap, transmission_sweep};
use twoscale::potential::PiecewisePotential;
use twoscale::resonance::Regime;

fn main() {
    let well = PiecewisePotential::square_well();
    let boxd = PiecewisePotential::box_delta();
    let alpha1 = -(PI / 2.0) * (PI / 2.0);
    let z = Complex64::new(0.0, 2.0);

    println!("== criterion 4: comparable-regime transmission sweep ==");
    let t0 = Instant::now();
    let rep = transmission_sweep(
        &well,
        &boxd,
        alpha1,
        1.0,
        &Regime::Comparable { lambda: 1.0 },
        &[0.5, 1.0, 2.0],
        &[0.2, 0.1, 0.05, 0.025, 0.0125],
        None,
    )
    .unwrap();
    println!("values {:?}", rep.values);
    println!(
        "rate {:.3}, final/initial {:.4}, took {:?}",
        rep.fitted_rate,
        rep.values.last().unwrap() / rep.values[0],
        t0.elapsed()
    );

    println!("== criterion 5: non-resonant opacity ==");
    for regime in [Regime::SlowDelta, Regime::FastDelta] {
        let t0 = Instant::now();
        let rep = transmission_sweep(
            &well,
            &boxd,
            -1.7,
            1.0,
            &regime,
            &[1.0],
            &[0.04, 0.01, 0.0025, 0.000625, 0.00015625],
            None,
        )
        .unwrap();
        println!(
            "{regime:?}: path {:?}",
            rep.path
                .iter()
                .map(|p| format!("({:.2e},{:.2e})", p.0, p.1))
                .collect::<Vec<_>>()
        );
        println!("  |t| values {:?}  ({:?})", rep.values, t0.elapsed());
    }

    println!("== criterion 6a: slow path gaps, h = eps/8 = nu^2/8 ==");
    let t0 = Instant::now();
    let nus: [f64; 4] = [0.08, 0.04, 0.02, 0.01];
    let mut gaps = Vec::new();
    for &nu in &nus {
        let eps = nu * nu;
        let h = (nu * nu / 8.0).min(nu / 8.0);
        let g = resolvent_gap(
            &well,
            &boxd,
            alpha1,
            1.0,
            eps,
            nu,
            &Regime::SlowDelta,
            z,
            20.0,
            h,
            120,
        )
        .unwrap();
        println!("  nu={nu}: gap {g:.5e}  (elapsed {:?})", t0.elapsed());
        gaps.push(g);
    }
    if let Ok((s, _)) = rate_fit(&nus, &gaps) {
        println!("  slope in nu: {s:.3}");
    }

    println!("== criterion 6a-alt: slow path gaps, h = nu/8 (under-resolved?) ==");
    let mut gaps = Vec::new();
    for &nu in &nus[..3] {
        let eps = nu * nu;
        let h = nu / 8.0;
        let g = resolvent_gap(
            &well,
            &boxd,
            alpha1,
            1.0,
            eps,
            nu,
            &Regime::SlowDelta,
            z,
            20.0,
            h,
            120,
        )
        .unwrap();
        println!("  nu={nu}: gap {g:.5e}");
        gaps.push(g);
    }

    println!("== criterion 6b: fast path gaps, h = nu/8 = eps^2/8 ==");
    let t0 = Instant::now();
    let epss = [0.08, 0.04, 0.02, 0.01];
    let mut gaps = Vec::new();
    for &eps in &epss {
        let nu = eps * eps;
        let h = nu / 8.0;
        let g = resolvent_gap(
            &well,
            &boxd,
            alpha1,
            1.0,
            eps,
            nu,
            &Regime::FastDelta,
            z,
            20.0,
            h,
            120,
        )
        .unwrap();
        println!("  eps={eps}: gap {g:.5e}  (elapsed {:?})", t0.elapsed());
        gaps.push(g);
    }
    if let Ok((s, _)) = rate_fit(&epss, &gaps) {
        println!("  slope in eps: {s:.3}");
    }

    println!("== gap floor: alpha=0, beta=0 at several h ==");
    for h in [0.01, 0.005] {
        let g = resolvent_gap(
            &well,
            &boxd,
            0.0,
            0.0,
            0.05,
            0.05,
            &Regime::Comparable { lambda: 1.0 },
            z,
            20.0,
            h,
            60,
        )
        .unwrap();
        println!("  h={h}: gap {g:.3e}");
    }
}
