// Probe: does the slow-regime path converge in transmission, and where does
// the resolvent difference concentrate?

use num_complex::Complex64;
use std::f64::consts::PI;
use twoscale::limits::transmission_sweep;
use twoscale::pointmodel::{limit_operator, resolvent_point, scattering_point};
use twoscale::potential::PiecewisePotential;
use twoscale::resonance::{Regime, DEFAULT_RESONANCE_TOL};
use twoscale::sampled::SampledFunction;
use twoscale::scatter::scattering_full;

fn main() {
    let well = PiecewisePotential::square_well();
    let boxd = PiecewisePotential::box_delta();
    let alpha1 = -(PI / 2.0) * (PI / 2.0);

    println!("== slow-regime transmission sweep, resonant alpha1, beta=1 ==");
    let rep = transmission_sweep(
        &well,
        &boxd,
        alpha1,
        1.0,
        &Regime::SlowDelta,
        &[0.5, 1.0, 2.0],
        &[0.04, 0.01, 0.0025, 0.000625],
        None,
    )
    .unwrap();
    println!("path  {:?}", rep.path);
    println!("vals  {:?}", rep.values);
    println!("rate  {:.3}", rep.fitted_rate);

    let pi = limit_operator(
        &well,
        &boxd,
        alpha1,
        1.0,
        &Regime::SlowDelta,
        DEFAULT_RESONANCE_TOL,
    )
    .unwrap();
    println!("limit model: {pi:?}");
    for &k in &[0.5, 1.0, 2.0] {
        let tl = scattering_point(&pi, k).unwrap().t_amp;
        for &nu in &[0.08f64, 0.02, 0.005] {
            let eps = nu * nu;
            let tf = scattering_full(&well, &boxd, alpha1, 1.0, eps, nu, k)
                .unwrap()
                .t_amp;
            println!(
                "k={k}: nu={nu:.3}  t_full={:.5}{:+.5}i  t_lim={:.5}{:+.5}i  |diff|={:.4e}",
                tf.re,
                tf.im,
                tl.re,
                tl.im,
                (tf - tl).norm()
            );
        }
    }

    println!("== pointwise resolvent comparison (continuum route) ==");
    // Full-operator resolvent approximated by solving on a fine grid via the
    // closed-form machinery is not available; instead compare the two limit
    // routes and the discrete full solve through the gap problem is internal.
    // Here: sanity-check resolvent_point of the slow limit vs a direct
    // scattering-style expectation at a couple of nodes.
    let z = Complex64::new(0.0, 2.0);
    let f = SampledFunction::on_symmetric_grid(15.0, 3000, |x| {
        Complex64::new((-(x + 5.0) * (x + 5.0)).exp(), 0.0)
    });
    let sol = resolvent_point(&pi, z, &f).unwrap();
    for probe in [1000usize, 2000, 3000, 4000, 5000] {
        println!(
            "x={:+.2}: y={:.5e}{:+.5e}i",
            f.xs[probe], sol.grid.ys[probe].re, sol.grid.ys[probe].im
        );
    }
}
