//! One negative-energy blow-up run, end to end.
//!
//! Evolves u0 = 3 exp(-r^2) at N = 2, alpha = 2, theta = 0 (the pure heat
//! case), watches the L-infinity norm diverge, brackets the blow-up time,
//! and compares against the closed-form upper bound
//! ||u0||^2 / (alpha (alpha+2) (-E) cos theta), which equals exactly 1 for
//! this datum. Also demonstrates the mass-crossing statistic tau and its
//! (alpha+4)/alpha tau bound.
//!
//! Run with: cargo run --release --example simulate_blowup

use cgl_lab::bounds;
use cgl_lab::diagnostics;
use cgl_lab::experiments::corpus::CorpusSpec;
use cgl_lab::functionals;
use cgl_lab::grid::RadialGrid;
use cgl_lab::integrator::{simulate, SimParams};
use cgl_lab::weights::{make_zeta, HShape};
use std::sync::Arc;

fn main() {
    let grid = Arc::new(RadialGrid::new(2, 12.0, 2048).unwrap());
    let zeta = make_zeta(HShape::StandardMollifier);
    let u0 = CorpusSpec::Gaussian {
        amplitude: 3.0,
        sigma: 1.0,
    }
    .materialize(&grid, &zeta)
    .unwrap();

    let rep0 = functionals::report(&grid, &u0, 2.0).unwrap();
    println!("initial datum: mass = {:.6}, E = {:.6}", rep0.mass, rep0.energy);
    assert!(rep0.energy < 0.0);

    let mut p = SimParams::new(grid.clone(), 2.0, 0.0);
    p.t_end = 2.0;
    p.record_every = 8;
    let upper = bounds::thm1_upper(rep0.mass, rep0.energy, 2.0, 0.0).unwrap();
    println!("theoretical blow-up time upper bound: {upper:.12}");

    let (traj, est) = simulate(&u0, &p).unwrap();
    println!(
        "\nstatus: {:?}; bracket ({:.6}, {:.6}); advisory rate fit t = {:?}",
        est.status, est.t_lo, est.t_hi, est.t_fit
    );
    println!(
        "final state: t = {:.6}, |u|_inf = {:.3e}, mass = {:.4}",
        est.t_last,
        traj.samples.last().unwrap().linf,
        traj.samples.last().unwrap().mass
    );
    assert!(est.t_hi <= upper * 1.05, "bracket exceeds the bound");

    let tau = diagnostics::measure_tau(&traj, 2.0).unwrap();
    println!(
        "\nmass crossing: K = {:.5}, tau = {:.6}, (a+4)/a tau = {:.6} (>= t_lo)",
        tau.k,
        tau.tau,
        bounds::tau_to_tmax(tau.tau, 2.0).unwrap()
    );

    // a few trajectory milestones
    println!("\n  t         |u|_inf     mass       energy");
    let n = traj.samples.len();
    for k in [0, n / 4, n / 2, 3 * n / 4, n - 1] {
        let s = &traj.samples[k];
        println!(
            "  {:<9.5} {:<11.4e} {:<10.5} {:<10.4}",
            s.t, s.linf, s.mass, s.energy
        );
    }
}
