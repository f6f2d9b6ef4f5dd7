//! Post-hoc audit of a trajectory against the exact evolution identities.
//!
//! Along any solution, mass evolves as d/dt ||u||^2 = -2 cos(theta) I(u),
//! energy dissipates as cos(theta) int_0^t ||u_t||^2 + E(t) = E(0), and
//! |int u_t conj(u)| = |I(u)| holds pointwise. Two further mass-evolution
//! forms follow by combining these. This runs the rotated equation at
//! theta = pi/4 and prints the residual table over the smooth span.
//!
//! Run with: cargo run --release --example identity_audit

use cgl_lab::diagnostics::{self, truncate_to};
use cgl_lab::experiments::corpus::CorpusSpec;
use cgl_lab::grid::RadialGrid;
use cgl_lab::integrator::{simulate, SimParams};
use cgl_lab::weights::{make_zeta, HShape};
use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

fn main() {
    let alpha = 2.0;
    let theta = FRAC_PI_4;
    let grid = Arc::new(RadialGrid::new(2, 12.0, 2048).unwrap());
    let zeta = make_zeta(HShape::StandardMollifier);
    let u0 = CorpusSpec::Gaussian {
        amplitude: 3.0,
        sigma: 1.0,
    }
    .materialize(&grid, &zeta)
    .unwrap();

    let mut p = SimParams::new(grid.clone(), alpha, theta);
    p.t_end = 2.0;
    p.record_every = 1;
    println!("running theta = pi/4 blow-up and auditing [0, 0.9 t_lo]...");
    let (full, est) = simulate(&u0, &p).unwrap();
    let traj = truncate_to(&full, 0.9 * est.t_lo);

    let mut rows = vec![
        diagnostics::check_mass_identity(&traj, alpha, theta).unwrap(),
        diagnostics::check_energy_identity(&traj).unwrap(),
        diagnostics::check_modulus_identity(&traj).unwrap(),
    ];
    rows.extend(diagnostics::check_combined_identities(&traj, alpha, theta).unwrap());

    println!("\n  identity                          max |res|   max rel     worst t");
    for r in &rows {
        println!(
            "  {:<33} {:<11.3e} {:<11.3e} {:.5}",
            r.report.name, r.report.max_abs_residual, r.report.max_rel_residual, r.report.worst_time
        );
    }

    let mono = diagnostics::check_monotonicity(&traj, alpha).unwrap();
    println!("\nmonotonicity (negative-energy hypotheses):");
    println!("  worst mass decrease:     {:.3e}", mono.worst_mass_decrease);
    println!("  worst energy increase:   {:.3e}", mono.worst_energy_increase);
    println!("  worst I-chain violation: {:.3e}", mono.worst_i_chain_violation);
    println!("  worst Levine decrease:   {:.3e}", mono.worst_levine_decrease);
}
