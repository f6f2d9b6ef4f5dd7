//! Closed-form blow-up time bounds for a given datum.
//!
//! Upper bound (negative energy): T <= ||u0||^2 / (a (a+2) (-E) cos theta);
//! for u0 = 3 exp(-r^2) at N = 2, alpha = 2, theta = 0 the value is exactly 1.
//! Lower bound (subcritical alpha < 4/N): through the interpolation constant
//! C_GN built from the configured Gagliardo-Nirenberg constant c. Both scale
//! as 1/cos(theta), so bound * cos(theta) is angle-independent.
//!
//! Run with: cargo run --release --example bounds_report

use cgl_lab::bounds;
use cgl_lab::field::ComplexRadialField;
use cgl_lab::functionals;
use cgl_lab::grid::RadialGrid;
use std::f64::consts::PI;

fn main() {
    // critical datum: only the upper bound applies
    let grid = RadialGrid::new(2, 12.0, 2048).unwrap();
    let u0 = ComplexRadialField::gaussian(&grid, 3.0, 1.0);
    let rep = functionals::report(&grid, &u0, 2.0).unwrap();
    println!(
        "N=2, alpha=2, u0 = 3 exp(-r^2): mass = {:.8} (exact 9 pi/2 = {:.8})",
        rep.mass,
        4.5 * PI
    );
    println!(
        "E = {:.8} (exact -9 pi/16 = {:.8})",
        rep.energy,
        -9.0 * PI / 16.0
    );
    for theta in [0.0, PI / 3.0, 0.45 * PI] {
        let b = bounds::thm1_upper(rep.mass, rep.energy, 2.0, theta).unwrap();
        println!(
            "  theta = {theta:.5}: upper bound {b:.8} (x cos theta = {:.8})",
            b * theta.cos()
        );
    }

    // subcritical datum: both bounds
    println!("\nN=1, alpha=1, u0 = 3 exp(-r^2):");
    let grid1 = RadialGrid::new(1, 40.0, 2048).unwrap();
    let u1 = ComplexRadialField::gaussian(&grid1, 3.0, 1.0);
    let rep1 = functionals::report(&grid1, &u1, 1.0).unwrap();
    let full = bounds::bounds_report(1, 1.0, 0.0, rep1.mass, rep1.energy, 1.0, 0.0).unwrap();
    println!("  mass = {:.6}, E = {:.6}", rep1.mass, rep1.energy);
    println!("  eta = {:.6e}", full.eta);
    println!("  K(alpha) = {:.6}", full.k_const);
    println!("  C_GN = {:.6e} (with configured c = {})", full.cgn, full.c_gn_input);
    println!("  upper bound = {:.6}", full.thm1_upper);
    println!("  lower bound = {:.6e}", full.thm2_lower);
    assert!(full.thm2_lower < full.thm1_upper);

    // the crossing-statistic constant at a few powers
    println!("\nK(alpha) = [1 - sqrt((a+4)/(2a+4))]^{{-1}}:");
    for alpha in [1.0, 2.0, 4.0] {
        println!("  alpha = {alpha}: K = {:.5}", bounds::k_const(alpha).unwrap());
    }
}
