//! Certifying a weight scale for the bounded-mass functional estimate.
//!
//! The uniform-bound argument needs a radial weight Psi such that
//!   I_eps(u) = -2 int (2 - Psi'')|u_r|^2
//!              + a/(a+2) int (2N - Lap Psi)|u|^{a+2}
//!              - 1/2 int Lap^2 Psi |u|^2   <=   a
//! for every radial u with ||u||^2 <= A^2. Existence is known for small
//! enough eps; here the scale is certified numerically: scan eps = 2^-k and
//! return the largest grid value whose corpus maximum of I_eps stays below
//! the target, with the target and mass bound taken from the reference datum
//! (a = N alpha |E(u0)|, A = sqrt(K) ||u0||).
//!
//! Run with: cargo run --release --example epsilon_certificate

use cgl_lab::bounds::k_const;
use cgl_lab::field::ComplexRadialField;
use cgl_lab::functionals;
use cgl_lab::grid::RadialGrid;
use cgl_lab::weights::{find_epsilon, make_zeta, HShape};

fn main() {
    let dim = 2;
    let alpha = 2.0;
    let grid = RadialGrid::new(dim, 12.0, 2048).unwrap();
    let zeta = make_zeta(HShape::StandardMollifier);

    let u0 = ComplexRadialField::gaussian(&grid, 3.0, 1.0);
    let rep = functionals::report(&grid, &u0, alpha).unwrap();
    let k = k_const(alpha).unwrap();
    let a = dim as f64 * alpha * (-rep.energy);
    let big_a = (k * rep.mass).sqrt();
    println!(
        "reference datum: mass = {:.5}, E = {:.5}; target a = {a:.5}, mass bound A^2 = {:.5}",
        rep.mass,
        rep.energy,
        big_a * big_a
    );

    // corpus: rescaled copies of the datum filling the allowed mass range
    let corpus: Vec<ComplexRadialField> = [1.0, 1.4, 1.9, 2.4, (k - 1e-3).sqrt()]
        .iter()
        .map(|&c| ComplexRadialField {
            values: u0.values.iter().map(|z| z * c).collect(),
        })
        .collect();

    let cert = find_epsilon(&grid, a, big_a, &corpus, &zeta, alpha, dim).unwrap();
    println!(
        "\ncertified: eps* = {} with max I_eps = {:.6e} <= a = {:.5}",
        cert.epsilon, cert.max_i_eps, cert.target_a
    );
    println!("per-field I_eps values:");
    for (i, v) in cert.per_field_i_eps.iter().enumerate() {
        println!("  field {i}: {v:.6e}");
    }
}
