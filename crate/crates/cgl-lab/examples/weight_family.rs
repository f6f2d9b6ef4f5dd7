//! The truncated-variance weight construction, end to end.
//!
//! Starting from the canonical smooth bump h on [1,2] with unit integral,
//! build zeta (identity below 1, plateau M above 2), the weight
//! Psi_eps(x) = eps^{-2} zeta(eps^2 |x|^2) that equals |x|^2 near the origin
//! and saturates at eps^{-2} M, and the companion gamma_eps supported away
//! from the origin. Two identities tie them together exactly:
//!   2 - Psi_eps''      = gamma_eps^2
//!   2N - Lap Psi_eps   = N gamma_eps^2 + 4(N-1) (eps r)^2 zeta''((eps r)^2)
//! and the bi-Laplacian sup scales exactly as eps^2.
//!
//! Run with: cargo run --release --example weight_family

use cgl_lab::weights::{make_weight, make_zeta, HShape};

fn main() {
    let zeta = make_zeta(HShape::StandardMollifier);
    println!("plateau M = {:.12} (must lie in [1, 2])", zeta.plateau_m());
    println!("zeta(0.5) = {} (identity region)", zeta.zeta(0.5));
    println!("zeta(3.0) = {} (plateau region)", zeta.zeta(3.0));

    let dim = 2;
    let phi = make_weight(zeta.clone(), 1.0, dim).unwrap();
    let sup_phi = phi.bilap_sup();
    println!("\n||Lap^2 Phi||_inf = {sup_phi:.6}");

    for eps in [1.0, 0.1, 0.01] {
        let w = make_weight(zeta.clone(), eps, dim).unwrap();
        // 1000 log-spaced probe radii through and past the active band
        let mut worst_curv = 0.0f64;
        let mut worst_gap = 0.0f64;
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let r = (0.01 / eps) * (1000.0f64).powf(x);
            let s = (eps * r) * (eps * r);
            let g = w.gamma_eps(r);
            worst_curv = worst_curv.max((2.0 - w.psi2(r) - g * g).abs());
            let expect = dim as f64 * g * g + 4.0 * (dim as f64 - 1.0) * s * w.zeta().zeta2(s);
            worst_gap = worst_gap.max((2.0 * dim as f64 - w.lap_psi(r) - expect).abs());
        }
        let sup = w.bilap_sup();
        println!(
            "eps = {eps:<5}: curvature identity residual {worst_curv:.2e}, \
             Laplacian-gap residual {worst_gap:.2e}, \
             ||Lap^2 Psi_eps|| / (eps^2 ||Lap^2 Phi||) = {:.12}",
            sup / (eps * eps * sup_phi)
        );
    }

    // a short table of the eps = 0.5 family
    let w = make_weight(zeta, 0.5, dim).unwrap();
    println!("\n  r       psi        psi''     lap psi   gamma");
    for r in [0.0, 1.0, 2.0, 2.2, 2.5, 2.83, 4.0] {
        println!(
            "  {:<7.3} {:<10.5} {:<9.5} {:<9.5} {:<9.5}",
            r,
            w.psi(r),
            w.psi2(r),
            w.lap_psi(r),
            w.gamma_eps(r)
        );
    }
}
