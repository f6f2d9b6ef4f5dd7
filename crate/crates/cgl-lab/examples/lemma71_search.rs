//! The weighted nonlinear inequality: finite constant on the legal window,
//! divergence outside it.
//!
//! On N >= 2, 4/N <= alpha <= 4, radial fields with bounded mass satisfy
//!   int |x|^2 |u|^{a+2} <= int |x|^2 |grad u|^2 + C int |u|^{a+2} + C
//! for some finite C, via the pointwise bound
//!   || |x|^N |u|^2 ||_inf <= 2 ||u|| |||x| grad u||.
//! For alpha > 4 no such C exists: along a joint (lambda, r0) annulus family
//! the required constant grows like r0^2 without bound.
//!
//! Run with: cargo run --release --example lemma71_search

use cgl_lab::experiments::corpus::CorpusSpec;
use cgl_lab::experiments::necessity::{
    divergence_demo_corpus, geometric_c_grid, lemma71_check,
};
use cgl_lab::weights::{make_zeta, HShape};

fn main() {
    let zeta = make_zeta(HShape::StandardMollifier);
    let c_grid = geometric_c_grid(1e-3, 1e9, 241);

    // legal window: a mixed corpus with mass <= M^2
    let corpus = vec![
        CorpusSpec::Gaussian {
            amplitude: 1.0,
            sigma: 1.0,
        },
        CorpusSpec::Gaussian {
            amplitude: 2.0,
            sigma: 0.7,
        },
        CorpusSpec::Ring {
            amplitude: 1.0,
            r0: 2.0,
            width: 0.5,
        },
        CorpusSpec::AnnularBump { lambda: 8.0, r0: 2.0 },
        CorpusSpec::AnnularBump { lambda: 32.0, r0: 1.0 },
    ];
    println!("legal window (N = 2):");
    for alpha in [2.0, 4.0] {
        let rep = lemma71_check(&corpus, alpha, 2, 4.0, &c_grid, false, 1e6, &zeta).unwrap();
        println!(
            "  alpha = {alpha}: C_min_found = {:.5e} (exact requirement {:.5e}); \
             all pointwise margins nonnegative: {}",
            rep.c_min_found,
            rep.c_needed,
            rep.fields.iter().all(|f| f.pointwise_margin >= 0.0)
        );
    }

    // necessity: alpha = 5 > 4 via the override flag
    println!("\nalpha = 5 (outside the window, override):");
    let demo = divergence_demo_corpus(&[2.0, 2.8, 4.0, 5.6, 8.0, 11.2], 6.0);
    let rep = lemma71_check(&demo, 5.0, 2, 1e6, &c_grid, true, 1e9, &zeta).unwrap();
    println!("  r0        lambda      C needed");
    for f in &rep.fields {
        if let CorpusSpec::AnnularBump { lambda, r0 } = f.spec {
            println!("  {:<9.2} {:<11.1} {:.5e}", r0, lambda, f.c_needed);
        }
    }
    println!(
        "\n  the required constant grows without bound along the family \
         (factor {:.1} across the grid)",
        rep.fields.last().unwrap().c_needed / rep.fields.first().unwrap().c_needed
    );
}
