//! Why the uniform bound needs alpha <= 4 and radial symmetry.
//!
//! Two concentrating families probe the weighted inequality behind the
//! uniform blow-up bound. For the off-center bump family the nonlinear term
//! grows like lambda^{N alpha/2} while the gradient side grows like
//! lambda^2, so the inequality must fail when N alpha > 4; for the thin
//! annulus family the analogous exponents are alpha/2 and 2, failing when
//! alpha > 4. The scan fits the exponents and reports the gap.
//!
//! Run with: cargo run --release --example necessity_scan

use cgl_lab::experiments::necessity::{necessity_scan, ScanFamily};
use cgl_lab::weights::{make_zeta, HShape};

fn main() {
    let zeta = make_zeta(HShape::StandardMollifier);
    let lambdas: Vec<f64> = (2..=8).map(|k| 2.0f64.powi(k)).collect();

    for (family, dim, alpha, radius) in [
        (ScanFamily::ScaledBump, 2, 2.0, 3.0),
        (ScanFamily::ScaledBump, 2, 3.0, 3.0),
        (ScanFamily::AnnularBump, 2, 2.0, 2.0),
        (ScanFamily::AnnularBump, 2, 5.0, 2.0),
    ] {
        let rep = necessity_scan(family, dim, alpha, &lambdas, radius, 1e9, &zeta).unwrap();
        println!(
            "{:?}  N = {dim}, alpha = {alpha}, radius = {radius}:",
            family
        );
        for line in &rep.lines {
            println!(
                "  {:<13} fitted exponent {:+.4}  (predicted {:+.1})",
                line.quantity, line.fitted_exponent, line.predicted_exponent
            );
        }
        println!(
            "  weighted nonlinear-vs-gradient exponent gap: {:+.4} {}\n",
            rep.nonlinear_minus_gradient_gap,
            if rep.nonlinear_minus_gradient_gap > 0.05 {
                "(inequality must fail: term outgrows the allowed side)"
            } else {
                "(bounded: inequality can hold)"
            }
        );
    }
}
