//! Initial-data families and their exact functionals.
//!
//! Every family is both materializable on a grid (for simulation) and
//! evaluable by dedicated fine quadrature on its own support (for the scaling
//! scans, where grid resolution must not cap the family parameter range).
//! The compactly supported profiles reuse the smooth mollifier bump of the
//! weight construction.

use crate::error::{CglError, Result};
use crate::field::ComplexRadialField;
use crate::grid::{unit_sphere_area, RadialGrid};
use crate::weights::ZetaProfile;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSpec {
    /// amplitude * exp(-r^2 / sigma^2)
    Gaussian { amplitude: f64, sigma: f64 },
    /// amplitude * exp(-(r - r0)^2 / width^2)
    Ring { amplitude: f64, r0: f64, width: f64 },
    /// lambda^{N/2} phi(lambda (r - offset)), the concentrating family with
    /// the bump center offset in radius
    ScaledBump { lambda: f64, offset: f64 },
    /// lambda^{1/2} r0^{-(N-1)/2} phi(lambda (r - r0)), the thin-annulus family
    AnnularBump { lambda: f64, r0: f64 },
}

impl CorpusSpec {
    /// Radial profile and its derivative as closures.
    fn profile(&self, dim: usize, zeta: &Arc<ZetaProfile>) -> (ProfileFn, ProfileFn) {
        let z = zeta.clone();
        let z2 = zeta.clone();
        match *self {
            CorpusSpec::Gaussian { amplitude, sigma } => {
                let f = move |r: f64| amplitude * (-(r * r) / (sigma * sigma)).exp();
                let fp = move |r: f64| {
                    -2.0 * r / (sigma * sigma) * amplitude * (-(r * r) / (sigma * sigma)).exp()
                };
                (Box::new(f), Box::new(fp))
            }
            CorpusSpec::Ring {
                amplitude,
                r0,
                width,
            } => {
                let f = move |r: f64| amplitude * (-(r - r0) * (r - r0) / (width * width)).exp();
                let fp = move |r: f64| {
                    -2.0 * (r - r0) / (width * width)
                        * amplitude
                        * (-(r - r0) * (r - r0) / (width * width)).exp()
                };
                (Box::new(f), Box::new(fp))
            }
            CorpusSpec::ScaledBump { lambda, offset } => {
                let a = lambda.powf(dim as f64 / 2.0);
                let f = move |r: f64| a * z.h(lambda * (r - offset));
                let fp = move |r: f64| a * lambda * z2.h1(lambda * (r - offset));
                (Box::new(f), Box::new(fp))
            }
            CorpusSpec::AnnularBump { lambda, r0 } => {
                let a = lambda.sqrt() * r0.powf(-(dim as f64 - 1.0) / 2.0);
                let f = move |r: f64| a * z.h(lambda * (r - r0));
                let fp = move |r: f64| a * lambda * z2.h1(lambda * (r - r0));
                (Box::new(f), Box::new(fp))
            }
        }
    }

    /// Radial interval outside which the profile is below ~1e-18 in magnitude
    /// (exactly zero for the compactly supported bumps).
    pub fn support(&self) -> (f64, f64) {
        // amplitude e^{-(d/s)^2} = 1e-18  =>  d = s sqrt(ln(amplitude * 1e18))
        let decay_radius = |amplitude: f64, s: f64| {
            s * (amplitude.abs().max(1e-30) * 1e18).ln().max(1.0).sqrt()
        };
        match *self {
            CorpusSpec::Gaussian { amplitude, sigma } => (0.0, decay_radius(amplitude, sigma)),
            CorpusSpec::Ring {
                amplitude,
                r0,
                width,
            } => {
                let d = decay_radius(amplitude, width);
                ((r0 - d).max(0.0), r0 + d)
            }
            CorpusSpec::ScaledBump { lambda, offset } => {
                (offset + 1.0 / lambda, offset + 2.0 / lambda)
            }
            CorpusSpec::AnnularBump { lambda, r0 } => (r0 + 1.0 / lambda, r0 + 2.0 / lambda),
        }
    }

    pub fn validate(&self, r_max: f64) -> Result<()> {
        let bad = |msg: String| Err(CglError::Precondition(msg));
        match *self {
            CorpusSpec::Gaussian { amplitude, sigma } => {
                if !(amplitude.is_finite() && sigma > 0.0) {
                    return bad(format!("gaussian needs sigma > 0, got {sigma}"));
                }
            }
            CorpusSpec::Ring { r0, width, .. } => {
                if !(r0 >= 0.0 && width > 0.0) {
                    return bad(format!("ring needs r0 >= 0 and width > 0, got ({r0}, {width})"));
                }
            }
            CorpusSpec::ScaledBump { lambda, offset } => {
                if !(lambda > 0.0 && offset >= 0.0) {
                    return bad(format!(
                        "scaled bump needs lambda > 0 and offset >= 0, got ({lambda}, {offset})"
                    ));
                }
            }
            CorpusSpec::AnnularBump { lambda, r0 } => {
                if !(lambda > 0.0 && r0 > 0.0) {
                    return bad(format!(
                        "annular bump needs lambda > 0 and r0 > 0, got ({lambda}, {r0})"
                    ));
                }
                if lambda * r0 < 2.0 {
                    return bad(format!(
                        "annular bump needs lambda r0 >= 2, got lambda r0 = {}",
                        lambda * r0
                    ));
                }
            }
        }
        let (_, hi) = self.support();
        if hi > 0.98 * r_max {
            return bad(format!(
                "profile support reaches r = {hi}, exceeding the grid (r_max = {r_max})"
            ));
        }
        Ok(())
    }

    pub fn materialize(
        &self,
        grid: &RadialGrid,
        zeta: &Arc<ZetaProfile>,
    ) -> Result<ComplexRadialField> {
        self.validate(grid.r_max)?;
        let (f, _) = self.profile(grid.dim, zeta);
        Ok(ComplexRadialField::from_real_fn(grid, |r| f(r)))
    }

    /// Exact functionals of the radial profile by fine quadrature on its own
    /// support, independent of any simulation grid.
    pub fn exact_moments(
        &self,
        dim: usize,
        alpha: f64,
        zeta: &Arc<ZetaProfile>,
    ) -> FieldMoments {
        let (f, fp) = self.profile(dim, zeta);
        let (lo, hi) = self.support();
        radial_moments(dim, alpha, lo, hi, &f, &fp)
    }
}

type ProfileFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// The functionals the scaling scans and the weighted-inequality search need.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FieldMoments {
    pub mass: f64,
    /// int |grad u|^2
    pub grad: f64,
    /// int |u|^{alpha+2}
    pub lp: f64,
    /// int |x|^2 |u|^{alpha+2}
    pub r2_lp: f64,
    /// int |x|^2 |grad u|^2
    pub r2_grad: f64,
    /// sup_r r^N |u(r)|^2
    pub sup_rn_u2: f64,
}

/// Composite Simpson of a closure on [lo, hi] with n panels (n even).
pub fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(n % 2 == 0);
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += c * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

fn radial_moments(
    dim: usize,
    alpha: f64,
    lo: f64,
    hi: f64,
    f: &ProfileFn,
    fp: &ProfileFn,
) -> FieldMoments {
    let omega = unit_sphere_area(dim);
    let k = dim as i32 - 1;
    let n = 32768;
    let meas = |r: f64| r.powi(k);
    let mass = omega * simpson(lo, hi, n, |r| f(r) * f(r) * meas(r));
    let grad = omega * simpson(lo, hi, n, |r| fp(r) * fp(r) * meas(r));
    let lp = omega * simpson(lo, hi, n, |r| f(r).abs().powf(alpha + 2.0) * meas(r));
    let r2_lp = omega * simpson(lo, hi, n, |r| r * r * f(r).abs().powf(alpha + 2.0) * meas(r));
    let r2_grad = omega * simpson(lo, hi, n, |r| r * r * fp(r) * fp(r) * meas(r));
    let mut sup = 0.0f64;
    for i in 0..=n {
        let r = lo + (hi - lo) * i as f64 / n as f64;
        sup = sup.max(r.powi(dim as i32) * f(r) * f(r));
    }
    FieldMoments {
        mass,
        grad,
        lp,
        r2_lp,
        r2_grad,
        sup_rn_u2: sup,
    }
}

/// Moments of the concentrating family taken as the genuine N-dimensional
/// object centered at distance `offset` from the origin (not its radial
/// shell): u(x) = lambda^{N/2} phi(lambda |x - x0|), |x0| = offset.
///
/// For the weights 1 and |x|^2 the integrals reduce exactly to centered
/// moments of phi plus an offset^2 shift, which keeps the lambda scaling
/// exact at any dimension.
pub fn scaled_family_moments(
    dim: usize,
    alpha: f64,
    lambda: f64,
    offset: f64,
    zeta: &Arc<ZetaProfile>,
) -> FieldMoments {
    let omega = unit_sphere_area(dim);
    let n = 16384;
    let k = dim as f64 - 1.0;
    let p = alpha + 2.0;
    let m = |d: usize, pow: f64, extra: f64| {
        simpson(1.0, 2.0, n, |s| {
            let v = if d == 0 { zeta.h(s) } else { zeta.h1(s) };
            v.abs().powf(pow) * s.powf(k + extra)
        })
    };
    let m2 = m(0, 2.0, 0.0);
    let mg = m(1, 2.0, 0.0);
    let mg_hi = m(1, 2.0, 2.0);
    let mp = m(0, p, 0.0);
    let mp_hi = m(0, p, 2.0);
    let na = dim as f64 * alpha;
    FieldMoments {
        mass: omega * m2,
        grad: lambda * lambda * omega * mg,
        lp: lambda.powf(na / 2.0) * omega * mp,
        r2_lp: lambda.powf(na / 2.0) * omega * (offset * offset * mp + mp_hi / (lambda * lambda)),
        r2_grad: lambda * lambda * omega * (offset * offset * mg + mg_hi / (lambda * lambda)),
        sup_rn_u2: f64::NAN, // not radial; the pointwise radial bound does not apply
    }
}
