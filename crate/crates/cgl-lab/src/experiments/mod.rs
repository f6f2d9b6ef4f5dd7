//! Theta sweeps, power-law fits, scaling scans, and persistence.

pub mod corpus;
pub mod necessity;
pub mod persist;
pub mod svg;

use crate::bounds;
use crate::diagnostics;
use crate::error::{CglError, Result};
use crate::field::ComplexRadialField;
use crate::functionals;
use crate::integrator::{simulate, BlowupStatus, SimParams, Trajectory};
use crate::weights::ZetaProfile;
use corpus::CorpusSpec;
use rayon::prelude::*;
use std::sync::Arc;

/// Outcome of one theta in a sweep: blow-up statistics, theoretical bounds,
/// and the identity-audit maxima for that run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub cos_theta: f64,
    pub status: BlowupStatus,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_fit: Option<f64>,
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub thm1_upper: f64,
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub thm2_lower: f64,
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub tau: f64,
    /// (alpha+4)/alpha * tau, the crossing-statistic bound on the blow-up time.
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub k_tau_bound: f64,
    pub res_mass: f64,
    pub res_energy: f64,
    pub res_modulus: f64,
    pub res_comb_nl: f64,
    pub res_comb_grad: f64,
}

/// One simulation plus its full audit, as used per sweep point.
pub fn audited_run(
    u0: &ComplexRadialField,
    p: &SimParams,
    gn_c: f64,
) -> Result<(Trajectory, SweepRecord)> {
    let alpha = p.alpha;
    let theta = p.theta;
    let (traj, est) = simulate(u0, p)?;

    // audit the smooth span only
    let span_end = match est.status {
        BlowupStatus::Blowup => 0.9 * est.t_lo,
        _ => est.t_last,
    };
    let audited = diagnostics::truncate_to(&traj, span_end);
    let (res_mass, res_energy, res_modulus, res_comb_nl, res_comb_grad) =
        if audited.samples.len() >= 3 {
            let m = diagnostics::check_mass_identity(&audited, alpha, theta)?;
            let e = diagnostics::check_energy_identity(&audited)?;
            let q = diagnostics::check_modulus_identity(&audited)?;
            let c = diagnostics::check_combined_identities(&audited, alpha, theta)?;
            (
                m.report.max_rel_residual,
                e.report.max_rel_residual,
                q.report.max_rel_residual,
                c[0].report.max_rel_residual,
                c[1].report.max_rel_residual,
            )
        } else {
            (0.0, 0.0, 0.0, 0.0, 0.0)
        };

    let rep0 = functionals::report(&p.grid, u0, alpha)?;
    let thm1 = if theta.cos() > 1e-14 {
        bounds::thm1_upper(rep0.mass, rep0.energy, alpha, theta)?
    } else {
        f64::INFINITY
    };
    let thm2 = if alpha < 4.0 / p.grid.dim as f64 && theta.cos() > 1e-14 {
        bounds::thm2_lower(p.grid.dim, alpha, rep0.mass, rep0.energy, gn_c, theta)?
            .with_energy_part
    } else {
        f64::INFINITY
    };
    let tau_m = diagnostics::measure_tau(&traj, alpha)?;
    let k_tau_bound = if tau_m.tau.is_finite() {
        bounds::tau_to_tmax(tau_m.tau, alpha)?
    } else {
        f64::INFINITY
    };
    let record = SweepRecord {
        theta,
        cos_theta: p.rotation().re,
        status: est.status,
        t_lo: est.t_lo,
        t_hi: est.t_hi,
        t_fit: est.t_fit,
        thm1_upper: thm1,
        thm2_lower: thm2,
        tau: tau_m.tau,
        k_tau_bound,
        res_mass,
        res_energy,
        res_modulus,
        res_comb_nl,
        res_comb_grad,
    };
    Ok((traj, record))
}

/// Independent simulations across theta, fanned out over worker threads and
/// merged in theta order.
pub fn theta_sweep(
    u0_spec: &CorpusSpec,
    base: &SimParams,
    thetas: &[f64],
    zeta: &Arc<ZetaProfile>,
    gn_c: f64,
) -> Result<Vec<(Trajectory, SweepRecord)>> {
    if thetas.is_empty() {
        return Err(CglError::Precondition("empty theta list".into()));
    }
    if !thetas.windows(2).all(|w| w[1] > w[0]) {
        return Err(CglError::Precondition(
            "theta values must be strictly increasing".into(),
        ));
    }
    for &t in thetas {
        if t.cos() <= 1e-14 {
            return Err(CglError::Precondition(format!(
                "sweep thetas must lie strictly inside (-pi/2, pi/2), got {t}"
            )));
        }
    }
    let u0 = u0_spec.materialize(&base.grid, zeta)?;
    thetas
        .par_iter()
        .map(|&theta| {
            let mut p = base.clone();
            p.theta = theta;
            audited_run(&u0, &p, gn_c)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CosPowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub records_used: usize,
}

/// Least-squares fit of log t_lo against log cos theta over blow-up records.
pub fn fit_cos_power(records: &[SweepRecord]) -> Result<CosPowerFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == BlowupStatus::Blowup && r.t_lo > 0.0)
        .map(|r| (r.cos_theta.ln(), r.t_lo.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(CglError::TooFewSamples {
            what: "blow-up records for the cos-power fit",
            have: pts.len(),
            need: 5,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, intercept, sse) = crate::integrator::linear_fit(&xs, &ys)
        .ok_or_else(|| CglError::Precondition("degenerate cos theta grid".into()))?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    Ok(CosPowerFit {
        slope,
        intercept,
        r_squared,
        records_used: pts.len(),
    })
}

/// Geometric cos(theta) grid mapped to increasing theta values.
pub fn thetas_from_cos_grid(first: f64, factor: f64, count: usize) -> Result<Vec<f64>> {
    if !(first > 0.0 && first <= 1.0) || !(factor > 0.0) || count == 0 {
        return Err(CglError::Config(format!(
            "cos grid needs 0 < first <= 1, factor > 0, count >= 1; \
             got ({first}, {factor}, {count})"
        )));
    }
    let mut cosines: Vec<f64> = (0..count).map(|i| first * factor.powi(i as i32)).collect();
    if cosines.iter().any(|&c| c <= 0.0 || c > 1.0) {
        return Err(CglError::Config("cos grid left (0, 1]".into()));
    }
    // increasing theta = decreasing cos
    cosines.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(cosines.iter().map(|c| c.acos()).collect())
}
