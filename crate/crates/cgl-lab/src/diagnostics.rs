//! Post-hoc audit of a trajectory against the evolution identities.
//!
//! Time derivatives of recorded series are formed with three-point formulas
//! on the (generally nonuniform) recorded mesh; the identities audit the
//! scheme, they never feed back into it.

use crate::bounds;
use crate::error::{CglError, Result};
use crate::integrator::{Trajectory, TrajectorySample, VarianceAudit};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub max_abs_residual: f64,
    /// Residual relative to the larger of the identity's two sides over the span.
    pub max_rel_residual: f64,
    pub worst_time: f64,
}

impl IdentityReport {
    fn from_series(name: &str, times: &[f64], residual: &[f64], scale: f64) -> Self {
        let mut max_abs = 0.0f64;
        let mut worst = if times.is_empty() { 0.0 } else { times[0] };
        for (&t, &r) in times.iter().zip(residual) {
            if r.abs() > max_abs {
                max_abs = r.abs();
                worst = t;
            }
        }
        IdentityReport {
            name: name.to_string(),
            max_abs_residual: max_abs,
            max_rel_residual: if scale > 0.0 { max_abs / scale } else { max_abs },
            worst_time: worst,
        }
    }
}

/// Residual series alongside the report, for file output and plots.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    pub report: IdentityReport,
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// First derivative at interior index k of a series on a nonuniform mesh.
fn d1(t: &[f64], y: &[f64], k: usize) -> f64 {
    let (t0, t1, t2) = (t[k - 1], t[k], t[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    y0 * (t1 - t2) / ((t0 - t1) * (t0 - t2))
        + y1 * (2.0 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2))
        + y2 * (t1 - t0) / ((t2 - t0) * (t2 - t1))
}

/// Second derivative at interior index k (three-point divided differences).
fn d2(t: &[f64], y: &[f64], k: usize) -> f64 {
    let (t0, t1, t2) = (t[k - 1], t[k], t[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    2.0 * (y0 / ((t0 - t1) * (t0 - t2))
        + y1 / ((t1 - t0) * (t1 - t2))
        + y2 / ((t2 - t0) * (t2 - t1)))
}

fn need_samples(samples: &[TrajectorySample], need: usize, what: &'static str) -> Result<()> {
    if samples.len() < need {
        return Err(CglError::TooFewSamples {
            what,
            have: samples.len(),
            need,
        });
    }
    Ok(())
}

/// d/dt int |u|^2 = -2 cos(theta) I(u).
pub fn check_mass_identity(traj: &Trajectory, _alpha: f64, theta: f64) -> Result<ResidualSeries> {
    let s = &traj.samples;
    need_samples(s, 3, "mass identity")?;
    let t: Vec<f64> = s.iter().map(|x| x.t).collect();
    let mass: Vec<f64> = s.iter().map(|x| x.mass).collect();
    let cos_t = snapped_cos(theta);
    let mut times = Vec::with_capacity(s.len().saturating_sub(2));
    let mut res = Vec::with_capacity(times.capacity());
    let mut scale = 0.0f64;
    for k in 1..s.len() - 1 {
        let lhs = d1(&t, &mass, k);
        let rhs = -2.0 * cos_t * s[k].i_val;
        times.push(t[k]);
        res.push(lhs - rhs);
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    Ok(ResidualSeries {
        report: IdentityReport::from_series("mass_evolution", &times, &res, scale),
        times,
        residuals: res,
    })
}

/// cos(theta) int_0^t ||u_t||^2 + E(u(t)) = E(u(0)).
///
/// The left side is a cancellation of terms that individually grow without
/// bound toward blow-up, so the residual is scaled by the largest term
/// magnitude appearing in the identity, not by the (nearly constant) side
/// value E(0).
pub fn check_energy_identity(traj: &Trajectory) -> Result<ResidualSeries> {
    let s = &traj.samples;
    need_samples(s, 1, "energy identity")?;
    let e0 = s[0].energy;
    let mut times = Vec::with_capacity(s.len());
    let mut res = Vec::with_capacity(s.len());
    let mut scale = e0.abs();
    for x in s {
        times.push(x.t);
        res.push(x.energy + x.diss_cum - e0);
        scale = scale.max(x.energy.abs()).max(x.diss_cum.abs());
    }
    Ok(ResidualSeries {
        report: IdentityReport::from_series("energy_dissipation", &times, &res, scale),
        times,
        residuals: res,
    })
}

/// |int u_t conj(u)| = |I(u)|, both recorded from the same state.
pub fn check_modulus_identity(traj: &Trajectory) -> Result<ResidualSeries> {
    let s = &traj.samples;
    need_samples(s, 1, "modulus identity")?;
    let mut times = Vec::with_capacity(s.len());
    let mut res = Vec::with_capacity(s.len());
    let mut scale = 0.0f64;
    for x in s {
        times.push(x.t);
        res.push(x.imqu - x.i_val.abs());
        scale = scale.max(x.imqu.abs()).max(x.i_val.abs());
    }
    Ok(ResidualSeries {
        report: IdentityReport::from_series("modulus_identity", &times, &res, scale),
        times,
        residuals: res,
    })
}

/// The two combined mass-evolution forms, both derived from the energy and
/// mass identities:
///   d/dt int|u|^2 = 2a/(a+2) cos int|u|^{a+2} + 4 cos * diss_cum - 4 cos E0
///   d/dt int|u|^2 = a cos int|grad u|^2 + 2(a+2) cos * diss_cum - 2(a+2) cos E0
/// The nonlinear power and gradient term are reconstructed from the recorded
/// energy and I algebra.
pub fn check_combined_identities(
    traj: &Trajectory,
    alpha: f64,
    theta: f64,
) -> Result<Vec<ResidualSeries>> {
    let s = &traj.samples;
    need_samples(s, 3, "combined identities")?;
    let cos_t = snapped_cos(theta);
    let e0 = s[0].energy;
    let t: Vec<f64> = s.iter().map(|x| x.t).collect();
    let mass: Vec<f64> = s.iter().map(|x| x.mass).collect();

    let mut times = Vec::new();
    let mut res_n = Vec::new();
    let mut res_u = Vec::new();
    let mut scale_n = 0.0f64;
    let mut scale_u = 0.0f64;
    for k in 1..s.len() - 1 {
        let x = &s[k];
        let grad = 2.0 * ((alpha + 2.0) * x.energy - x.i_val) / alpha;
        let lp = grad - x.i_val;
        let lhs = d1(&t, &mass, k);
        let rhs_n = 2.0 * alpha / (alpha + 2.0) * cos_t * lp + 4.0 * cos_t * x.diss_cum
            - 4.0 * cos_t * e0;
        let rhs_u = alpha * cos_t * grad + 2.0 * (alpha + 2.0) * cos_t * x.diss_cum
            - 2.0 * (alpha + 2.0) * cos_t * e0;
        times.push(x.t);
        res_n.push(lhs - rhs_n);
        res_u.push(lhs - rhs_u);
        scale_n = scale_n.max(lhs.abs()).max(rhs_n.abs());
        scale_u = scale_u.max(lhs.abs()).max(rhs_u.abs());
    }
    Ok(vec![
        ResidualSeries {
            report: IdentityReport::from_series("mass_evolution_nonlinear_form", &times, &res_n, scale_n),
            times: times.clone(),
            residuals: res_n,
        },
        ResidualSeries {
            report: IdentityReport::from_series("mass_evolution_gradient_form", &times, &res_u, scale_u),
            times,
            residuals: res_u,
        },
    ])
}

/// Which recorded weight audit to check the variance identities against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Psi = |x|^2
    Quadratic,
    /// The configured truncated family.
    Truncated,
}

fn audit_of(sample: &TrajectorySample, kind: WeightKind) -> Result<&VarianceAudit> {
    let a = match kind {
        WeightKind::Quadratic => sample.pure_audit.as_ref(),
        WeightKind::Truncated => sample.weight_audit.as_ref(),
    };
    a.ok_or_else(|| {
        CglError::Precondition(
            "trajectory was not recorded with the requested weight audit".into(),
        )
    })
}

/// First- and second-derivative weighted-variance identities.
///
/// The second-derivative check needs dense recording (record_every = 1):
/// second differences on a decimated mesh amplify sampling error into noise.
pub fn check_variance_identities(
    traj: &Trajectory,
    kind: WeightKind,
    theta: f64,
    alpha: f64,
) -> Result<Vec<ResidualSeries>> {
    let s = &traj.samples;
    need_samples(s, 3, "variance identities")?;
    // gradient term reconstructed from energy / I algebra
    let grad_of = |x: &TrajectorySample| 2.0 * ((alpha + 2.0) * x.energy - x.i_val) / alpha;
    let cos_t = snapped_cos(theta);
    let t: Vec<f64> = s.iter().map(|x| x.t).collect();
    let wm: Vec<f64> = s
        .iter()
        .map(|x| audit_of(x, kind).map(|a| a.weighted_mass))
        .collect::<Result<_>>()?;
    let v1: Vec<f64> = s
        .iter()
        .map(|x| audit_of(x, kind).map(|a| a.var1_rhs))
        .collect::<Result<_>>()?;

    let mut times1 = Vec::new();
    let mut res1 = Vec::new();
    let mut scale1 = 0.0f64;
    for k in 1..s.len() - 1 {
        let lhs = 0.5 * d1(&t, &wm, k);
        let rhs = v1[k];
        times1.push(t[k]);
        res1.push(lhs - rhs);
        scale1 = scale1.max(lhs.abs()).max(rhs.abs());
    }
    let name1 = match kind {
        WeightKind::Quadratic => "variance_first_derivative_quadratic",
        WeightKind::Truncated => "variance_first_derivative_truncated",
    };
    let mut out = vec![ResidualSeries {
        report: IdentityReport::from_series(name1, &times1, &res1, scale1),
        times: times1,
        residuals: res1,
    }];

    if traj.record_every != 1 {
        return Err(CglError::DenseRecordingRequired(
            "the second-derivative variance identity",
        ));
    }

    let g: Vec<f64> = s
        .iter()
        .map(|x| audit_of(x, kind).map(|a| a.var2_integrand))
        .collect::<Result<_>>()?;
    // trajectories loaded without the dense-audit companion carry NaN here
    if g.iter().any(|v| !v.is_finite())
        || s.iter().any(|x| {
            audit_of(x, kind)
                .map(|a| !a.var2_weighted_diss.is_finite())
                .unwrap_or(true)
        })
    {
        return Err(CglError::DenseRecordingRequired(
            "the second-derivative variance identity (audit columns missing)",
        ));
    }

    let mut times2 = Vec::new();
    let mut res2 = Vec::new();
    let mut scale2 = 0.0f64;
    for k in 1..s.len() - 1 {
        let x = &s[k];
        let a = audit_of(x, kind)?;
        let grad = grad_of(x);
        let na = traj.dim as f64 * alpha;
        let lhs = 0.5 * d2(&t, &wm, k);
        let rhs = 2.0 * na * x.energy - (na - 4.0) * grad - 2.0 * a.gamma2_grad
            + alpha / (alpha + 2.0) * a.gap_lp
            - 0.5 * a.bilap_mass
            + cos_t * d1(&t, &g, k)
            - 2.0 * cos_t * cos_t * a.var2_weighted_diss;
        times2.push(t[k]);
        res2.push(lhs - rhs);
        scale2 = scale2.max(lhs.abs()).max(rhs.abs());
    }
    let name2 = match kind {
        WeightKind::Quadratic => "variance_second_derivative_quadratic",
        WeightKind::Truncated => "variance_second_derivative_truncated",
    };
    out.push(ResidualSeries {
        report: IdentityReport::from_series(name2, &times2, &res2, scale2),
        times: times2,
        residuals: res2,
    });
    Ok(out)
}

/// The prefix of a trajectory with t <= t_cut, for auditing the smooth span
/// of a blow-up run (residual formulas degrade through the final surge).
pub fn truncate_to(traj: &Trajectory, t_cut: f64) -> Trajectory {
    Trajectory {
        samples: traj
            .samples
            .iter()
            .filter(|s| s.t <= t_cut)
            .cloned()
            .collect(),
        record_every: traj.record_every,
        has_weight_audit: traj.has_weight_audit,
        dim: traj.dim,
        final_state: traj.final_state.clone(),
    }
}

/// Lemma 5.2-style crossing statistic: first time the recorded mass exceeds
/// K(alpha) * mass(0), by linear interpolation between samples.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TauMeasurement {
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub tau: f64,
    pub k: f64,
    /// Whether the E(u0) <= 0 hypothesis held (not enforced, flagged).
    pub negative_energy_hypothesis: bool,
}

pub fn measure_tau(traj: &Trajectory, alpha: f64) -> Result<TauMeasurement> {
    let s = &traj.samples;
    need_samples(s, 1, "tau measurement")?;
    let k = bounds::k_const(alpha)?;
    let m0 = s[0].mass;
    let threshold = k * m0;
    let mut tau = f64::INFINITY;
    for w in s.windows(2) {
        if w[1].mass > threshold {
            let (m_a, m_b) = (w[0].mass, w[1].mass);
            let frac = if m_b > m_a { (threshold - m_a) / (m_b - m_a) } else { 1.0 };
            tau = w[0].t + frac.clamp(0.0, 1.0) * (w[1].t - w[0].t);
            break;
        }
    }
    Ok(TauMeasurement {
        tau,
        k,
        negative_energy_hypothesis: s[0].energy <= 0.0,
    })
}

/// Monotonicity and ordering checks that hold under the paper's hypotheses.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonotonicityChecks {
    /// max over samples of relative mass decrease (should be ~0 for E0 <= 0)
    pub worst_mass_decrease: f64,
    /// max over samples of relative energy increase (should be ~0 for cos > 0)
    pub worst_energy_increase: f64,
    /// max violation of I <= (a+2)E <= (a+2)E0 < 0 (negative-energy runs)
    pub worst_i_chain_violation: f64,
    /// max decrease of the Levine observable -E * mass^{-(a+2)/2}
    pub worst_levine_decrease: f64,
}

pub fn check_monotonicity(traj: &Trajectory, alpha: f64) -> Result<MonotonicityChecks> {
    let s = &traj.samples;
    need_samples(s, 2, "monotonicity checks")?;
    let e0 = s[0].energy;
    let mut worst_mass = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut worst_chain = 0.0f64;
    let mut worst_levine = 0.0f64;
    let levine = |x: &TrajectorySample| -> f64 {
        if x.mass > 0.0 {
            -x.energy * x.mass.powf(-(alpha + 2.0) / 2.0)
        } else {
            0.0
        }
    };
    for w in s.windows(2) {
        let mass_scale = w[0].mass.abs().max(1e-300);
        worst_mass = worst_mass.max((w[0].mass - w[1].mass) / mass_scale);
        let e_scale = w[0].energy.abs().max(1e-300);
        worst_energy = worst_energy.max((w[1].energy - w[0].energy) / e_scale);
        if e0 < 0.0 {
            let l_scale = levine(&w[0]).abs().max(1e-300);
            worst_levine = worst_levine.max((levine(&w[0]) - levine(&w[1])) / l_scale);
        }
    }
    if e0 < 0.0 {
        for x in s {
            let bound = (alpha + 2.0) * x.energy;
            let scale = bound.abs().max(x.i_val.abs()).max(1e-300);
            worst_chain = worst_chain.max((x.i_val - bound) / scale);
            worst_chain = worst_chain.max((bound - (alpha + 2.0) * e0) / scale);
        }
    }
    Ok(MonotonicityChecks {
        worst_mass_decrease: worst_mass,
        worst_energy_increase: worst_energy,
        worst_i_chain_violation: worst_chain,
        worst_levine_decrease: worst_levine,
    })
}

fn snapped_cos(theta: f64) -> f64 {
    let c = theta.cos();
    if c.abs() < 1e-14 {
        0.0
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ComplexRadialField;
    use crate::grid::RadialGrid;
    use crate::integrator::{simulate, SimParams};
    use std::sync::Arc;

    fn zero_traj(n: usize) -> Trajectory {
        let samples = (0..n)
            .map(|i| TrajectorySample {
                t: i as f64 * 0.1,
                dt: 0.1,
                mass: 0.0,
                energy: 0.0,
                i_val: 0.0,
                linf: 0.0,
                variance: 0.0,
                diss_cum: 0.0,
                mass_cum: 0.0,
                imqu: 0.0,
                var1_rhs: 0.0,
                tail_mag: 0.0,
                pure_audit: Some(VarianceAudit {
                    weighted_mass: 0.0,
                    var1_rhs: 0.0,
                    var2_integrand: 0.0,
                    var2_weighted_diss: 0.0,
                    gamma2_grad: 0.0,
                    gap_lp: 0.0,
                    bilap_mass: 0.0,
                }),
                weight_audit: None,
            })
            .collect();
        Trajectory {
            samples,
            record_every: 1,
            has_weight_audit: false,
            dim: 2,
            final_state: crate::field::ComplexRadialField { values: vec![] },
        }
    }

    #[test]
    fn zero_trajectory_all_residuals_zero() {
        let traj = zero_traj(8);
        assert_eq!(
            check_mass_identity(&traj, 2.0, 0.3)
                .unwrap()
                .report
                .max_abs_residual,
            0.0
        );
        assert_eq!(
            check_energy_identity(&traj).unwrap().report.max_abs_residual,
            0.0
        );
        assert_eq!(
            check_modulus_identity(&traj).unwrap().report.max_abs_residual,
            0.0
        );
        for r in check_combined_identities(&traj, 2.0, 0.3).unwrap() {
            assert_eq!(r.report.max_abs_residual, 0.0);
        }
        for r in check_variance_identities(&traj, WeightKind::Quadratic, 0.3, 2.0).unwrap() {
            assert_eq!(r.report.max_abs_residual, 0.0);
        }
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let traj = zero_traj(2);
        assert!(check_mass_identity(&traj, 2.0, 0.0).is_err());
    }

    #[test]
    fn decimated_recording_refused_for_second_derivative() {
        let mut traj = zero_traj(8);
        traj.record_every = 4;
        match check_variance_identities(&traj, WeightKind::Quadratic, 0.0, 2.0) {
            Err(CglError::DenseRecordingRequired(_)) => {}
            other => panic!("expected dense-recording refusal, got {other:?}"),
        }
    }

    #[test]
    fn heat_run_identities_are_small() {
        // moderate grid; the acceptance suite runs the pinned configuration
        let grid = Arc::new(RadialGrid::new(2, 10.0, 1024).unwrap());
        let mut p = SimParams::new(grid.clone(), 2.0, 0.0);
        p.t_end = 0.12;
        p.record_every = 1;
        p.tol = 1e-7;
        let u0 = ComplexRadialField::gaussian(&grid, 3.0, 1.0);
        let (full, est) = simulate(&u0, &p).unwrap();
        // audit the smooth span only
        let traj = truncate_to(&full, 0.9 * est.t_last);

        let mass = check_mass_identity(&traj, 2.0, 0.0).unwrap();
        assert!(
            mass.report.max_rel_residual < 1e-4,
            "mass residual {}",
            mass.report.max_rel_residual
        );
        let energy = check_energy_identity(&traj).unwrap();
        assert!(
            energy.report.max_rel_residual < 1e-4,
            "energy residual {}",
            energy.report.max_rel_residual
        );
        let modulus = check_modulus_identity(&traj).unwrap();
        assert!(
            modulus.report.max_rel_residual < 1e-8,
            "modulus residual {}",
            modulus.report.max_rel_residual
        );
        for r in check_combined_identities(&traj, 2.0, 0.0).unwrap() {
            assert!(
                r.report.max_rel_residual < 1e-4,
                "{}: {}",
                r.report.name,
                r.report.max_rel_residual
            );
        }

        // hypotheses hold (E0 < 0, cos theta > 0): ordering and monotonicity
        let mono = check_monotonicity(&traj, 2.0).unwrap();
        assert!(mono.worst_mass_decrease <= 1e-8);
        assert!(mono.worst_energy_increase <= 1e-8);
        assert!(mono.worst_i_chain_violation <= 1e-8);
        assert!(mono.worst_levine_decrease <= 1e-6);
    }

    #[test]
    fn tau_measurement_cases() {
        let traj = zero_traj(5);
        let tm = measure_tau(&traj, 2.0).unwrap();
        assert!(tm.tau.is_infinite());
        assert!((tm.k - 7.464101615137754).abs() < 1e-10);

        // synthetic crossing: mass ramps linearly from 1 to 10 over [0, 1]
        let mut t2 = zero_traj(11);
        for (i, s) in t2.samples.iter_mut().enumerate() {
            s.t = i as f64 * 0.1;
            s.mass = 1.0 + 9.0 * i as f64 * 0.1;
        }
        let tm2 = measure_tau(&t2, 2.0).unwrap();
        // crossing of 7.4641 at t = (7.4641 - 1)/9
        let expect = (tm2.k - 1.0) / 9.0;
        assert!((tm2.tau - expect).abs() < 1e-12, "tau = {}", tm2.tau);
    }

    #[test]
    fn monotonicity_on_synthetic_series() {
        let mut traj = zero_traj(6);
        for (i, s) in traj.samples.iter_mut().enumerate() {
            s.t = i as f64 * 0.1;
            s.mass = 1.0; // constant mass keeps the Levine observable monotone here
            s.energy = -1.0 - 0.1 * i as f64;
            s.i_val = 4.0 * s.energy - 0.5; // below (a+2)E for a=2
        }
        let checks = check_monotonicity(&traj, 2.0).unwrap();
        assert!(checks.worst_mass_decrease <= 0.0);
        assert!(checks.worst_energy_increase <= 0.0);
        assert!(checks.worst_i_chain_violation <= 0.0);
        assert!(checks.worst_levine_decrease <= 1e-12);
    }
}
