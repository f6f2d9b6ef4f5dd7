//! File formats: trajectory and sweep CSV, summary and report JSON.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so write -> read -> write is byte-identical; all orderings
//! are fixed, so identical configs produce identical files.

use super::SweepRecord;
use crate::diagnostics::ResidualSeries;
use crate::error::{CglError, Result};
use crate::integrator::{BlowupStatus, Trajectory, TrajectorySample, VarianceAudit};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const TRAJECTORY_HEADER: &str =
    "t,dt,mass,energy,i_val,linf,variance,diss_cum,mass_cum,imqu,var1_rhs,tail_mag";

pub const VARIANCE_AUDIT_HEADER: &str = "t,pure_var2_integrand,pure_var2_wdiss,\
eps_wm,eps_var1_rhs,eps_var2_integrand,eps_var2_wdiss,eps_gamma2_grad,eps_gap_lp,eps_bilap_mass";

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CglError::io(parent))?;
    }
    fs::write(path, contents).map_err(CglError::io(path))
}

pub(crate) fn write_text(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::with_capacity(64 * traj.samples.len() + 128);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.dt,
            s.mass,
            s.energy,
            s.i_val,
            s.linf,
            s.variance,
            s.diss_cum,
            s.mass_cum,
            s.imqu,
            s.var1_rhs,
            s.tail_mag
        );
    }
    write_atomic(path, &out)
}

/// The dense-audit companion file: quadratic-weight second-derivative terms
/// and, when a truncated weight was configured, its full audit columns.
pub fn write_variance_audit_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::new();
    out.push_str(VARIANCE_AUDIT_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let pure = s.pure_audit.as_ref();
        let eps = s.weight_audit.as_ref();
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.t,
            f(pure.map(|a| a.var2_integrand)),
            f(pure.map(|a| a.var2_weighted_diss)),
            f(eps.map(|a| a.weighted_mass)),
            f(eps.map(|a| a.var1_rhs)),
            f(eps.map(|a| a.var2_integrand)),
            f(eps.map(|a| a.var2_weighted_diss)),
            f(eps.map(|a| a.gamma2_grad)),
            f(eps.map(|a| a.gap_lp)),
            f(eps.map(|a| a.bilap_mass)),
        );
    }
    write_atomic(path, &out)
}

/// Echo of the run configuration written into every summary.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ParamsEcho {
    pub dim: usize,
    pub alpha: f64,
    pub theta: f64,
    pub r_max: f64,
    pub m: usize,
    pub dt0: f64,
    pub dt_min: f64,
    pub u_max: Option<f64>,
    pub tol: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub linear_only: bool,
    pub weight_epsilon: Option<f64>,
    pub gn_constant_c: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub params: ParamsEcho,
    pub status: BlowupStatus,
    pub t_last: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_fit: Option<f64>,
    pub fit_exponent: Option<f64>,
    #[serde(with = "crate::serde_util::maybe_inf")]
    pub tau: f64,
    pub k_const: f64,
    pub identity_residual_max: BTreeMap<String, f64>,
}

pub const RUN_SCHEMA: &str = "cgl-lab/run/1";

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CglError::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    text.push('\n');
    write_atomic(path, &text)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(CglError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CglError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.parse::<f64>().map_err(|_| CglError::Schema {
        path: path.to_path_buf(),
        message: format!("line {line}: cannot parse `{field}` as a number"),
    })
}

/// Read a trajectory back from its CSV pair. The summary supplies the
/// recording stride and dimension; the variance-audit file is optional (the
/// second-derivative checks refuse to run without it).
pub fn read_trajectory(dir: &Path) -> Result<(Trajectory, RunSummary)> {
    let summary: RunSummary = read_json(&dir.join("summary.json"))?;
    let traj_path = dir.join("trajectory.csv");
    let text = fs::read_to_string(&traj_path).map_err(CglError::io(&traj_path))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TRAJECTORY_HEADER => {}
        other => {
            return Err(CglError::Schema {
                path: traj_path,
                message: format!("unexpected header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(CglError::Schema {
                path: traj_path,
                message: format!("line {}: expected 12 fields, got {}", i + 1, f.len()),
            });
        }
        let g = |k: usize| parse_f64(f[k], &traj_path, i + 1);
        samples.push(TrajectorySample {
            t: g(0)?,
            dt: g(1)?,
            mass: g(2)?,
            energy: g(3)?,
            i_val: g(4)?,
            linf: g(5)?,
            variance: g(6)?,
            diss_cum: g(7)?,
            mass_cum: g(8)?,
            imqu: g(9)?,
            var1_rhs: g(10)?,
            tail_mag: g(11)?,
            pure_audit: None,
            weight_audit: None,
        });
    }

    let audit_path = dir.join("variance_audit.csv");
    let mut has_weight_audit = false;
    if audit_path.exists() {
        let text = fs::read_to_string(&audit_path).map_err(CglError::io(&audit_path))?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == VARIANCE_AUDIT_HEADER => {}
            other => {
                return Err(CglError::Schema {
                    path: audit_path,
                    message: format!("unexpected header {:?}", other.map(|(_, h)| h)),
                })
            }
        }
        for ((i, line), sample) in lines.zip(samples.iter_mut()) {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(CglError::Schema {
                    path: audit_path,
                    message: format!("line {}: expected 10 fields, got {}", i + 1, f.len()),
                });
            }
            let g = |k: usize| parse_f64(f[k], &audit_path, i + 1);
            sample.pure_audit = Some(VarianceAudit {
                weighted_mass: sample.variance,
                var1_rhs: sample.var1_rhs,
                var2_integrand: g(1)?,
                var2_weighted_diss: g(2)?,
                gamma2_grad: 0.0,
                gap_lp: 0.0,
                bilap_mass: 0.0,
            });
            if !f[3].is_empty() {
                has_weight_audit = true;
                sample.weight_audit = Some(VarianceAudit {
                    weighted_mass: g(3)?,
                    var1_rhs: g(4)?,
                    var2_integrand: g(5)?,
                    var2_weighted_diss: g(6)?,
                    gamma2_grad: g(7)?,
                    gap_lp: g(8)?,
                    bilap_mass: g(9)?,
                });
            }
        }
    } else {
        // first-derivative quadratic checks still work off the base columns
        for sample in samples.iter_mut() {
            sample.pure_audit = Some(VarianceAudit {
                weighted_mass: sample.variance,
                var1_rhs: sample.var1_rhs,
                var2_integrand: f64::NAN,
                var2_weighted_diss: f64::NAN,
                gamma2_grad: 0.0,
                gap_lp: 0.0,
                bilap_mass: 0.0,
            });
        }
    }

    Ok((
        Trajectory {
            samples,
            record_every: summary.params.record_every,
            has_weight_audit,
            dim: summary.params.dim,
            // states are not persisted; loaders get an empty placeholder
            final_state: crate::field::ComplexRadialField { values: vec![] },
        },
        summary,
    ))
}

pub const SWEEP_HEADER: &str = "theta,cos_theta,status,t_lo,t_hi,t_fit,thm1_upper,thm2_lower,\
tau,k_tau_bound,res_mass,res_energy,res_modulus,res_comb_nl,res_comb_grad";

fn status_str(s: BlowupStatus) -> &'static str {
    match s {
        BlowupStatus::GlobalUntilHorizon => "global_until_horizon",
        BlowupStatus::Blowup => "blowup",
        BlowupStatus::TruncationViolated => "truncation_violated",
    }
}

fn status_parse(s: &str) -> Option<BlowupStatus> {
    match s {
        "global_until_horizon" => Some(BlowupStatus::GlobalUntilHorizon),
        "blowup" => Some(BlowupStatus::Blowup),
        "truncation_violated" => Some(BlowupStatus::TruncationViolated),
        _ => None,
    }
}

fn inf_str(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn inf_parse(field: &str, path: &Path, line: usize) -> Result<f64> {
    match field {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => parse_f64(other, path, line),
    }
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.theta,
            r.cos_theta,
            status_str(r.status),
            r.t_lo,
            r.t_hi,
            r.t_fit.map(|v| v.to_string()).unwrap_or_default(),
            inf_str(r.thm1_upper),
            inf_str(r.thm2_lower),
            inf_str(r.tau),
            inf_str(r.k_tau_bound),
            r.res_mass,
            r.res_energy,
            r.res_modulus,
            r.res_comb_nl,
            r.res_comb_grad
        );
    }
    write_atomic(path, &out)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = fs::read_to_string(path).map_err(CglError::io(path))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SWEEP_HEADER => {}
        other => {
            return Err(CglError::Schema {
                path: path.to_path_buf(),
                message: format!("unexpected header {:?}", other.map(|(_, h)| h)),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(CglError::Schema {
                path: path.to_path_buf(),
                message: format!("line {}: expected 15 fields, got {}", i + 1, f.len()),
            });
        }
        let n = i + 1;
        out.push(SweepRecord {
            theta: parse_f64(f[0], path, n)?,
            cos_theta: parse_f64(f[1], path, n)?,
            status: status_parse(f[2]).ok_or_else(|| CglError::Schema {
                path: path.to_path_buf(),
                message: format!("line {n}: unknown status `{}`", f[2]),
            })?,
            t_lo: parse_f64(f[3], path, n)?,
            t_hi: parse_f64(f[4], path, n)?,
            t_fit: if f[5].is_empty() {
                None
            } else {
                Some(parse_f64(f[5], path, n)?)
            },
            thm1_upper: inf_parse(f[6], path, n)?,
            thm2_lower: inf_parse(f[7], path, n)?,
            tau: inf_parse(f[8], path, n)?,
            k_tau_bound: inf_parse(f[9], path, n)?,
            res_mass: parse_f64(f[10], path, n)?,
            res_energy: parse_f64(f[11], path, n)?,
            res_modulus: parse_f64(f[12], path, n)?,
            res_comb_nl: parse_f64(f[13], path, n)?,
            res_comb_grad: parse_f64(f[14], path, n)?,
        });
    }
    Ok(out)
}

/// Residual-vs-time CSV for one identity.
pub fn write_residual_csv(path: &Path, series: &ResidualSeries) -> Result<()> {
    let mut out = String::from("t,residual\n");
    for (t, r) in series.times.iter().zip(&series.residuals) {
        let _ = writeln!(out, "{t},{r}");
    }
    write_atomic(path, &out)
}

/// The weight-table CSV emitted by the `weights` subcommand. The residual
/// columns check the curvature identity 2 - Psi'' = gamma^2 and the
/// Laplacian-gap identity at every row.
pub fn write_weights_csv(
    path: &Path,
    w: &crate::weights::WeightFamily,
    radii: &[f64],
) -> Result<()> {
    let mut out = String::from(
        "r,psi,psi2,lap_psi,bilap_psi,gamma_eps,identity_residual_fDefHeps,identity_residual_fGVlap\n",
    );
    let n = w.dim as f64;
    for &r in radii {
        let gamma = w.gamma_eps(r);
        let s = (w.epsilon * r) * (w.epsilon * r);
        let res_curv = 2.0 - w.psi2(r) - gamma * gamma;
        let gap = 2.0 * n
            - w.lap_psi(r)
            - (n * gamma * gamma + 4.0 * (n - 1.0) * s * w.zeta().zeta2(s));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r,
            w.psi(r),
            w.psi2(r),
            w.lap_psi(r),
            w.bilap_psi(r),
            gamma,
            res_curv,
            gap
        );
    }
    write_atomic(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample(t: f64) -> TrajectorySample {
        TrajectorySample {
            t,
            dt: 1e-3,
            mass: 1.5 + t,
            energy: -0.25 * t,
            i_val: -3.0,
            linf: 2.0,
            variance: 0.5,
            diss_cum: 0.1 * t,
            mass_cum: 1.5 * t,
            imqu: 3.0,
            var1_rhs: 0.25,
            tail_mag: 1e-14,
            pure_audit: Some(VarianceAudit {
                weighted_mass: 0.5,
                var1_rhs: 0.25,
                var2_integrand: 1.25,
                var2_weighted_diss: 0.3,
                gamma2_grad: 0.0,
                gap_lp: 0.0,
                bilap_mass: 0.0,
            }),
            weight_audit: Some(VarianceAudit {
                weighted_mass: 0.4,
                var1_rhs: 0.2,
                var2_integrand: 1.0,
                var2_weighted_diss: 0.2,
                gamma2_grad: 0.01,
                gap_lp: 0.02,
                bilap_mass: 0.03,
            }),
        }
    }

    fn summary() -> RunSummary {
        RunSummary {
            schema: RUN_SCHEMA.into(),
            params: ParamsEcho {
                dim: 2,
                alpha: 2.0,
                theta: 0.0,
                r_max: 12.0,
                m: 256,
                dt0: 1e-4,
                dt_min: 1e-12,
                u_max: None,
                tol: 1e-9,
                t_end: 1.0,
                record_every: 1,
                linear_only: false,
                weight_epsilon: Some(0.5),
                gn_constant_c: 1.0,
            },
            status: BlowupStatus::Blowup,
            t_last: 0.09,
            t_lo: 0.09,
            t_hi: 0.091,
            t_fit: Some(0.0905),
            fit_exponent: Some(-0.5),
            tau: f64::INFINITY,
            k_const: 7.46,
            identity_residual_max: BTreeMap::from([("mass_evolution".into(), 1e-6)]),
        }
    }

    #[test]
    fn trajectory_round_trip_is_byte_identical() {
        let dir = tempdir().unwrap();
        let traj = Trajectory {
            samples: vec![sample(0.0), sample(0.001), sample(0.002)],
            record_every: 1,
            has_weight_audit: true,
            dim: 2,
            final_state: crate::field::ComplexRadialField { values: vec![] },
        };
        write_trajectory_csv(&dir.path().join("trajectory.csv"), &traj).unwrap();
        write_variance_audit_csv(&dir.path().join("variance_audit.csv"), &traj).unwrap();
        write_json(&dir.path().join("summary.json"), &summary()).unwrap();

        let first_traj = fs::read(dir.path().join("trajectory.csv")).unwrap();
        let first_summary = fs::read(dir.path().join("summary.json")).unwrap();

        let (back, sum) = read_trajectory(dir.path()).unwrap();
        assert_eq!(back.samples.len(), 3);
        assert_eq!(back.dim, 2);
        assert!(back.has_weight_audit);
        assert_eq!(back.samples[1].mass, 1.501);
        assert_eq!(
            back.samples[2].weight_audit.as_ref().unwrap().bilap_mass,
            0.03
        );
        assert_eq!(sum.tau, f64::INFINITY);

        // write the parsed data again: identical bytes
        write_trajectory_csv(&dir.path().join("trajectory.csv"), &back).unwrap();
        write_json(&dir.path().join("summary.json"), &sum).unwrap();
        assert_eq!(fs::read(dir.path().join("trajectory.csv")).unwrap(), first_traj);
        assert_eq!(fs::read(dir.path().join("summary.json")).unwrap(), first_summary);
    }

    #[test]
    fn sweep_round_trip_with_sentinels() {
        let dir = tempdir().unwrap();
        let recs = vec![SweepRecord {
            theta: 0.5,
            cos_theta: 0.8775825618903728,
            status: BlowupStatus::Blowup,
            t_lo: 0.25,
            t_hi: 0.26,
            t_fit: None,
            thm1_upper: 1.0,
            thm2_lower: f64::INFINITY,
            tau: f64::INFINITY,
            k_tau_bound: f64::INFINITY,
            res_mass: 1e-5,
            res_energy: 2e-6,
            res_modulus: 0.0,
            res_comb_nl: 1e-5,
            res_comb_grad: 1e-5,
        }];
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &recs).unwrap();
        let bytes1 = fs::read(&path).unwrap();
        let back = read_sweep_csv(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].thm2_lower, f64::INFINITY);
        assert_eq!(back[0].t_fit, None);
        write_sweep_csv(&path, &back).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes1);
    }

    #[test]
    fn loaded_trajectory_without_audit_refuses_second_derivative() {
        let dir = tempdir().unwrap();
        let traj = Trajectory {
            samples: vec![sample(0.0), sample(0.001), sample(0.002), sample(0.003)],
            record_every: 1,
            has_weight_audit: false,
            dim: 2,
            final_state: crate::field::ComplexRadialField { values: vec![] },
        };
        write_trajectory_csv(&dir.path().join("trajectory.csv"), &traj).unwrap();
        write_json(&dir.path().join("summary.json"), &summary()).unwrap();
        // no variance_audit.csv on disk
        let (back, _) = read_trajectory(dir.path()).unwrap();
        match crate::diagnostics::check_variance_identities(
            &back,
            crate::diagnostics::WeightKind::Quadratic,
            0.0,
            2.0,
        ) {
            Err(CglError::DenseRecordingRequired(_)) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_names_the_field() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("summary.json");
        fs::write(&path, "{\"schema\": \"cgl-lab/run/1\"}").unwrap();
        let err = read_json::<RunSummary>(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params"), "error should name the field: {msg}");
    }

    #[test]
    fn empty_sweep_is_a_valid_table() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &[]).unwrap();
        assert_eq!(read_sweep_csv(&path).unwrap().len(), 0);
    }
}
