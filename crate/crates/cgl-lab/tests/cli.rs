//! End-to-end tests of the binary: exit codes, file schemas, idempotence.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cgl-lab"))
}

fn write_config(dir: &Path, body: serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

fn base_config(out: &Path) -> serde_json::Value {
    serde_json::json!({
        "dim": 2,
        "alpha": 2.0,
        "theta": 0.0,
        "grid": {"r_max": 10.0, "m": 512},
        "integrator": {
            "dt0": 1e-4, "dt_min": 1e-12, "tol": 1e-6,
            "t_end": 0.05, "record_every": 4
        },
        "initial_data": {"kind": "gaussian", "amplitude": 3.0, "sigma": 1.0},
        "output_dir": out.to_str().unwrap()
    })
}

#[test]
fn simulate_writes_outputs_and_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), base_config(&out));

    let status = bin().args(["simulate", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let traj1 = fs::read(out.join("trajectory.csv")).unwrap();
    let sum1 = fs::read(out.join("summary.json")).unwrap();
    let var1 = fs::read(out.join("variance_audit.csv")).unwrap();
    assert!(traj1.starts_with(b"t,dt,mass,energy,i_val,linf,variance,diss_cum,mass_cum,imqu,var1_rhs,tail_mag\n"));

    // byte-identical rerun
    let status = bin().args(["simulate", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(fs::read(out.join("trajectory.csv")).unwrap(), traj1);
    assert_eq!(fs::read(out.join("summary.json")).unwrap(), sum1);
    assert_eq!(fs::read(out.join("variance_audit.csv")).unwrap(), var1);

    let summary: serde_json::Value = serde_json::from_slice(&sum1).unwrap();
    assert_eq!(summary["schema"], "cgl-lab/run/1");
    assert_eq!(summary["params"]["m"], 512);
}

#[test]
fn verify_identities_reads_back_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg_body = base_config(&out);
    cfg_body["integrator"]["record_every"] = serde_json::json!(1);
    let cfg = write_config(tmp.path(), cfg_body);

    assert_eq!(
        bin().args(["simulate", "--config"]).arg(&cfg).status().unwrap().code(),
        Some(0)
    );
    let output = bin()
        .args(["verify-identities", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("mass_evolution"), "{text}");
    assert!(out.join("identities.json").exists());
    assert!(out.join("residual_mass_evolution.csv").exists());
    assert!(out.join("residuals.svg").exists());
}

#[test]
fn missing_and_malformed_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // no --config at all
    let status = bin().arg("simulate").status().unwrap();
    assert_eq!(status.code(), Some(2));
    // unknown key
    let mut body = base_config(&tmp.path().join("x"));
    body["mystery"] = serde_json::json!(1);
    let cfg = write_config(tmp.path(), body);
    let output = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("mystery"), "{err}");
}

#[test]
fn truncation_violation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // diffusion on a small box: the spreading Gaussian lifts |u(r_max)|
    // above the tail threshold well before the horizon
    let mut body = base_config(&out);
    body["grid"] = serde_json::json!({"r_max": 6.0, "m": 256});
    body["integrator"]["t_end"] = serde_json::json!(1.0);
    body["integrator"]["linear_only"] = serde_json::json!(true);
    body["initial_data"] = serde_json::json!({"kind": "gaussian", "amplitude": 1.0, "sigma": 0.9});
    let cfg = write_config(tmp.path(), body);
    let status = bin().args(["simulate", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn audit_ceiling_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut body = base_config(&out);
    body["audit"] = serde_json::json!({"max_rel_residual": 1e-15});
    let cfg = write_config(tmp.path(), body);
    let status = bin().args(["simulate", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn weights_subcommand_needs_no_config() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["weights", "--epsilon", "0.1", "--dim", "2", "--out"])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("weights.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r,psi,psi2,lap_psi,bilap_psi,gamma_eps,identity_residual_fDefHeps,identity_residual_fGVlap"
    );
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 8);
        let curv: f64 = f[6].parse().unwrap();
        let gap: f64 = f[7].parse().unwrap();
        assert!(curv.abs() < 1e-10, "{line}");
        assert!(gap.abs() < 1e-10, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 1000);
}

#[test]
fn bounds_subcommand_reports_the_reference_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut body = base_config(&out);
    body["grid"] = serde_json::json!({"r_max": 12.0, "m": 2048});
    let cfg = write_config(tmp.path(), body);
    let status = bin().args(["bounds", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let bounds: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    let upper = bounds["thm1_upper"].as_f64().unwrap();
    assert!((upper - 1.0).abs() < 1e-3, "thm1_upper = {upper}");
    assert!(out.join("functionals.json").exists());
}

#[test]
fn sweep_writes_tables_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let mut body = base_config(&out);
    body.as_object_mut().unwrap().remove("theta");
    body["theta_list"] = serde_json::json!([0.0, 0.5]);
    body["integrator"]["t_end"] = serde_json::json!(0.4);
    body["integrator"]["record_every"] = serde_json::json!(16);
    let cfg = write_config(tmp.path(), body);
    let status = bin()
        .args(["sweep", "--threads", "1", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("theta,cos_theta,status,"));
    assert_eq!(sweep.lines().count(), 3); // header + 2 records
    assert!(out.join("theta_000/trajectory.csv").exists());
    assert!(out.join("theta_000/identities.json").exists());
    assert!(out.join("theta_001/summary.json").exists());
    assert!(out.join("sweep_summary.json").exists());
    assert!(out.join("tlo_vs_costheta.svg").exists());

    // identical config -> identical bytes
    let bytes = fs::read(out.join("sweep.csv")).unwrap();
    let traj = fs::read(out.join("theta_000/trajectory.csv")).unwrap();
    let status = bin()
        .args(["sweep", "--threads", "1", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(fs::read(out.join("sweep.csv")).unwrap(), bytes);
    assert_eq!(fs::read(out.join("theta_000/trajectory.csv")).unwrap(), traj);
}

#[test]
fn necessity_and_lemma71_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scan");
    let mut body = base_config(&out);
    body["necessity"] = serde_json::json!({
        "family": "scaled_bump",
        "lambdas": [4.0, 8.0, 16.0, 32.0],
        "radius": 3.0
    });
    body["lemma71"] = serde_json::json!({
        "m_bound": 6.0,
        "c_grid_min": 1e-3,
        "c_grid_max": 1e6,
        "c_grid_points": 121,
        "corpus": [
            {"kind": "gaussian", "amplitude": 1.0, "sigma": 1.0},
            {"kind": "gaussian", "amplitude": 2.0, "sigma": 2.0}
        ]
    });
    body["grid"] = serde_json::json!({"r_max": 40.0, "m": 512});
    let cfg = write_config(tmp.path(), body);

    let output = bin().args(["necessity", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("fitted exponent"), "{text}");
    assert!(out.join("necessity.json").exists());
    assert!(out.join("necessity.csv").exists());

    let status = bin().args(["lemma71", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("lemma71.json")).unwrap()).unwrap();
    assert!(rep["c_min_found"].as_f64().unwrap().is_finite());
}
