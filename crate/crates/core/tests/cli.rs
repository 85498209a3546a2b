use std::process::{Command, Output};

fn halfline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_values(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn verify_resolvent_kernel_passes() {
    let o = halfline(&["verify", "--check", "resolvent-kernel", "--fiber", "0", "--z", "-1", "--n", "800", "--tmax", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residuals"]["relative_spectral_error"]["value"].as_f64().unwrap() <= 1e-2);
    for key in ["check_name", "parameters", "residuals", "spectra", "passed", "tolerance", "elapsed_seconds"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn projection_spectrum_zero_operator_branch() {
    let o = halfline(&["verify", "--check", "projection-spectrum", "--fiber", "2.5", "--theta", "0.5", "--n", "200", "--tmax", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["parameters"]["branch"], "zero-operator");
}

#[test]
fn malformed_theta_exits_two() {
    let o = halfline(&["verify", "--check", "projection-spectrum", "--fiber", "0", "--theta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta must lie in (0,1)"));
}

#[test]
fn single_row_sweep_exits_two() {
    let o = halfline(&["sweep", "--check", "resolvent-kernel", "--fiber", "0", "--z", "-1", "--points", "200"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resolvent_sweep_writes_csv_and_passes() {
    let o = halfline(&[
        "sweep", "--check", "resolvent-kernel", "--fiber", "0", "--z", "-1", "--tmax", "30", "--points", "200,400,800",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("param,residual\n"));
    assert_eq!(csv_values(&out).len(), 3);
}

#[test]
fn dump_hankel_spectrum() {
    let o = halfline(&["dump", "hankel", "--n", "800", "--tmax", "80", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_values(&stdout(&o));
    assert_eq!(rows.len(), 800);
    assert!(rows.iter().all(|r| r[0].abs() <= 1.02));
}

#[test]
fn dump_projection_kernel_is_sin_kernel() {
    let o = halfline(&["dump", "projection-kernel", "--fiber", "0", "--theta", "0.5", "--n", "20", "--tmax", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_values(&stdout(&o));
    assert_eq!(rows.len(), 400);
    for r in rows {
        let s = r[0] + r[1];
        assert!((r[4] - std::f64::consts::FRAC_2_PI * s.sin() / s).abs() < 1e-15);
    }
}

#[test]
fn dump_unknown_exits_two() {
    assert_eq!(halfline(&["dump", "everything"]).status.code(), Some(2));
}

#[test]
fn config_file_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "check = boundary-bounds\nfiber = 0, 0.5, 2\nn_points = 200\nt_max = 20\nseed = 5\nsamples = 20\n",
    )
    .unwrap();
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("report{k}.json"));
            let o = halfline(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}
