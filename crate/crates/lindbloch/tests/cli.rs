//! End-to-end tests of the `lindbloch` binary: spectrum/sweep reference
//! outputs, SVG projections, environment-variable handling, and the
//! exhaustive exit-code contract {0, 2, 3, 4}.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lindbloch"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_critical_regime_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "crit.json",
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [20, 0, 0]}"#,
    );
    let out = bin().args(["spectrum", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["regime"], "critical");
    assert_eq!(json["beta"].as_f64().unwrap(), 1.0);
    assert_eq!(json["defective"], true);
    assert!(json["coalescence"].as_f64().unwrap() > 0.999);
}

#[test]
fn spectrum_z_channel_fixed_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "zchan.json",
        r#"{"hamiltonian": {"e": [0, 0, 5]}, "decay": [0, 0, 1]}"#,
    );
    let out = bin().args(["spectrum", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["fixed_points"]["kind"], "line");
    let basis = json["fixed_points"]["basis"][0].as_array().unwrap();
    let b: Vec<f64> = basis.iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(b[0].abs() < 1e-12 && b[1].abs() < 1e-12 && (b[2] - 1.0).abs() < 1e-12);
    // neutral direction plus an oscillatory-attracting pair
    let classes: Vec<&str> = json["stability"]
        .as_array()
        .unwrap()
        .iter()
        .map(|item| item["class"].as_str().unwrap())
        .collect();
    assert_eq!(classes.iter().filter(|c| **c == "neutral").count(), 1);
    assert_eq!(
        classes
            .iter()
            .filter(|c| **c == "oscillatory_attracting")
            .count(),
        2
    );
}

#[test]
fn spectrum_isotropic_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "iso.json",
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [1, 1, 1]}"#,
    );
    let out = bin().args(["spectrum", "--config", &cfg]).output().unwrap();
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigenvalues = json["eigenvalues"].as_array().unwrap();
    let expected = [(-4.0, 0.0), (-4.0, -20.0), (-4.0, 20.0)];
    for (pair, (re, im)) in eigenvalues.iter().zip(expected.iter()) {
        let got_re = pair[0].as_f64().unwrap();
        let got_im = pair[1].as_f64().unwrap();
        assert!((got_re - re).abs() < 1e-10, "{got_re} vs {re}");
        assert!((got_im - im).abs() < 1e-10, "{got_im} vs {im}");
    }
    // 9 generator entries, row-major
    let gen = json["generator"].as_array().unwrap();
    assert_eq!(gen.len(), 9);
    assert_eq!(gen[0].as_f64().unwrap(), -4.0);
    assert_eq!(gen[1].as_f64().unwrap(), -20.0);
}

#[test]
fn sweep_reference_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--omega0",
        "10",
        "--beta-min",
        "0.5",
        "--beta-max",
        "2.0",
        "--count",
        "4",
        "--csv",
        csv_path.to_str().unwrap(),
    ];
    assert_eq!(bin().args(args).status().unwrap().code(), Some(0));
    let body = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "beta,re_lambda1,re_lambda2,re_lambda3,im_lambda1,im_lambda2,im_lambda3,coalescence,defective"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 4);

    // β = 0.5 row: Im λ = ±2·10·√(1−0.25)
    let want = 2.0 * 10.0 * 0.75f64.sqrt();
    let im5: f64 = rows[0][4].parse().unwrap();
    let im6: f64 = rows[0][5].parse().unwrap();
    let im7: f64 = rows[0][6].parse().unwrap();
    let ims = [im5, im6, im7];
    assert!(ims.iter().any(|im| (im + want).abs() < 1e-10));
    assert!(ims.iter().any(|im| (im - want).abs() < 1e-10));
    assert!((want - 17.320508075688775).abs() < 1e-10);

    // β = 1.0 row: the branch pair collapses to zero, flagged defective
    let beta1: f64 = rows[1][0].parse().unwrap();
    assert_eq!(beta1, 1.0);
    for cell in &rows[1][4..7] {
        let im: f64 = cell.parse().unwrap();
        assert_eq!(im, 0.0);
    }
    assert_eq!(rows[1][8], "true");
    assert_eq!(rows[0][8], "false");

    // dissipativity across all rows
    for row in &rows {
        for cell in &row[1..4] {
            let re: f64 = cell.parse().unwrap();
            assert!(re <= 0.0);
        }
    }

    // byte-stable across runs
    let csv2 = dir.path().join("sweep2.csv");
    let mut args2: Vec<&str> = args.to_vec();
    let csv2_str = csv2.to_str().unwrap();
    let n = args2.len();
    args2[n - 1] = csv2_str;
    bin().args(&args2).status().unwrap();
    assert_eq!(
        std::fs::read(&csv_path).unwrap(),
        std::fs::read(&csv2).unwrap()
    );
}

#[test]
fn sweep_bad_range_exits_2() {
    let out = bin()
        .args([
            "sweep",
            "--omega0",
            "10",
            "--beta-min",
            "2.0",
            "--beta-max",
            "0.5",
            "--count",
            "4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args([
            "sweep",
            "--omega0",
            "10",
            "--beta-min",
            "0.5",
            "--beta-max",
            "2.0",
            "--count",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_stdout_without_csv_flag() {
    let out = bin()
        .args([
            "sweep",
            "--omega0",
            "10",
            "--beta-min",
            "0.5",
            "--beta-max",
            "2.0",
            "--count",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let body = String::from_utf8(out.stdout).unwrap();
    assert!(body.starts_with("beta,"));
    assert_eq!(body.lines().count(), 4);
}

#[test]
fn svg_z_channel_projection_holds_a3_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "zchan.json",
        r#"{"hamiltonian": {"e": [0, 0, 5]}, "decay": [0, 0, 1],
            "initial": {"bloch": [0.7071067811865476, 0, 0.7071067811865476]},
            "time": {"t0": 0, "t1": 1, "samples": 201}}"#,
    );
    let svg_path = dir.path().join("traj.svg");
    let status = bin()
        .args([
            "simulate",
            "--config",
            &cfg,
            "--csv",
            dir.path().join("t.csv").to_str().unwrap(),
            "--svg",
            svg_path.to_str().unwrap(),
            "--plane",
            "xz",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    let points = svg
        .split("points=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    let inv = 1.0 / 2.0f64.sqrt();
    for pair in points.split(' ') {
        let y: f64 = pair.split(',').nth(1).unwrap().parse().unwrap();
        assert!((y - inv).abs() < 1e-9, "polyline y = {y}");
    }
}

#[test]
fn svg_isotropic_spiral_shrinks_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "iso.json",
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [1, 1, 1],
            "initial": {"bloch": [1, 0, 0]},
            "time": {"t0": 0, "t1": 1, "samples": 401}}"#,
    );
    let svg_path = dir.path().join("spiral.svg");
    bin()
        .args([
            "simulate",
            "--config",
            &cfg,
            "--csv",
            dir.path().join("t.csv").to_str().unwrap(),
            "--svg",
            svg_path.to_str().unwrap(),
            "--plane",
            "xy",
        ])
        .status()
        .unwrap();
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    let points = svg
        .split("points=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    let mut prev = f64::INFINITY;
    for pair in points.split(' ') {
        let mut it = pair.split(',');
        let x: f64 = it.next().unwrap().parse().unwrap();
        let y: f64 = it.next().unwrap().parse().unwrap();
        let radius = (x * x + y * y).sqrt();
        assert!(
            radius <= prev + 1e-9,
            "spiral radius grew: {radius} > {prev}"
        );
        prev = radius;
    }
}

#[test]
fn svg_without_plane_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "iso.json",
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [1, 1, 1],
            "initial": {"bloch": [1, 0, 0]}}"#,
    );
    let out = bin()
        .args([
            "simulate",
            "--config",
            &cfg,
            "--svg",
            dir.path().join("x.svg").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--plane"));
}

#[test]
fn simulate_writes_stdout_without_csv_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "small.json",
        r#"{"hamiltonian": {"e": [0, 0, 2]}, "decay": [0.5, 0.5, 0.5],
            "initial": {"bloch": [0.5, 0, 0]},
            "time": {"t0": 0, "t1": 0.5, "samples": 6}}"#,
    );
    let out = bin().args(["simulate", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let body = String::from_utf8(out.stdout).unwrap();
    assert!(body.starts_with("t,a1,a2,a3,r,theta,phi,winding,entropy"));
    assert_eq!(body.lines().count(), 7);
}

#[test]
fn sidecar_metadata_written_next_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "small.json",
        r#"{"hamiltonian": {"e": [0, 0, 2]}, "decay": [0.5, 0.5, 0.5],
            "initial": {"bloch": [0.5, 0, 0]},
            "time": {"t0": 0, "t1": 0.5, "samples": 6}}"#,
    );
    let csv = dir.path().join("out.csv");
    bin()
        .args(["simulate", "--config", &cfg, "--csv", csv.to_str().unwrap()])
        .status()
        .unwrap();
    let meta_path = format!("{}.meta.json", csv.to_str().unwrap());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["command"], "simulate");
    assert_eq!(meta["method"], "exact");
    assert_eq!(meta["time"]["samples"], 6);
}

#[test]
fn tol_env_var_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "sph.json",
        r#"{"hamiltonian": {"e": [0, 0, 3]}, "decay": [0.2, 0.2, 0.2],
            "initial": {"spherical": [0.8, 1.0, 0.0]},
            "time": {"t0": 0, "t1": 0.5, "samples": 11}, "method": "spherical"}"#,
    );

    // malformed env var rejected
    let out = bin()
        .args(["simulate", "--config", &cfg])
        .env("LINDBLOCH_TOL", "banana")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // out-of-range env var rejected
    let out = bin()
        .args(["simulate", "--config", &cfg])
        .env("LINDBLOCH_TOL", "0.5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // an in-range flag wins over a malformed-free env var
    let out = bin()
        .args(["simulate", "--config", &cfg, "--tol", "1e-8"])
        .env("LINDBLOCH_TOL", "0.5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    // valid env var accepted
    let out = bin()
        .args(["simulate", "--config", &cfg])
        .env("LINDBLOCH_TOL", "1e-7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    assert_eq!(
        bin().args(["frobnicate"]).output().unwrap().status.code(),
        Some(2)
    );
    assert_eq!(
        bin().args(["simulate"]).output().unwrap().status.code(),
        Some(2)
    );
    assert_eq!(
        bin()
            .args(["simulate", "--config"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin()
            .args(["simulate", "--config", "x.json", "--frob"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    // missing config file is a config error, not an I/O one
    assert_eq!(
        bin()
            .args(["validate", "--config", "/no/such/file.json"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unknown_config_key_exits_2_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "typo.json",
        r#"{"hamiltonian": {"e": [0, 0, 2]}, "decy": [0.5, 0.5, 0.5]}"#,
    );
    let out = bin().args(["spectrum", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decy"));
}

#[test]
fn spherical_method_csv_matches_exact_method() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"{"hamiltonian": {"e": [1.0, -0.5, 3]}, "decay": [0.3, 0.1, 0.4],
        "initial": {"bloch": [0.4, 0.2, -0.5]},
        "time": {"t0": 0, "t1": 1, "samples": 51}, "method": "METHOD"}"#;
    let run = |method: &str, name: &str| -> Vec<Vec<f64>> {
        let cfg = write_config(&dir, name, &base.replace("METHOD", method));
        let out = bin().args(["simulate", "--config", &cfg]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(4).map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let exact = run("exact", "e.json");
    let spherical = run("spherical", "s.json");
    for (re, rs) in exact.iter().zip(spherical.iter()) {
        for (x, y) in re.iter().zip(rs.iter()) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}
