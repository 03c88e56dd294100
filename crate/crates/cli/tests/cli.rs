use std::path::Path;
use std::process::{Command, Output};

fn deblur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deblur"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = deblur(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "-o", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&args);
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.split("\r\n").filter(|l| !l.is_empty());
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn zero_noise_level_is_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = deblur(&["simulate", "-o", dir.path().to_str().unwrap(), "--noise", "gaussian:0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_flag_error() {
    let out = deblur(&["simulate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_manifest_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = deblur(&["deblur", "-o", dir.path().to_str().unwrap(), "--method", "tikhonov"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn too_many_levels_is_a_hierarchy_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "16"]);
    let out = deblur(&["multilevel", "-o", dir.path().to_str().unwrap(), "--levels", "10"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn selector_on_naive_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "16"]);
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        deblur(&["deblur", "-o", d, "--method", "naive", "--select", "lcurve"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        deblur(&["deblur", "-o", d, "--method", "gtik", "--select", "lcurve"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_thread_cap_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_deblur"))
        .args(["simulate", "-o", "unused"])
        .env("DEBLUR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tampered_manifest_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "16"]);
    let path = dir.path().join("manifest.txt");
    let text = std::fs::read_to_string(&path).unwrap().replace("seed=7", "seed=8");
    std::fs::write(&path, text).unwrap();
    let out = deblur(&["analyze", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    simulate(a.path(), &["--size", "32", "--seed", "5"]);
    simulate(b.path(), &["--size", "32", "--seed", "5"]);
    for f in ["x_true.pgm", "b_true.pgm", "b.pgm", "manifest.txt"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn noise_norm_recorded_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "32", "--noise", "gaussian:0.01"]);
    let text = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let get = |k: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{k}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("e_norm") / get("b_true_norm") - 0.01).abs() < 1e-14);
}

#[test]
fn noiseless_picard_ratios_are_the_true_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "16", "--s", "0.7", "--half-width", "1"]);
    ok(&["analyze", "-o", dir.path().to_str().unwrap(), "--noiseless"]);
    let truth = column(&dir.path().join("coefficients.csv"), "true_coeff");
    let ratio = column(&dir.path().join("picard.csv"), "ratio");
    let scale = truth.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (t, r) in truth.iter().zip(&ratio) {
        assert!((t - r).abs() <= 1e-8 * scale, "{t} vs {r}");
    }
}

#[test]
fn analysis_tables_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "32"]);
    ok(&["analyze", "-o", dir.path().to_str().unwrap()]);
    let sigma = column(&dir.path().join("sigma.csv"), "sigma");
    assert_eq!(sigma.len(), 32 * 32);
    assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    let lc = dir.path().join("lcurve.csv");
    let lambda = column(&lc, "lambda");
    let res = column(&lc, "residual");
    let norm = column(&lc, "solution_norm");
    assert!(lambda.windows(2).all(|w| w[0] < w[1]));
    assert!(res.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    assert!(norm.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert_eq!(column(&lc, "is_corner").iter().filter(|&&c| c == 1.0).count(), 1);
}

#[test]
fn discrepancy_auto_matches_noise_norm() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "32"]);
    let d = dir.path().to_str().unwrap();
    ok(&[
        "deblur",
        "-o",
        d,
        "--method",
        "tikhonov",
        "--select",
        "discrepancy:auto",
        "--run",
        "dp",
    ]);
    let text = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let e_norm: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("e_norm="))
        .unwrap()
        .parse()
        .unwrap();
    let residual = column(&dir.path().join("dp/report.csv"), "residual")[0];
    assert!((residual / e_norm - 1.0).abs() < 1e-6, "{residual} vs {e_norm}");
}

#[test]
fn input_image_replaces_simulated_data() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "16"]);
    let d = dir.path().to_str().unwrap();
    ok(&[
        "deblur",
        "-o",
        d,
        "--method",
        "tikhonov",
        "--select",
        "fixed:0.01",
        "--input",
        "b_true.pgm",
        "--run",
        "clean",
    ]);
    ok(&[
        "deblur",
        "-o",
        d,
        "--method",
        "tikhonov",
        "--select",
        "fixed:0.01",
        "--run",
        "noisy",
    ]);
    let clean = column(&dir.path().join("clean/report.csv"), "relative_error")[0];
    let noisy = column(&dir.path().join("noisy/report.csv"), "relative_error")[0];
    assert!(clean.is_finite() && noisy.is_finite());
    assert_ne!(clean, noisy);
    // the automatic target falls back to the recorded simulation noise norm
    ok(&[
        "deblur",
        "-o",
        d,
        "--method",
        "tikhonov",
        "--select",
        "discrepancy:auto",
        "--input",
        "b.pgm",
        "--run",
        "auto",
    ]);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let run = std::fs::read_to_string(dir.path().join("auto/run_manifest.txt")).unwrap();
    let e_norm = manifest.lines().find_map(|l| l.strip_prefix("e_norm=")).unwrap();
    assert_eq!(run.lines().find_map(|l| l.strip_prefix("delta=")), Some(e_norm));
}

#[test]
fn multilevel_writes_every_level() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--size", "32"]);
    let d = dir.path().to_str().unwrap();
    ok(&["multilevel", "-o", d, "--levels", "2", "--prolong"]);
    for n in 0..=2 {
        assert!(dir.path().join(format!("x_level{n}.pgm")).exists());
        assert!(dir.path().join(format!("b_level{n}.pgm")).exists());
    }
    let (header, rows) = read_csv(&dir.path().join("multilevel.csv"));
    assert_eq!(rows.len(), 3);
    assert!(header.contains(&"relative_error".to_string()));
}
