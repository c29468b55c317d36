use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use hidden_parity::export::{read_kernel_csv, KernelTable};
use nalgebra::DMatrix;
use tempfile::TempDir;

fn hparity(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hparity"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn hparity")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn kernel(path: &Path) -> KernelTable {
    read_kernel_csv(BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn real_matrix(t: &KernelTable) -> DMatrix<f64> {
    let n = t.points.len();
    DMatrix::from_fn(n, n, |i, j| {
        assert_eq!(t.values[i][j].im, 0.0);
        t.values[i][j].re
    })
}

#[test]
fn solve_harmonic_prints_ground_state() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["solve", "--potential", "harmonic", "--xmin", "-8", "--xmax", "8", "--n", "799"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let e0: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("E0 = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((e0 - 1.0).abs() < 1e-3);

    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,energy"));
    assert_eq!(csv.lines().count(), 800);
}

#[test]
fn solve_polynomial_prints_ascending_levels() {
    let dir = TempDir::new().unwrap();
    let o = hparity(&["solve", "--poly", "0,0,0,1,1", "--n", "399"], dir.path());
    assert_eq!(code(&o), 0);
    let levels: Vec<f64> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(" = ").filter(|(k, _)| k.starts_with('E')))
        .map(|(_, v)| v.parse().unwrap())
        .collect();
    assert_eq!(levels.len(), 10);
    assert!(levels.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn solve_samples_adds_grid_columns() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["solve", "--potential", "harmonic", "--n", "9", "--samples"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    for line in csv.lines() {
        assert_eq!(line.split(',').count(), 2 + 9);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["solve", "--n", "1"][..],
        &["solve", "--potential", "harmonic", "--n", "1"],
        &["solve", "--potential", "octic"],
        &["solve", "--poly", "0,1"],
        &["solve", "--potential", "harmonic", "--xmin", "3", "--xmax", "-3"],
        &["verify", "--potential", "harmonic", "--tol", "involution"],
        &["verify", "--potential", "harmonic", "--tol", "nonsense=1e-3"],
        &["verify", "--potential", "harmonic", "--omega-branch", "x"],
        &["verify", "--potential", "harmonic", "--truncate", "0"],
        &["sweep", "--potential", "harmonic"],
        &["nonsense"],
    ] {
        let o = hparity(args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn sweep_with_two_points_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["sweep", "--potential", "harmonic", "--sweep-n", "99,199"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn unreachable_tolerance_fails_verification() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["verify", "--potential", "harmonic", "--n", "199", "--tol", "involution=1e-20"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], false);
    let inv = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "involution")
        .unwrap();
    assert_eq!(inv["pass"], false);
    assert_eq!(inv["tolerance"], 1e-20);
}

#[test]
fn tolerance_override_from_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"potential": {"named": "harmonic"}, "grid": {"n": 199},
            "suite": {"tolerances": {"involution": 1e-20}}}"#,
    )
    .unwrap();
    let o = hparity(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);

    // flags override the file
    let o = hparity(
        &["verify", "--config", cfg.to_str().unwrap(), "--tol", "involution=1e-10"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn harmonic_verify_reports_reflection_pass() {
    let dir = TempDir::new().unwrap();
    let o = hparity(&["verify", "--potential", "harmonic", "--n", "399"], dir.path());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let refl = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "reflection_reduction")
        .unwrap();
    assert_eq!(refl["pass"], true);
    assert_eq!(refl["status"], "checked");
}

#[test]
fn perturbed_mode_fails_verification() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["verify", "--potential", "harmonic", "--n", "199", "--perturb-mode", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn report_is_reproducible_apart_from_timings() {
    let strip = |dir: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        for c in v["checks"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("seconds");
        }
        v.to_string()
    };
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["verify", "--potential", "quartic_cubic", "--n", "299"];
    assert_eq!(code(&hparity(&args, a.path())), 0);
    assert_eq!(code(&hparity(&args, b.path())), 0);
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn harmonic_export_is_anti_identity() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["export-kernel", "--potential", "harmonic", "--n", "199"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let t = kernel(&dir.path().join("kernel_P.csv"));
    let h = 20.0 / 200.0;
    let n = t.points.len();
    assert_eq!(n, 199);
    let hp = real_matrix(&t) * h;
    let j = DMatrix::from_fn(n, n, |r, c| if r + c == n - 1 { 1.0 } else { 0.0 });
    assert!((hp - j).amax() <= 1e-6);
    assert!(!dir.path().join("kernel_Q.csv").exists());
}

#[test]
fn quartic_cubic_export_is_symmetric() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["export-kernel", "--potential", "quartic_cubic", "--n", "199", "--with-q"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let p = real_matrix(&kernel(&dir.path().join("kernel_P.csv")));
    assert!((&p - p.transpose()).amax() <= 1e-11);

    let q = kernel(&dir.path().join("kernel_Q.csv"));
    assert!(q.values.iter().flatten().any(|z| z.im.abs() > 1e-3));
}

#[test]
fn truncated_export_has_rank_of_truncation() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["export-kernel", "--potential", "quartic_cubic", "--n", "149", "--truncate", "50", "--text"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let p = real_matrix(&kernel(&dir.path().join("kernel_P.csv")));
    let mut sv: Vec<f64> = p.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    assert!(sv[49] > 1e-8 * sv[0]);
    assert!(sv[50] <= 1e-8 * sv[0]);

    let text = fs::read_to_string(dir.path().join("kernel_P.txt")).unwrap();
    assert_eq!(text.lines().count(), 149);
}

#[test]
fn sweep_writes_per_point_spectra_and_table() {
    let dir = TempDir::new().unwrap();
    let o = hparity(
        &["sweep", "--potential", "harmonic", "--sweep-h", "0.1,0.05,0.025", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for n in [199, 399, 799] {
        assert!(dir.path().join(format!("spectrum_n{n}.csv")).exists());
    }
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&c| c == "order0").unwrap();
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    let order: f64 = last[col].parse().unwrap();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}
