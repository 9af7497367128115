use std::path::Path;
use std::process::{Command, Output};

use lpinv::io::{read_matrix, write_matrix};
use lpinv_core::{gaussian_matrix, SeededRng};

fn lpinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpinv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_of(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[prefix.len()..].trim().parse().unwrap()
}

#[test]
fn theory_limits() {
    let o = lpinv(&["theory", "--p", "2", "--delta", "0.75", "--limit"]);
    assert!(o.status.success());
    assert_eq!(value_of(&stdout(&o), "alpha_star"), 2.0);

    let o = lpinv(&["theory", "--p", "1", "--delta", "0.5", "--limit", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sq = v["alpha_star_sq"].as_f64().unwrap();
    assert!((sq - 2.970_033_908_757_651).abs() < 1e-12, "{sq}");
    assert_eq!(v["method"], "closed_form_limit");
}

#[test]
fn spinv_of_a_10_by_30_gaussian_has_100_nonzeros() {
    let dir = tempfile::tempdir().unwrap();
    let a = gaussian_matrix(&mut SeededRng::new(1), 10, 30).unwrap();
    let input = dir.path().join("A.csv");
    let output = dir.path().join("X.csv");
    write_matrix(&input, &a).unwrap();
    let o = lpinv(&["spinv", "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_matrix(&output).unwrap();
    assert_eq!(x.shape(), (30, 10));
    let nnz = x.as_slice().iter().filter(|v| v.abs() > 1e-8 * x.max_abs()).count();
    assert_eq!(nnz, 100);
    assert!(stdout(&o).contains("support 100"));
}

#[test]
fn mpp_and_ginv_write_inverses() {
    let dir = tempfile::tempdir().unwrap();
    let a = gaussian_matrix(&mut SeededRng::new(4), 3, 7).unwrap();
    let input = dir.path().join("A.csv");
    write_matrix(&input, &a).unwrap();
    for args in [vec!["mpp"], vec!["ginv", "--p", "1.5"]] {
        let output = dir.path().join("X.csv");
        let mut full = args.clone();
        full.extend(["--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
        let o = lpinv(&full);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let x = read_matrix(&output).unwrap();
        let ax = a.matmul(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ax.get(i, j) - want).abs() < 1e-6, "{args:?}");
            }
        }
    }
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = lpinv(&["experiment", "fig2", "--seed", "7", "--output-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(read_dir_bytes(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["norms.csv", "plot.gp", "summary.json"]);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("spec.json");
    let out = dir.path().join("out");
    std::fs::write(&config, r#"{"name": "concentration", "n_values": [40], "delta_values": [0.25], "trials": 2}"#)
        .unwrap();
    let o = lpinv(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--trials",
        "3",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 3);
    assert!(stdout(&o).contains("n=40 m=11"));
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        vec!["frobnicate"],
        vec!["theory", "--p", "1", "--delta", "0.5"],
        vec!["theory", "--p", "3", "--delta", "0.5", "--limit"],
        vec!["experiment", "fig9"],
        vec!["experiment", "fig3", "--trials", "0"],
        vec!["verify", "--criterion", "12"],
    ] {
        let o = lpinv(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_and_numerical_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = dir.path().join("X.csv");
    let o = lpinv(&["mpp", "--in", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    // rank deficient: the Gram matrix is singular
    let singular = dir.path().join("S.csv");
    std::fs::write(&singular, "# rows=2 cols=3\n1,2,3\n2,4,6\n").unwrap();
    let o = lpinv(&["mpp", "--in", singular.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}
