use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn body(csv: &str) -> Vec<String> {
    csv.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

fn rows(csv: &str) -> Vec<csv::StringRecord> {
    let data = body(csv).join("\n");
    csv::Reader::from_reader(data.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn spectrum_on_interval_reports_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.csv");
    let o = qgraph(&[
        "spectrum",
        "--graph",
        &fixture("interval.json"),
        "--h",
        "0.005",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# qgraph "));
    assert!(text.contains("# seed: 0"));
    assert!(text.contains("# hypotheses: "));
    let r = rows(&text);
    let lambda: f64 = r.last().unwrap()[1].parse().unwrap();
    assert!((lambda - std::f64::consts::PI.powi(2)).abs() < 1e-3, "{lambda}");
}

#[test]
fn validate_zero_weight_exits_two_citing_clause() {
    let o = qgraph(&["validate", "--graph", &fixture("star3.json"), "--coeffs", &fixture("w_zero.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("clause (2)"), "{err}");
    let r = rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(&r[1][1], "false");
}

#[test]
fn validate_passes_on_clean_fixture() {
    let o = qgraph(&["validate", "--graph", &fixture("kite.json"), "--coeffs", &fixture("variable.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn hypothesis_failure_blocks_persson_unless_overridden() {
    let args = [
        "persson",
        "--graph",
        &fixture("halfline40.json"),
        "--coeffs",
        &fixture("w_zero.json"),
        "--levels",
        "1",
        "--outer",
        "4",
        "--h",
        "0.1",
    ];
    let o = qgraph(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--override"));
    // w = 0 sits on edge e1, inside every annulus with n = 1, so the
    // assembly itself refuses even with the override
    let mut with = args.to_vec();
    with.push("--override");
    let o = qgraph(&with);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("must be positive"));
}

#[test]
fn persson_schedule_error_precedes_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = qgraph(&[
        "persson",
        "--graph",
        &fixture("halfline40.json"),
        "--levels",
        "5,8",
        "--outer",
        "3,4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid schedule"));
    assert!(!out.exists());
}

#[test]
fn persson_output_is_deterministic_across_worker_counts() {
    let run = |workers: &str| {
        let o = qgraph(&[
            "persson",
            "--graph",
            &fixture("halfline40.json"),
            "--levels",
            "1,2,4",
            "--outer",
            "8,12,16",
            "--h",
            "0.05",
            "--workers",
            workers,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert_eq!(body(&a), body(&b));
    let r = rows(&a);
    assert_eq!(r.len(), 9);
    assert_eq!(&r[0][0], "1");
    assert_eq!(&r[0][1], "8");
    for rec in &r {
        let (n, big): (f64, f64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
        let lambda: f64 = rec[2].parse().unwrap();
        let exact = (std::f64::consts::PI / (big - n)).powi(2);
        assert!((lambda - exact).abs() < 1e-3 * exact.max(1.0));
    }
}

#[test]
fn ap_check_outcomes_on_star() {
    let run = |lambda: &str| {
        let o = qgraph(&["ap-check", "--graph", &fixture("star3.json"), "--lambda", lambda, "--level", "1", "--h", "0.02"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        rows(&String::from_utf8_lossy(&o.stdout)).remove(0)
    };
    let cert = run("2.0");
    assert_eq!(&cert[0], "certificate");
    assert!(cert[4].parse::<f64>().unwrap() > 0.0);
    assert_eq!(&run("3.0")[0], "refutation");
    assert_eq!(&run("-1")[0], "certificate");
}

#[test]
fn positive_solution_cosh_profile() {
    let o = qgraph(&[
        "positive-solution",
        "--graph",
        &fixture("interval.json"),
        "--lambda",
        "-1",
        "--level",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let values: Vec<f64> = rows(&String::from_utf8_lossy(&o.stdout))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    let (min, max) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!((max / min - 0.5f64.cosh()).abs() < 1e-4);
}

#[test]
fn positive_solution_too_close_is_usage_error() {
    let o = qgraph(&["positive-solution", "--graph", &fixture("interval.json"), "--lambda", "20", "--level", "1", "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not safely below"));
}

#[test]
fn sobolev_table_is_monotone() {
    let o = qgraph(&["sobolev", "--graph", &fixture("star3.json"), "--coeffs", &fixture("variable.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c: Vec<f64> = rows(&String::from_utf8_lossy(&o.stdout))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(c.len(), 4);
    assert!(c.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn spectrum_dumps_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgraph(&[
        "spectrum",
        "--graph",
        &fixture("star3.json"),
        "--h",
        "0.1",
        "--dump-matrices",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(dir.path().join("level_1/m.mtx")).unwrap();
    assert!(m.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
}

#[test]
fn spectrum_without_boundary_dirichlet_drops_leaf_conditions() {
    let o = qgraph(&["spectrum", "--graph", &fixture("star3.json"), "--h", "0.05", "--no-boundary-dirichlet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("boundary_dirichlet=false"));
    let lambda: f64 = rows(&text).last().unwrap()[1].parse().unwrap();
    assert!(lambda.abs() < 1e-8, "{lambda}");
}

#[test]
fn verify_default_suite_passes() {
    let o = qgraph(&["verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("# seed: 3"));
    let r = rows(&text);
    assert!(r.iter().all(|rec| &rec[2] == "true"));
    assert!(r.iter().any(|rec| &rec[1] == "q-shift identity"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qgraph(&["spectrum", "--bogus"]).status.code(), Some(1));
    assert_eq!(qgraph(&["spectrum", "--graph", "missing.json"]).status.code(), Some(1));
    assert_eq!(
        qgraph(&["spectrum", "--graph", &fixture("interval.json"), "--h", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(qgraph(&["--version"]).status.code(), Some(0));
}
