use std::path::Path;
use std::process::{Command, Output};

fn extremo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extremo"))
        .current_dir(dir)
        .env_remove("EXTREMO_ORACLE_DIR")
        .args(args)
        .output()
        .expect("spawn extremo")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn simulate(dir: &Path) {
    ok(&extremo(
        dir,
        &[
            "simulate",
            "--n",
            "3000",
            "--seed",
            "7",
            "--out",
            "series.csv",
        ],
    ));
}

#[test]
fn extremogram_prints_one_line_per_lag() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let text = ok(&extremo(
        dir.path(),
        &[
            "extremogram",
            "--input",
            "series.csv",
            "--p",
            "0.05",
            "--hmax",
            "10",
        ],
    ));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    for (h, line) in lines.iter().enumerate() {
        let f: Vec<&str> = line.split(", ").collect();
        assert_eq!(f.len(), 5, "{line}");
        assert_eq!(f[0], h.to_string());
        let rho: f64 = f[1].parse().unwrap();
        let joint: f64 = f[2].parse().unwrap();
        let marginal: f64 = f[3].parse().unwrap();
        assert_eq!(rho, joint / marginal);
        assert!(f[4].parse::<f64>().unwrap() > 0.0);
    }
    assert!(lines[0].starts_with("0, 1, "));
}

#[test]
fn simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&extremo(
        dir.path(),
        &["simulate", "--model", "ma", "--n", "50", "--seed", "1"],
    ));
    let b = ok(&extremo(
        dir.path(),
        &["simulate", "--model", "ma", "--n", "50", "--seed", "1"],
    ));
    let c = ok(&extremo(
        dir.path(),
        &["simulate", "--model", "ma", "--n", "50", "--seed", "2"],
    ));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 50);
}

#[test]
fn bootstrap_transfer_intervals() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let args = [
        "bootstrap",
        "--input",
        "series.csv",
        "--scheme",
        "multiplier",
        "--p1",
        "0.01",
        "--p2",
        "0.05",
        "--B",
        "300",
        "--hmax",
        "5",
        "--r",
        "50",
    ];
    let text = ok(&extremo(dir.path(), &args));
    assert_eq!(ok(&extremo(dir.path(), &args)), text);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,estimate,lower,upper"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        if f[2] == "NA" {
            continue;
        }
        let lo: f64 = f[2].parse().unwrap();
        let hi: f64 = f[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0, "{row}");
    }
}

#[test]
fn bootstrap_all_schemes_direct() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    for scheme in ["multiplier", "dmc", "modified"] {
        let text = ok(&extremo(
            dir.path(),
            &[
                "bootstrap",
                "--input",
                "series.csv",
                "--scheme",
                scheme,
                "--p",
                "0.05",
                "--B",
                "100",
                "--hmax",
                "3",
                "--r",
                "40",
                "--replicates-out",
                "reps.csv",
            ],
        ));
        assert_eq!(text.lines().count(), 5);
        let reps = std::fs::read_to_string(dir.path().join("reps.csv")).unwrap();
        assert_eq!(reps.lines().count(), 101);
    }
}

const TINY: &str =
    "model = ar1\nphi = 0.5\ninnovation = frechet:3\nn = 200\nsim_count = 4\nreplicates = 20\n\
block_length = 10\nthresholds = 0.05\nh_max = 3\ntruth = analytic\n";

#[test]
fn coverage_is_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.cfg"), TINY).unwrap();
    let one = ok(&extremo(
        dir.path(),
        &[
            "coverage",
            "--config",
            "tiny.cfg",
            "--seed",
            "42",
            "--threads",
            "1",
        ],
    ));
    let many = ok(&extremo(
        dir.path(),
        &[
            "coverage",
            "--config",
            "tiny.cfg",
            "--seed",
            "42",
            "--threads",
            "3",
        ],
    ));
    assert_eq!(one, many);
    assert_eq!(one.lines().count(), 1 + 3 * 3);
    let other = ok(&extremo(
        dir.path(),
        &["coverage", "--config", "tiny.cfg", "--seed", "43"],
    ));
    assert_ne!(one, other);
}

#[test]
fn coverage_writes_report_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.cfg"), TINY).unwrap();
    ok(&extremo(
        dir.path(),
        &["coverage", "--config", "tiny.cfg", "--out", "report"],
    ));
    let report = dir.path().join("report");
    assert!(report.join("coverage.csv").exists());
    let plot = std::fs::read_to_string(report.join("coverage_direct_p0.05.tsv")).unwrap();
    assert_eq!(
        plot.lines().next(),
        Some("h\tmultiplier\tdmc\tmodified\tnominal")
    );
    assert_eq!(plot.lines().count(), 4);
}

#[test]
fn oracle_then_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        "model = garch\nn = 200\nsim_count = 2\nreplicates = 10\nblock_length = 10\nh_max = 2\n\
oracle_series = 2\noracle_length = 5000\n";
    std::fs::write(dir.path().join("g.cfg"), cfg).unwrap();
    let missing = extremo(
        dir.path(),
        &["coverage", "--config", "g.cfg", "--oracle-dir", "cache"],
    );
    assert!(!missing.status.success());
    let err = String::from_utf8(missing.stderr).unwrap();
    assert!(
        err.contains("extremo oracle") && err.contains("quantile:0.05"),
        "{err}"
    );

    let listed = ok(&extremo(
        dir.path(),
        &["oracle", "--config", "g.cfg", "--oracle-dir", "cache"],
    ));
    assert!(listed.trim().starts_with("cache/oracle-"));
    let out = Command::new(env!("CARGO_BIN_EXE_extremo"))
        .current_dir(dir.path())
        .env("EXTREMO_ORACLE_DIR", "cache")
        .args(["coverage", "--config", "g.cfg"])
        .output()
        .unwrap();
    assert!(ok(&out).starts_with("scheme,method,p,h"));
}

#[test]
fn malformed_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.cfg"),
        "model = garch\nreplicates = many\n",
    )
    .unwrap();
    let out = extremo(dir.path(), &["coverage", "--config", "bad.cfg"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("replicates"), "{err}");
}

#[test]
fn missing_input_fails_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = extremo(
        dir.path(),
        &["extremogram", "--input", "nope.csv", "--p", "0.05"],
    );
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("nope.csv"), "{err}");
}
