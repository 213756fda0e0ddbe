use std::path::Path;
use std::process::{Command, Output};

fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(args)
        .env_remove("WALKLAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn growth_of_ten_cycle_ends_at_rho_five() {
    let o = walklab(&["growth", "--group", "Z:10", "--gens", "0,1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# walklab "));
    assert!(out.contains("# group = Z:10"));
    assert!(out.contains("# seed = none"));
    assert!(out.contains("# rho: 5"));
    let rows = data_lines(&out);
    assert_eq!(rows[0], "m,V(m),ball_fraction,modgrowth_lhs,modgrowth_rhs");
    assert_eq!(rows.len(), 6);
    assert!(rows[5].starts_with("5,10,"));
}

#[test]
fn sandwich_suite_passes() {
    let o = walklab(&["verify", "sandwich", "--group", "Z:7", "--steps", "0..20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("sandwich/Z:7/discrete,pass"));
    assert!(out.contains("sandwich/Z:7/continuous,pass"));
}

#[test]
fn lazy_three_cycle_mixes_in_two_steps() {
    let o = walklab(&[
        "walk", "mix", "--group", "Z:3", "--law", "lazy", "--metric", "tv", "--clock", "discrete",
        "--eps", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mixing_time"], 2);
    assert_eq!(v["metric"], "tv");
    assert_eq!(v["clock"], "discrete");
    assert_eq!(v["config"]["group"], "Z:3");
    assert_eq!(v["config"]["command"], "walk mix");
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        vec!["walk", "mix", "--group", "Z:3", "--bogus", "1"],
        vec!["growth", "--group", "Q:3"],
        vec!["growth", "--group", "Z:1"],
        vec!["walk", "mix", "--group", "Z:3", "--eps", "1.5"],
        vec!["verify", "nonsense"],
        vec![
            "product",
            "curve",
            "--factor",
            "Z:3",
            "--factor",
            "Z:5",
            "--weights",
            "0.4,0.5",
        ],
        vec!["growth", "--group", "Z:4", "--format", "xml"],
        vec!["frobnicate"],
    ] {
        let o = walklab(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn non_symmetric_walk_is_skipped_not_failed() {
    let o = walklab(&[
        "verify",
        "symmetry",
        "--group",
        "Z:5",
        "--law",
        "probs:0.5,0.5,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("symmetry/Z:5,skipped,law is not symmetric"));
}

#[test]
fn verify_all_is_byte_identical() {
    let a = walklab(&["verify", "all", "--seed", "7", "--format", "json"]);
    let b = walklab(&["verify", "all", "--seed", "7", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["failed"], 0);
    assert_eq!(v["seed"], 7);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# looser target\neps = 0.5\n").unwrap();
    let o = walklab(&[
        "walk",
        "mix",
        "--group",
        "Z:3",
        "--eps",
        "0.1",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mixing_time"], 1);
    assert_eq!(v["config"]["eps"], "0.5");

    std::fs::write(&cfg, "no_such_flag = 3\n").unwrap();
    let o = walklab(&[
        "walk",
        "mix",
        "--group",
        "Z:3",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn progress_goes_to_stderr_only() {
    let quiet = walklab(&["walk", "curve", "--group", "Z:6", "--max-steps", "5"]);
    let loud = walklab(&[
        "walk",
        "curve",
        "--group",
        "Z:6",
        "--max-steps",
        "5",
        "--progress",
    ]);
    assert!(quiet.stderr.is_empty());
    assert!(!loud.stderr.is_empty());
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("# progress"))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&quiet), strip(&loud));
}

#[test]
fn output_file_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let summary = dir.path().join("summary.json");
    let o = walklab(&[
        "walk",
        "curve",
        "--group",
        "H:3",
        "--law",
        "uniform",
        "--clock",
        "continuous",
        "--times",
        "0:1:4",
        "--output",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows = data_lines(&csv);
    assert_eq!(
        rows[0],
        "clock,time,tv,hellinger,tv_upper_bound,tv_lower_bound"
    );
    assert_eq!(rows.len(), 6);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(v["bounds"]["lambda"].as_f64().unwrap() > 0.0);
}

fn product_rows(cache: Option<&Path>) -> String {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_walklab"));
    cmd.args([
        "product",
        "curve",
        "--factor",
        "Z:3@lazy",
        "--factor",
        "Z:5",
        "--weights",
        "0.4,0.6",
        "--times",
        "0,1,5",
    ]);
    match cache {
        Some(dir) => cmd.env("WALKLAB_CACHE_DIR", dir),
        None => cmd.env_remove("WALKLAB_CACHE_DIR"),
    };
    let o = cmd.output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    data_lines(&stdout(&o)).join("\n")
}

#[test]
fn product_curve_matches_oracle_and_cache() {
    let plain = product_rows(None);
    let lines: Vec<&str> = plain.lines().collect();
    assert_eq!(
        lines[0],
        "t,hellinger_exact,tv_lower,tv_upper,lemmaA1_lower,lemmaA1_upper,oracle_available,oracle_value"
    );
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let exact: f64 = f[1].parse().unwrap();
        let oracle: f64 = f[7].parse().unwrap();
        assert_eq!(f[6], "true");
        assert!((exact - oracle).abs() < 1e-9);
    }
    let dir = tempfile::tempdir().unwrap();
    let first = product_rows(Some(dir.path()));
    assert!(dir.path().join("factor-hellinger.tsv").exists());
    let second = product_rows(Some(dir.path()));
    assert_eq!(first, second);
    assert_eq!(first, plain);
}

#[test]
fn laplace_tau_unit_values() {
    let o = walklab(&[
        "laplace",
        "tau",
        "--a",
        "1,1,1",
        "--lambda",
        "1,2,3",
        "--c",
        "0.5,1.5,3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows = data_lines(&out);
    let tau = |row: &str| row.split(',').nth(3).unwrap().parse::<f64>().unwrap();
    assert!((tau(rows[1]) - 2f64.ln()).abs() < 1e-12);
    assert!((tau(rows[2]) - 3f64.ln() / 2.0).abs() < 1e-12);
    assert_eq!(rows[3], "3.0000000000000000e0,,,,");
}

#[test]
fn family_scan_reads_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("family.cfg");
    std::fs::write(
        &spec,
        "kind = nested\nfactor = cycle-lazy:offset=2\nweights = const:c=1\nn_range = 1..40\n",
    )
    .unwrap();
    let o = walklab(&[
        "family",
        "scan",
        "--spec",
        spec.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 40);
    assert!(v["verdict"].is_string());
    assert!(v["trend"]["slope_min"].is_number());

    std::fs::write(
        &spec,
        "factor = cycle-lazy\nweights = nope\nn_range = 1..4\n",
    )
    .unwrap();
    let o = walklab(&["family", "scan", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn randomized_runs_are_reproducible() {
    let args = [
        "experiment",
        "randomized",
        "--mode",
        "poly",
        "--gamma",
        "3",
        "--seed",
        "42",
        "--trials",
        "3",
        "--n-range",
        "1..60",
    ];
    let a = walklab(&args);
    let b = walklab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.contains("# seed = 42"));
    assert_eq!(data_lines(&out).len(), 4);
    assert_eq!(
        walklab(&["experiment", "randomized", "--mode", "poly"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn group_listing_round_trips_labels() {
    let o = walklab(&["group", "--group", "H:3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 28);
    assert_eq!(rows[1], "0,0.0.0,0.0.0,true");
}
