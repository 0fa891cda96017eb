use std::path::PathBuf;
use std::process::{Command, Output};

use ndt_core::bound::NetworkConfig;
use ndt_core::demand::substream_seed;
use ndt_core::montecarlo::monte_carlo_expected;
use ndt_core::{EnvelopeOrder, Rational};

fn ndt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn preset(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name);
    root.to_string_lossy().into_owned()
}

#[test]
fn peak_sweep_golden() {
    let o = ndt(&["peak-sweep", "--kt", "3", "--kr", "3", "--files", "3", "--grid", "1/3:1:3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "mu,value\n1/3,5/3\n2/3,7/6\n1,1\n");
}

#[test]
fn distribution_golden() {
    let o = ndt(&["distribution", "--files", "2", "--kr", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "s,probability\n1,1/2\n2,1/2\n");
}

#[test]
fn verify_passes() {
    let o = ndt(&["verify", "--limit", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    let o = ndt(&["verify", "--limit", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true, "{line}");
    }
}

#[test]
fn infeasible_library_exits_two() {
    let o = ndt(&["peak-sweep", "--kt", "3", "--kr", "5", "--files", "3", "--grid", "1/3:1:3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("N >= K_R"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_configs_exit_one() {
    for args in [
        vec!["peak-sweep", "--kt", "3", "--mu", "0.2"],
        vec!["peak-sweep", "--kt", "3", "--mu", "1.5"],
        vec!["peak-sweep", "--grid", "1:0.5:3"],
        vec!["expected-sweep", "--format", "yaml"],
        vec!["peak-sweep", "--samples", "10"],
        vec!["peak-sweep", "--overlay", "unknown-curve"],
        vec!["peak-sweep", "--kt", "abc"],
        vec!["no-such-command"],
        vec!["point", "--grid", "1/5:1:3"],
    ] {
        let o = ndt(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "expected-sweep", "--kt", "4", "--kr", "6", "--files", "9", "--grid", "1/4:1:5", "--samples", "2000",
        "--seed", "11", "--overlay", "baseline",
    ];
    let a = ndt(&args);
    let b = ndt(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "mu,value,mc_value,baseline");
}

#[test]
fn monte_carlo_column_uses_per_point_substreams() {
    let o = ndt(&[
        "expected-sweep", "--kt", "5", "--kr", "20", "--files", "100", "--grid", "1/5:2/5:2", "--samples", "3000",
        "--seed", "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for (i, row) in rows.iter().enumerate() {
        let mu = Rational::parse(row[0]).unwrap();
        let c = NetworkConfig::new(5, 20, 100, mu).unwrap();
        let est = monte_carlo_expected(&c, 3000, substream_seed(5, i as u64), EnvelopeOrder::Theorem).unwrap();
        assert_eq!(Rational::parse(row[2]).unwrap(), est.mean);
    }
}

#[test]
fn decimal_rendering_and_overlay_order() {
    let o = ndt(&[
        "peak-sweep", "--kt", "3", "--kr", "3", "--files", "3", "--grid", "1/3:1:3", "--decimal", "4",
        "--overlay", "sengupta-converse", "--overlay", "baseline",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "mu,value,sengupta-converse,baseline\n0.3333,1.6667,NA,1.0000\n0.6667,1.1667,NA,1.0000\n1.0000,1.0000,NA,1.0000\n"
    );
}

#[test]
fn json_mirrors_csv() {
    let o = ndt(&["peak-sweep", "--kt", "3", "--kr", "3", "--files", "3", "--grid", "1/3:1:3", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["metadata"]["command"], "peak-sweep");
    assert_eq!(doc["metadata"]["kt"], 3);
    assert_eq!(doc["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    let recs = doc["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["mu"], "1/3");
    assert_eq!(recs[0]["value"], "5/3");
}

#[test]
fn point_reports_sigma_and_segment() {
    let o = ndt(&["point", "--kt", "3", "--kr", "3", "--files", "3", "--mu", "1/2"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "kind,s,probability,mu,t,value,argmax_sigma,t1,t2\npeak,3,1,1/2,3/2,4/3,1,1,2\n"
    );
    let o = ndt(&["point", "--kt", "2", "--kr", "2", "--files", "2", "--mu", "0.5", "--kind", "expected"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("expected,,1,1/2,1,5/4,,,\n"));
}

#[test]
fn envelope_order_flag_is_accepted() {
    let a = ndt(&["peak-sweep", "--kt", "6", "--kr", "9", "--files", "9", "--grid", "1/6:1:11"]);
    let b = ndt(&[
        "peak-sweep", "--kt", "6", "--kr", "9", "--files", "9", "--grid", "1/6:1:11", "--envelope-order", "proof",
    ]);
    assert!(a.status.success() && b.status.success());
    for (la, lb) in stdout(&a).lines().zip(stdout(&b).lines()).skip(1) {
        let va = Rational::parse(la.split(',').nth(1).unwrap()).unwrap();
        let vb = Rational::parse(lb.split(',').nth(1).unwrap()).unwrap();
        assert!(va <= vb);
    }
}

#[test]
fn out_path_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("peak.csv");
    let o = ndt(&["peak-sweep", "--config", &preset("peak-3x3.conf"), "--grid", "1/3:1:3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "mu,value,baseline,mn-scheme,sengupta-converse\n1/3,5/3,1,NA,NA\n2/3,7/6,1,NA,NA\n1,1,1,NA,NA\n"
    );

    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "kt = 3\nwat = 1\n").unwrap();
    let o = ndt(&["peak-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn presets_run() {
    for (cmd, name) in [
        ("peak-sweep", "peak-3x3.conf"),
        ("peak-sweep", "peak-5x5.conf"),
        ("peak-sweep", "peak-10x10.conf"),
        ("expected-sweep", "expected-5x20.conf"),
    ] {
        let o = ndt(&[cmd, "--config", &preset(name)]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().count() > 40);
    }
}
