use std::fs;
use std::process::{Command, Output};

use ramanujan_parseval::arith::format::read_binary;
use ramanujan_parseval::arith::sieve_mobius;

fn parseval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parseval"))
        .args(args)
        .env_remove("RAMANUJAN_PARSEVAL_MEMORY_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn csum_prints_the_value() {
    let o = parseval(&["csum", "--r", "5", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "4\n");
    let o = parseval(&["csum", "--r", "12", "--n", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["data"]["value"], 4);
    assert_eq!(v["schema"], "ramanujan-parseval csum v1");
}

#[test]
fn correlate_row_near_two_and_a_half() {
    let o = parseval(&[
        "correlate",
        "--family",
        "sigma",
        "--s",
        "1",
        "--t",
        "1",
        "--h",
        "1",
        "--N",
        "1000000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# ramanujan-parseval correlate v1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().is_none());
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    let ratio: f64 = col("ratio").parse().unwrap();
    assert!((ratio - 2.5).abs() < 1e-3, "{ratio}");
    assert_eq!(col("route"), "closed_cor1");
}

#[test]
fn fit_reports_alpha_below_limit() {
    let o = parseval(&[
        "fit",
        "--family",
        "sigma",
        "--s",
        "1",
        "--t",
        "1",
        "--h",
        "1",
        "--grid",
        "1e3,1e4,1e5,1e6",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let alpha = v["data"]["fit"]["alpha"].as_f64().unwrap();
    assert!(alpha <= 0.7667, "{alpha}");
    assert_eq!(v["data"]["pass"], true);
}

#[test]
fn invariant_failure_exits_two() {
    // a negative slack makes the exponent check impossible
    let o = parseval(&[
        "fit",
        "--family",
        "sigma",
        "--s",
        "1",
        "--h",
        "1",
        "--grid",
        "1e3,2e3,4e3,8e3",
        "--slack=-1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_name_the_flag() {
    let o = parseval(&[
        "correlate",
        "--family",
        "sigma",
        "--s",
        "1",
        "--N",
        "1e3",
        "--bogus",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));

    let o = parseval(&["correlate", "--family", "sigma", "--s", "0.4", "--N", "1e3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");

    assert_eq!(parseval(&["--version"]).status.code(), Some(0));
    assert_eq!(parseval(&[]).status.code(), Some(1));
}

#[test]
fn explain_lists_every_subcommand() {
    let o = parseval(&["--explain"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for cmd in [
        "csum",
        "correlate",
        "usplit",
        "lemma1",
        "lemma2",
        "averages",
        "crh",
        "fit",
        "expand",
    ] {
        assert!(text.lines().any(|l| l.starts_with(cmd)), "{cmd}");
    }
}

#[test]
fn memory_budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_parseval"))
        .args(["averages", "--x", "1e3,1e5"])
        .env("RAMANUJAN_PARSEVAL_MEMORY_BUDGET", "4096")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("memory budget"));
    let o = parseval(&["--memory-budget", "1e9", "averages", "--x", "1e3,1e5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn files_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("avg.csv");
    let plot = dir.path().join("avg.plot");
    let o = parseval(&[
        "averages",
        "--x",
        "1e3,1e4",
        "--output",
        out.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# ramanujan-parseval averages v1\nx,"));
    assert_eq!(csv.lines().count(), 4);
    let p = fs::read_to_string(&plot).unwrap();
    assert!(p.starts_with("series,x,y\n"));
    assert_eq!(
        p.lines()
            .filter(|l| l.starts_with("mertens_ratio,"))
            .count(),
        2
    );
}

#[test]
fn binary_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.bin");
    let o = parseval(&[
        "table",
        "--kind",
        "mobius",
        "--limit",
        "5000",
        "--binary",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let t = read_binary(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(t, sieve_mobius(5000).unwrap());
    assert_eq!(
        parseval(&["table", "--kind", "mobius", "--limit", "10", "--binary"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn grids_and_expansions_pass() {
    for args in [
        &["lemma1", "--N", "1e3,1e4"][..],
        &["lemma2"],
        &["crh", "--h", "1,6", "--x", "1e3,1e4"],
        &["expand", "--family", "phi", "--s", "2"],
        &[
            "usplit", "--family", "sigma", "--s", "1", "--h", "1", "--N", "1e3,1e4",
        ],
    ] {
        let o = parseval(args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["lemma1", "--N", "1e3,2e3", "--format", "json"];
    let a = parseval(&args);
    let b = parseval(&args);
    assert_eq!(a.stdout, b.stdout);
}
