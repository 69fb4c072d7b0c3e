use std::path::Path;
use std::process::{Command, Output};

use flatclust::bayes::ParamMeasure;
use flatclust::bip::BinaryIntegerProgram;
use flatclust::harness::{BenchmarkReport, ExperimentReport};
use flatclust::partition::Partition;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn flatclust(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatclust"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    w("tri.csv", "x\n0\n1\n5\n");
    w("tri_matrix.csv", "0,1,5\n1,0,4\n5,4,0\n");
    w(
        "dirac.json",
        r#"{"space":{"axes":[{"lo":0.0,"hi":1.0,"opposite":true}]},"particles":[{"a":[0.1353],"w":1.0}]}"#,
    );
    dir
}

/// Parsing a command's JSON output and emitting it again reproduces it.
fn assert_round_trip<T: Serialize + DeserializeOwned>(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let value: T = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", text);
}

#[test]
fn cluster_line_example() {
    let dir = setup();
    let out = flatclust(dir.path(), &["cluster", "--functor", "single-linkage", "--a", "0.1353", "--points", "tri.csv"]);
    let p: Partition = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);

    let out = flatclust(
        dir.path(),
        &["cluster", "--functor", "single-linkage", "--a", "0.1353", "--points", "tri_matrix.csv", "--matrix"],
    );
    let q: Partition = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(p, q);
}

#[test]
fn dirac_flatten_matches_cluster() {
    let dir = setup();
    let d = dir.path();
    stdout(&flatclust(d, &["cluster", "--functor", "single-linkage", "--a", "0.1353", "--points", "tri.csv", "--out", "c.json"]));
    stdout(&flatclust(
        d,
        &["flatten", "--functor", "single-linkage", "--measure", "dirac.json", "--points", "tri.csv", "--out", "f.json", "--emit-bip", "bip.json"],
    ));
    let c = std::fs::read_to_string(d.join("c.json")).unwrap();
    assert_eq!(c, std::fs::read_to_string(d.join("f.json")).unwrap());
    assert_round_trip::<Partition>(&d.join("c.json"));
    assert_round_trip::<BinaryIntegerProgram>(&d.join("bip.json"));
    assert!(!d.join("f.json.tmp").exists());
}

#[test]
fn missing_flag_is_usage_error() {
    let dir = setup();
    let out = flatclust(dir.path(), &["cluster", "--functor", "single-linkage", "--points", "tri.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn domain_errors_exit_one_with_json() {
    let dir = setup();
    let out = flatclust(dir.path(), &["cluster", "--functor", "single-linkage", "--a", "1.5", "--points", "tri.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "out_of_range");

    let out = flatclust(dir.path(), &["cluster", "--functor", "single-linkage", "--a", "0.5,0.5", "--points", "tri.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_examples() {
    let dir = setup();
    let d = dir.path();
    let w = |name: &str, text: &str| std::fs::write(d.join(name), text).unwrap();
    w("p22.json", r#"{"n":4,"blocks":[[0,1],[2,3]],"noise":[]}"#);
    w("same.csv", "0\n0\n1\n1\n");
    w("cross.csv", "0\n1\n0\n1\n");
    w("single.json", r#"{"n":4,"blocks":[[0],[1],[2],[3]],"noise":[]}"#);
    w("equal.csv", "7\n7\n7\n7\n");
    w("short.csv", "0\n1\n");

    assert_eq!(stdout(&flatclust(d, &["eval", "--pred", "p22.json", "--labels", "same.csv"])), "1.000000\n");
    assert_eq!(
        stdout(&flatclust(d, &["eval", "--pred", "p22.json", "--labels", "cross.csv", "--out", "ars.json"])),
        "-0.500000\n"
    );
    let ars: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("ars.json")).unwrap()).unwrap();
    assert_eq!(ars["ars"], -0.5);
    assert_eq!(stdout(&flatclust(d, &["eval", "--pred", "single.json", "--labels", "equal.csv"])), "0.000000\n");
    assert_eq!(stdout(&flatclust(d, &["eval", "--pred", "cross.csv", "--labels", "cross.csv"])), "1.000000\n");

    let out = flatclust(d, &["eval", "--pred", "p22.json", "--labels", "short.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn learn_writes_posterior_and_logs() {
    let dir = setup();
    let d = dir.path();
    std::fs::create_dir(d.join("data")).unwrap();
    std::fs::write(d.join("data/a.points.csv"), "x,y\n0,0\n0.1,0\n3,0\n").unwrap();
    std::fs::write(d.join("data/a.labels.csv"), "label\n0\n0\n1\n").unwrap();
    std::fs::write(d.join("data/b.points.csv"), "0,0\n5,0\n5.2,0\n").unwrap();
    std::fs::write(d.join("data/b.labels.csv"), "0\n1\n1\n").unwrap();
    stdout(&flatclust(
        d,
        &[
            "learn", "--functor", "single-linkage", "--prior", "uniform:40", "--data", "data", "--out", "post.json",
            "--ess-log", "ess.csv", "--histogram", "h.csv", "--bins", "5",
        ],
    ));
    assert_round_trip::<ParamMeasure>(&d.join("post.json"));
    let ess = std::fs::read_to_string(d.join("ess.csv")).unwrap();
    assert_eq!(ess.lines().count(), 3);
    assert!(ess.starts_with("step,ess\n1,"));
    let hist = std::fs::read_to_string(d.join("h.csv")).unwrap();
    assert_eq!(hist.lines().count(), 6);

    // A learned posterior is a valid measure for flatten.
    stdout(&flatclust(d, &["flatten", "--functor", "single-linkage", "--measure", "post.json", "--points", "tri.csv", "--mode", "particle"]));

    std::fs::remove_file(d.join("data/b.labels.csv")).unwrap();
    let out = flatclust(d, &["learn", "--functor", "single-linkage", "--prior", "uniform:40", "--data", "data"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_reports_round_trip() {
    let dir = setup();
    let d = dir.path();
    let table = stdout(&flatclust(
        d,
        &["consistency", "--trials", "3", "--updates", "4", "--particles", "30", "--out", "cons.json", "--histogram", "h.csv", "--hist-trial", "2"],
    ));
    assert!(table.contains("recovery rate"));
    assert_round_trip::<ExperimentReport>(&d.join("cons.json"));
    assert!(std::fs::read_to_string(d.join("h.csv")).unwrap().starts_with("bin_lo,bin_hi,mass\n"));

    let out = flatclust(d, &["consistency", "--trials", "2", "--histogram", "h.csv", "--hist-trial", "2"]);
    assert_eq!(out.status.code(), Some(1));

    let table = stdout(&flatclust(d, &["bench", "--grid", "5", "--out", "bench.json"]));
    assert!(table.contains("median grid ars"));
    assert_round_trip::<BenchmarkReport>(&d.join("bench.json"));
}

#[test]
fn thread_cap_variable() {
    let dir = setup();
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_flatclust"))
            .args(["bench", "--grid", "4"])
            .env("FLATCLUST_THREADS", value)
            .current_dir(dir.path())
            .output()
            .unwrap()
    };
    let one = run("1");
    let auto = run("0");
    assert_eq!(stdout(&one), stdout(&auto));
    assert_eq!(run("many").status.code(), Some(1));
}

#[test]
fn help_lists_every_command() {
    let dir = setup();
    let help = stdout(&flatclust(dir.path(), &["--help"]));
    for cmd in ["cluster", "flatten", "learn", "eval", "consistency", "bench"] {
        assert!(help.contains(cmd));
    }
}
