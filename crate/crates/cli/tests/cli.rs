use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msconformal::PredictionSet;
use serde_json::Value;

fn msconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msconf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Training and query CSVs in `dir`; the query columns are deliberately
/// out of order.
fn fixtures(dir: &Path) -> (String, String) {
    let mut train = String::from("x1,x2,y\n");
    for i in 0..80 {
        let a = (i as f64 * 0.37).sin();
        let b = (i as f64 * 0.91).cos();
        let noise = ((i * 7919) % 101) as f64 / 101.0 - 0.5;
        writeln!(train, "{a},{b},{}", 2.0 * a - b + noise).unwrap();
    }
    let query = "x2,x1\n0,0\n0.5,-0.5\n1,1\n";
    let t = dir.join("train.csv");
    let q = dir.join("query.csv");
    std::fs::write(&t, train).unwrap();
    std::fs::write(&q, query).unwrap();
    (t.to_string_lossy().into_owned(), q.to_string_lossy().into_owned())
}

fn parse_lines(stdout: &[u8]) -> Vec<PredictionSet> {
    String::from_utf8(stdout.to_vec())
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let v: Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["query_index"], i);
            PredictionSet::from_json(&v["intervals"]).unwrap()
        })
        .collect()
}

#[test]
fn every_set_command_emits_parseable_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let runs: [&[&str]; 6] = [
        &["predict", "--m", "39"],
        &["multisplit", "--b", "11", "--m", "39", "--preset", "leftskewed"],
        &[
            "multisplit",
            "--b",
            "5",
            "--m",
            "39",
            "--tau",
            "0.4",
            "--score",
            "cqr",
            "--gamma",
            "0.2",
        ],
        &["crossconf", "--b", "5", "--tau", "0.5"],
        &["loo", "--alpha", "0.2"],
        &["jackknife", "--alpha", "0.2"],
    ];
    for extra in runs {
        let mut args = extra.to_vec();
        args.extend(["--data", &t, "--query", &q]);
        let out = msconf(&args);
        assert!(out.status.success(), "{extra:?}: {}", stderr(&out));
        let sets = parse_lines(&out.stdout);
        assert_eq!(sets.len(), 3, "{extra:?}");
    }
}

#[test]
fn unbounded_endpoints_use_string_sentinels() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    // m = 5 at α = 0.1 needs the 6th of 5 scores
    let out = msconf(&["predict", "--data", &t, "--query", &q, "--m", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let first = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(first, r#"{"query_index":0,"intervals":[["-inf","inf"]]}"#);
}

#[test]
fn seed_determines_output() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let run = |seed: &str| {
        msconf(&[
            "multisplit",
            "--data",
            &t,
            "--query",
            &q,
            "--b",
            "7",
            "--m",
            "30",
            "--seed",
            seed,
        ])
        .stdout
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let run = |threads: &str| {
        msconf(&[
            "--threads",
            threads,
            "crossconf",
            "--data",
            &t,
            "--query",
            &q,
            "--b",
            "8",
        ])
        .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let target = dir.path().join("sets.jsonl");
    let out = msconf(&["loo", "--data", &t, "--query", &q, "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(parse_lines(&std::fs::read(target).unwrap()).len(), 3);
}

#[test]
fn validation_errors_exit_1_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let cases: [&[&str]; 6] = [
        &["predict", "--alpha", "1.5"],
        &["multisplit", "--b", "5", "--tau", "0.9"],
        &["multisplit", "--preset", "leftskewed", "--tau", "0.2"],
        &["predict", "--score", "cqr", "--gamma", "0.7"],
        &["jackknife", "--score", "cqr"],
        &["predict", "--m", "80"],
    ];
    for extra in cases {
        let mut args = extra.to_vec();
        args.extend(["--data", &t, "--query", &q]);
        let out = msconf(&args);
        assert_eq!(out.status.code(), Some(1), "{extra:?}: {}", stderr(&out));
        assert_eq!(
            stderr(&out).trim_end().lines().count(),
            1,
            "{extra:?}: {}",
            stderr(&out)
        );
    }
    let alpha = msconf(&["predict", "--data", &t, "--query", &q, "--alpha", "1.5"]);
    assert!(stderr(&alpha).contains("alpha") && stderr(&alpha).contains("between 0 and 1"));
}

#[test]
fn parse_errors_exit_1_and_help_exits_0() {
    assert_eq!(msconf(&["predict", "--bogus"]).status.code(), Some(1));
    assert_eq!(msconf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        msconf(&["predict", "--alpha", "abc", "--data", "a", "--query", "b"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(msconf(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = fixtures(dir.path());
    let missing = dir.path().join("nope.csv");
    let out = msconf(&["loo", "--data", missing.to_str().unwrap(), "--query", &q]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,x2,y\n1,2,3\n4,,6\n").unwrap();
    let out = msconf(&["loo", "--data", bad.to_str().unwrap(), "--query", &q]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));

    let narrow = dir.path().join("narrow.csv");
    std::fs::write(&narrow, "x1\n0\n").unwrap();
    let out = msconf(&["loo", "--data", &t, "--query", narrow.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x2"));
}

fn raw_crime(path: &PathBuf, rows: usize) {
    let mut s = String::new();
    for r in 0..rows {
        write!(s, "{},?,?,Town{r},{}", r % 50, r % 10 + 1).unwrap();
        for c in 0..122 {
            if c < 23 && r % 3 == 0 {
                s.push_str(",?");
            } else {
                write!(s, ",{:.3}", ((r * 31 + c * 17) % 97) as f64 / 97.0).unwrap();
            }
        }
        writeln!(s, ",{:.3}", ((r * 13) % 89) as f64 / 89.0).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("communities.data");
    raw_crime(&data, 260);
    let out_dir = dir.path().join("results");
    let args = [
        "experiment",
        "--data",
        data.to_str().unwrap(),
        "--strict-crime",
        "--n-train",
        "150",
        "--m",
        "69",
        "--b",
        "11",
        "--reps",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ];
    let out = msconf(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let records = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 6);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 6);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("summary.csv"))
            .unwrap()
            .lines()
            .count(),
        7
    );

    // identical seeds give identical records
    let again = msconf(&args);
    assert!(again.status.success());
    assert_eq!(records, std::fs::read_to_string(out_dir.join("records.csv")).unwrap());

    let bad = msconf(&[
        "experiment",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "single,nope",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_reports_coverage_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let out = msconf(&[
        "simulate",
        "--method",
        "multisplit",
        "--b",
        "5",
        "--m",
        "30",
        "--n",
        "60",
        "--reps",
        "200",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with("multisplit: coverage ") && text.contains(" ± "),
        "{text}"
    );
    let written = std::fs::read_to_string(csv).unwrap();
    assert!(written.starts_with("method,coverage,std_error,reps,mean_width\nmultisplit,"));

    let too_few = msconf(&["simulate", "--reps", "10"]);
    assert_eq!(too_few.status.code(), Some(1));
}
