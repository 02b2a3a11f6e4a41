use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fairir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairir")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn synth(dir: &Path, topics: usize, pool: usize) -> PathBuf {
    let path = dir.join(format!("synth-{topics}-{pool}.json"));
    let o = fairir(&[
        "synth",
        "--topics",
        &topics.to_string(),
        "--pool",
        &pool.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    path
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split('\t').map(String::from).collect()).collect()
}

#[test]
fn evaluate_one_topic_three_metrics() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 1, 30);
    let o = fairir(&["evaluate", "--bundle", bundle.to_str().unwrap(), "--metrics", "fair,kl,ndrkl", "--k", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "algorithm\tmetric\tk\tmean\tmin\tmax\texcluded\tflags");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[1].as_str()).collect::<Vec<_>>(), ["fair", "kl", "ndrkl"]);
}

#[test]
fn missing_qrels_without_proxy_is_data_error() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r.run");
    fs::write(&run, "1 Q0 a 1 1.0 t\n1 Q0 b 2 0.5 t\n").unwrap();
    let o = fairir(&["evaluate", "--run", run.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--qrels"), "{}", stderr(&o));
}

#[test]
fn proxy_mode_evaluates_a_bare_run() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("r.run");
    let groups = dir.path().join("g.txt");
    fs::write(&run, "1 Q0 a 1 1.0 t\n1 Q0 b 2 0.5 t\n1 Q0 c 3 0.2 t\n").unwrap();
    fs::write(&groups, "a X\nb Y\nc X\n").unwrap();
    for proxy in ["graded-log", "binary-top:2", "uniform"] {
        let o = fairir(&[
            "evaluate",
            "--run",
            run.to_str().unwrap(),
            "--groups",
            groups.to_str().unwrap(),
            "--proxy",
            proxy,
            "--k",
            "3",
        ]);
        assert_eq!(o.status.code(), Some(0), "{proxy}: {}", stderr(&o));
        assert_eq!(data_rows(&stdout(&o))[0][0], "t");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 2, 20);
    let b = bundle.to_str().unwrap();
    for args in [
        vec!["evaluate", "--bundle", b, "--metrics", "fair,bogus"],
        vec!["rerank", "--bundle", b, "--epsilon", "1.5"],
        vec!["rerank", "--bundle", b, "--epsilon", "-0.1"],
        vec!["evaluate", "--bundle", b, "--k", "0"],
        vec!["evaluate", "--bundle", b, "--desired", "sideways"],
        vec!["evaluate", "--bundle", b, "--alpha", "1"],
        vec!["correlate", "--bundle", b, "--pairs", "fair"],
        vec!["synth", "--prior", "0.5,0.6"],
        vec!["frobnicate"],
    ] {
        assert_eq!(fairir(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn rerank_epsilon_zero_ignores_seed() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 3, 30);
    let mut outputs = Vec::new();
    for seed in ["1", "99"] {
        let rankings = dir.path().join(format!("rank-{seed}.run"));
        let o = fairir(&[
            "rerank",
            "--bundle",
            bundle.to_str().unwrap(),
            "--epsilon",
            "0",
            "--seed",
            seed,
            "--rankings-out",
            rankings.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(fs::read(&rankings).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].is_empty());
}

#[test]
fn randomized_rerank_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 2, 30);
    let run = |seed: &str| {
        let o = fairir(&[
            "rerank",
            "--bundle",
            bundle.to_str().unwrap(),
            "--epsilon",
            "0.5",
            "--runs",
            "1000",
            "--seed",
            seed,
            "--metrics",
            "fair,kl",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o.stdout
    };
    assert_eq!(run("5"), run("5"));
}

#[test]
fn correlate_rows_and_self_correlation() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 30, 40);
    let o = fairir(&[
        "correlate",
        "--bundle",
        bundle.to_str().unwrap(),
        "--pairs",
        "fair:fair,fair:kl,fair:ndrkl",
        "--k",
        "5,10,20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    for r in rows.iter().filter(|r| r[0] == "fair:fair") {
        assert_eq!(r[3], "1.000000");
        assert_eq!(r[6], "1.000000");
    }
}

#[test]
fn constant_series_is_undefined_correlation() {
    let dir = TempDir::new().unwrap();
    let qrels = dir.path().join("q.txt");
    let run = dir.path().join("r.run");
    let (mut q, mut r) = (String::new(), String::new());
    for t in 1..=4 {
        q.push_str(&format!("{t} s1 a 1\n{t} s2 b 1\n"));
        r.push_str(&format!("{t} Q0 a 1 2 x\n{t} Q0 b 2 1 x\n"));
    }
    fs::write(&qrels, q).unwrap();
    fs::write(&run, r).unwrap();
    let o = fairir(&[
        "correlate",
        "--qrels",
        qrels.to_str().unwrap(),
        "--run",
        run.to_str().unwrap(),
        "--pairs",
        "fair:kl",
        "--k",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("undefined correlation"), "{}", stderr(&o));
}

#[test]
fn trec_export_evaluates_like_the_bundle() {
    let dir = TempDir::new().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let o = fairir(&[
        "synth",
        "--topics",
        "5",
        "--pool",
        "30",
        "--out",
        &p("b.json"),
        "--qrels-out",
        &p("q.txt"),
        "--run-out",
        &p("r.run"),
        "--groups-out",
        &p("g.txt"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let metrics = "fair,alpha-ndcg,ndcg,rbp,kl,ndrkl,fair-rbp";
    let from_bundle = fairir(&["evaluate", "--bundle", &p("b.json"), "--metrics", metrics]);
    let from_trec = fairir(&[
        "evaluate",
        "--qrels",
        &p("q.txt"),
        "--run",
        &p("r.run"),
        "--groups",
        &p("g.txt"),
        "--binary",
        "--metrics",
        metrics,
    ]);
    assert_eq!(from_trec.status.code(), Some(0), "{}", stderr(&from_trec));
    let strip = |o: &Output| -> Vec<Vec<String>> { data_rows(&stdout(o)).into_iter().map(|r| r[1..].to_vec()).collect() };
    assert_eq!(strip(&from_bundle), strip(&from_trec));
}

#[test]
fn desired_file_and_its_errors() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 2, 20);
    let good = dir.path().join("good.txt");
    let bad = dir.path().join("bad.txt");
    fs::write(&good, "G0 0.5\nG1 0.5\n").unwrap();
    fs::write(&bad, "G0 0.5\nG1 zero\n").unwrap();
    let arg = |p: &Path| format!("file:{}", p.display());
    let ok = fairir(&["evaluate", "--bundle", bundle.to_str().unwrap(), "--desired", &arg(&good)]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let err = fairir(&["evaluate", "--bundle", bundle.to_str().unwrap(), "--desired", &arg(&bad)]);
    assert_eq!(err.status.code(), Some(1));
    assert!(stderr(&err).contains(":2:"), "{}", stderr(&err));
}

#[test]
fn malformed_qrels_reports_line() {
    let dir = TempDir::new().unwrap();
    let qrels = dir.path().join("q.txt");
    fs::write(&qrels, "1 s1 a 1\n1 s1 b\n").unwrap();
    let o = fairir(&["evaluate", "--qrels", qrels.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("q.txt:2:"), "{}", stderr(&o));
}

#[test]
fn json_reports_and_ideal_command() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 3, 12);
    let out = dir.path().join("report.json");
    let o = fairir(&[
        "ideal",
        "--bundle",
        bundle.to_str().unwrap(),
        "--exact-idcg-max",
        "6",
        "--metrics",
        "alpha-ndcg",
        "--k",
        "5",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v[0]["algorithm"], "ideal");
    assert_eq!(v[0]["metric"], "alpha-ndcg");
    // pools of 12 exceed the exact bound, so greedy ranks and greedy normalizes
    assert_eq!(v[0]["mean"], 1.0);
}

#[test]
fn inputs_are_not_modified() {
    let dir = TempDir::new().unwrap();
    let bundle = synth(dir.path(), 2, 20);
    let before = fs::read(&bundle).unwrap();
    let o = fairir(&["rerank", "--bundle", bundle.to_str().unwrap(), "--epsilon", "0.3", "--runs", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&bundle).unwrap(), before);
}
