use std::path::Path;
use std::process::{Command, Output};

use radionet::netmodel::Network;
use radionet_harness::campaign::{read_rows, read_summaries, COLUMNS};
use radionet_harness::verify::VerifyReport;

fn radionet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radionet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen_path(dir: &Path, n: usize) -> std::path::PathBuf {
    let file = dir.join(format!("path{n}.json"));
    let out = radionet(&[
        "gen",
        "--topology",
        "path",
        "--n",
        &n.to_string(),
        "--seed",
        "1",
        "--out",
        p(&file),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    file
}

#[test]
fn gen_is_deterministic_canonical_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_path(dir.path(), 16);
    let first = std::fs::read(&a).unwrap();
    let b = gen_path(dir.path(), 16);
    assert_eq!(first, std::fs::read(&b).unwrap());
    let net = Network::from_json(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!((net.n(), net.diameter()), (16, 15));

    let t = dir.path().join("tree.json");
    let u = dir.path().join("tree2.json");
    for f in [&t, &u] {
        let out = radionet(&[
            "gen",
            "--topology",
            "random-tree",
            "--n",
            "50",
            "--seed",
            "9",
            "--out",
            p(f),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&t).unwrap(), std::fs::read(&u).unwrap());
}

#[test]
fn run_broadcast_gives_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_path(dir.path(), 16);
    let csv = dir.path().join("rows.csv");
    let sums = dir.path().join("sums.jsonl");
    let out = radionet(&[
        "run",
        "--protocol",
        "broadcast",
        "--net",
        p(&net),
        "--source",
        "0",
        "--mode",
        "charged",
        "--seeds",
        "10",
        "--out",
        p(&csv),
        "--summaries",
        p(&sums),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
    let rows = read_rows(&csv).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(
        rows.iter().map(|r| r.seed).collect::<Vec<_>>(),
        (0..10).collect::<Vec<_>>()
    );
    for r in &rows {
        assert!(r.success && r.informed == 16 && r.mode == "charged" && r.protocol == "broadcast");
        assert!(r.charged_rounds >= r.rounds);
    }
    let sums = read_summaries(&sums).unwrap();
    assert_eq!(sums.len(), 10);
    for (r, s) in rows.iter().zip(&sums) {
        assert_eq!(r.seed, s.seed);
        assert_eq!(r.success, s.recomputed_success());
        let t = s.trace.unwrap();
        assert_eq!(
            (t.rounds, t.charged_rounds, t.success),
            (r.rounds, r.charged_rounds, r.success)
        );
    }
}

#[test]
fn same_spec_gives_identical_bytes_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let a = dir.path().join("a.csv");
    let out = radionet(&[
        "run",
        "--protocol",
        "election",
        "--topology",
        "grid",
        "--rows",
        "6",
        "--cols",
        "7",
        "--seed-list",
        "4,1,3",
        "--save-spec",
        p(&spec),
        "--out",
        p(&a),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for f in [&b, &c] {
        let out = radionet(&["run", "--spec", p(&spec), "--out", p(f)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    let rows = read_rows(&a).unwrap();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 3, 4]);
    assert!(rows.iter().all(|r| r.success && r.leader.is_some()));

    radionet(&["run", "--spec", p(&spec), "--out", p(&a)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.matches("seed,topology").count(), 1);
    assert_eq!(read_rows(&a).unwrap().len(), 6);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_radionet"))
            .env("RADIONET_THREADS", threads)
            .args([
                "run",
                "--protocol",
                "compete",
                "--sources",
                "3",
                "--topology",
                "random-tree",
                "--n",
                "60",
            ])
            .args(["--per-seed-network", "--seeds", "6", "--mode", "faithful"])
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(radionet(&["gen", "--bogus"]).status.code(), Some(2));
    assert_eq!(radionet(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        radionet(&["gen", "--topology", "grid", "--rows", "3"]).status.code(),
        Some(3)
    );
    let net = gen_path(dir.path(), 64);
    let paper = radionet(&["run", "--protocol", "broadcast", "--net", p(&net), "--profile", "paper"]);
    assert_eq!(paper.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&paper.stderr).contains("j"));
    let bad_source = radionet(&["run", "--protocol", "broadcast", "--net", p(&net), "--source", "64"]);
    assert_eq!(bad_source.status.code(), Some(3));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"schema":1,"profile":"x","compete":{"c1":1}}"#).unwrap();
    let broken = radionet(&["run", "--protocol", "broadcast", "--net", p(&net), "--config", p(&cfg)]);
    assert_eq!(broken.status.code(), Some(3));
}

#[test]
fn timeouts_exit_zero_with_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_path(dir.path(), 64);
    let out = radionet(&[
        "run",
        "--protocol",
        "baseline",
        "--net",
        p(&net),
        "--seeds",
        "3",
        "--round-cap",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",false,") && r.contains("timed_out")));
}

#[test]
fn verify_emits_a_clean_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let out = radionet(&[
        "verify",
        "--claims",
        "trans1,trans2,goodj,goodjcond",
        "--samples",
        "500",
        "--seed",
        "7",
        "--out",
        p(&file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerifyReport = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(report.violations, 0);
    assert_eq!(report.claims.len(), 4);
    assert_eq!(radionet(&["verify", "--claims", "trans9"]).status.code(), Some(3));
}

#[test]
fn analyze_subcommands_write_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen_path(dir.path(), 128);
    let out = radionet(&[
        "analyze",
        "cprop",
        "--net",
        p(&net),
        "--node",
        "64",
        "--j-lo",
        "1",
        "--j-hi",
        "4",
        "--trials",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("j,beta,mean_dist,stderr,bound,met\n"));
    assert_eq!(text.lines().count(), 5);

    let out = radionet(&[
        "analyze",
        "mc",
        "--net",
        p(&net),
        "--node",
        "0",
        "--beta",
        "0.1,0.5",
        "--trials",
        "300",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);

    let out = radionet(&["analyze", "subpaths", "--net", p(&net), "--seeds", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("seed,subpaths,good,bad\n"));
    assert_eq!(text.lines().count(), 5);

    let out = radionet(&[
        "analyze",
        "cprop",
        "--net",
        p(&net),
        "--node",
        "0",
        "--j-lo",
        "3",
        "--j-hi",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn quick_calibration_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cal.json");
    let out = radionet(&["calibrate", "--quick", "--out", p(&file)]);
    assert_eq!(out.status.code(), Some(0));
    radionet_harness::Calibrated::load(&file).unwrap();
}
