use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synthmia"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// demo -> prepare -> vulnerable, then attack/sweep/report manifests reuse
/// the same little corpus.
struct Corpus {
    _dir: tempfile::TempDir,
    csv: std::path::PathBuf,
    schema: std::path::PathBuf,
    root: std::path::PathBuf,
}

fn corpus() -> Corpus {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = run(&[
        "demo",
        "--records",
        "400",
        "--seed",
        "5",
        "--out",
        path_str(&data),
    ]);
    assert_ok(&out);
    Corpus {
        csv: data.join("demo.csv"),
        schema: data.join("demo.schema.json"),
        root: dir.path().to_path_buf(),
        _dir: dir,
    }
}

fn manifest_json(c: &Corpus, scenarios: &str, out: &Path) -> std::path::PathBuf {
    let text = format!(
        r#"{{
  "name": "itest",
  "csv": "{}",
  "schema": "{}",
  "bins": 4,
  "generator": {{ "kind": "baynet", "max_parents": 2 }},
  "scenarios": {scenarios},
  "d_size": 30,
  "n_shadow": 6,
  "n_test": 4,
  "m": 60,
  "query_budget": 32,
  "rf": {{ "n_trees": 5, "max_depth": 4, "min_samples_split": 2,
          "features_per_split": null, "bootstrap": true, "seed": 0 }},
  "master_seed": 11,
  "top_vulnerable": {{ "count": 2, "k": 5 }},
  "aux_records": 120,
  "test_records": 200,
  "out": "{}"
}}"#,
        path_str(&c.csv),
        path_str(&c.schema),
        path_str(out)
    );
    let path = c.root.join("manifest.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn prepare_and_vulnerable_produce_stable_outputs() {
    let c = corpus();
    let cache = c.root.join("cache");
    let out = run(&[
        "prepare",
        "--csv",
        path_str(&c.csv),
        "--schema",
        path_str(&c.schema),
        "--bins",
        "4",
        "--out",
        path_str(&cache),
    ]);
    assert_ok(&out);
    let codes_a = fs::read(cache.join("codes.csv")).unwrap();
    let schema_a = fs::read(cache.join("schema.json")).unwrap();

    // Idempotent: rerun writes byte-identical files.
    assert_ok(&run(&[
        "prepare",
        "--csv",
        path_str(&c.csv),
        "--schema",
        path_str(&c.schema),
        "--bins",
        "4",
        "--out",
        path_str(&cache),
    ]));
    assert_eq!(codes_a, fs::read(cache.join("codes.csv")).unwrap());
    assert_eq!(schema_a, fs::read(cache.join("schema.json")).unwrap());

    let rank = c.root.join("rank.csv");
    let out = run(&[
        "vulnerable",
        "--cache",
        path_str(&cache),
        "-k",
        "5",
        "--top-n",
        "3",
        "--out",
        path_str(&rank),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&rank).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("record_index,score,rank"));
}

#[test]
fn prepare_reports_malformed_csv_with_row_diagnostic() {
    let c = corpus();
    let bad = c.root.join("bad.csv");
    let text = fs::read_to_string(&c.csv).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[3] = "this,row,is,short";
    fs::write(&bad, lines.join("\n")).unwrap();
    let out = run(&[
        "prepare",
        "--csv",
        path_str(&bad),
        "--schema",
        path_str(&c.schema),
        "--bins",
        "4",
        "--out",
        path_str(&c.root.join("badcache")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line: 4"), "stderr: {stderr}");
}

#[test]
fn attack_runs_resumes_and_reports() {
    let c = corpus();
    let run_dir = c.root.join("run");
    let manifest = manifest_json(&c, r#"["s1", "s2"]"#, &run_dir);

    // Dry run first: plan only, no outputs.
    let dry = run(&["attack", "--manifest", path_str(&manifest), "--dry-run"]);
    assert_ok(&dry);
    let plan = String::from_utf8_lossy(&dry.stdout).to_string();
    assert!(plan.contains("seed plan"), "{plan}");
    assert!(!run_dir.join("s1").exists());
    let dry2 = run(&["attack", "--manifest", path_str(&manifest), "--dry-run"]);
    assert_eq!(plan, String::from_utf8_lossy(&dry2.stdout));

    let out = run(&[
        "attack",
        "--manifest",
        path_str(&manifest),
        "--workers",
        "2",
    ]);
    assert_ok(&out);
    for name in [
        "manifest.json",
        "targets.csv",
        "summary.md",
        "summary.csv",
        "s1/config.json",
        "s1/predictions.csv",
        "s1/control_predictions.csv",
        "s1/result.json",
        "s1/result.csv",
        "s2/result.csv",
    ] {
        assert!(run_dir.join(name).exists(), "missing {name}");
    }
    let summary = fs::read(run_dir.join("summary.csv")).unwrap();

    // A second start without --resume refuses; with it, results are stable.
    let refused = run(&["attack", "--manifest", path_str(&manifest)]);
    assert_eq!(refused.status.code(), Some(2));
    let resumed = run(&["attack", "--manifest", path_str(&manifest), "--resume"]);
    assert_ok(&resumed);
    assert_eq!(summary, fs::read(run_dir.join("summary.csv")).unwrap());

    // Rebuild the summary from the run directories alone.
    let report_dir = c.root.join("report");
    let rep = run(&[
        "report",
        path_str(&run_dir.join("s1")),
        path_str(&run_dir.join("s2")),
        "--out",
        path_str(&report_dir),
    ]);
    assert_ok(&rep);
    let md = fs::read_to_string(report_dir.join("summary.md")).unwrap();
    assert!(md.contains("| s1 |"));
    assert!(md.contains("s2 vs s1"));
    assert_eq!(fs::read_to_string(run_dir.join("summary.md")).unwrap(), md);
}

#[test]
fn attack_honors_checkpoint_root_env() {
    let c = corpus();
    let ignored = c.root.join("ignored");
    let manifest = manifest_json(&c, r#"["s2"]"#, &ignored);
    let env_root = c.root.join("ckpt");
    let out = bin()
        .args(["attack", "--manifest", path_str(&manifest)])
        .env("SYNTHMIA_CHECKPOINT_ROOT", path_str(&env_root))
        .output()
        .unwrap();
    assert_ok(&out);
    assert!(env_root
        .join("itest")
        .join("s2")
        .join("result.json")
        .exists());
    assert!(!ignored.exists());
}

#[test]
fn bad_manifest_exits_with_config_code() {
    let c = corpus();
    let manifest = c.root.join("broken.json");
    fs::write(
        &manifest,
        r#"{ "name": "x", "csv": "/nonexistent.csv", "schema": "/nonexistent.json",
             "generator": { "kind": "baynet", "max_parents": 2 },
             "scenarios": ["s1"], "top_vulnerable": { "count": 1, "k": 3 },
             "out": "/tmp/never" }"#,
    )
    .unwrap();
    let out = run(&["attack", "--manifest", path_str(&manifest)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_per_size_runs_and_spread() {
    let c = corpus();
    let sweep_dir = c.root.join("sweep");
    let manifest = manifest_json(&c, r#"["s1"]"#, &sweep_dir);
    let out = run(&[
        "sweep",
        "--manifest",
        path_str(&manifest),
        "--m",
        "40",
        "--m",
        "60",
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(sweep_dir.join("m_40/predictions.csv").exists());
    assert!(sweep_dir.join("m_60/result.json").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("spread"), "{stdout}");

    // Sweeps need an s1-only manifest.
    let manifest2 = manifest_json(&c, r#"["s1", "s2"]"#, &c.root.join("sweep2"));
    let bad = run(&["sweep", "--manifest", path_str(&manifest2), "--m", "40"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn report_needs_real_run_directories() {
    let c = corpus();
    let empty = c.root.join("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = run(&[
        "report",
        path_str(&empty),
        "--out",
        path_str(&c.root.join("r")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
