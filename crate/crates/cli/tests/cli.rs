use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

/// Runs the binary from the core crate directory so fixture paths stay relative.
fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baserate"))
        .current_dir(core_dir())
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const METADATA: &str = "tests/fixtures/corpus/metadata.jsonl";
const FACTS: &str = "tests/fixtures/corpus/facts.csv";

#[test]
fn count_writes_file_and_total_rows() {
    let o = run(&["count", "--root", "tests/fixtures/sloc/tree"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("kind,path,language,code,comment,blank\n"));
    assert!(csv.contains("file,hello.c,C,5,3,1\n"));
    assert!(csv.ends_with("total,,,28,19,11\n"));
}

#[test]
fn count_missing_root_is_an_io_error() {
    let o = run(&["count", "--root", "tests/fixtures/no-such-dir"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-dir"));
    assert!(o.stdout.is_empty());
}

#[test]
fn count_with_registry_missing_every_extension_warns() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("reg.json");
    fs::write(&reg, r#"{"languages":[{"name":"Cobol","extensions":["cbl"],"line_comment":["*>"]}]}"#).unwrap();
    let out = dir.path().join("counts.csv");
    let o = run(&[
        "count",
        "--root",
        "tests/fixtures/sloc/tree",
        "--registry",
        reg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert!(fs::read_to_string(out).unwrap().ends_with("total,,,0,0,0\n"));
}

#[test]
fn analyze_reproduces_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--metadata",
        METADATA,
        "--facts",
        FACTS,
        "--cutoff-year",
        "2012",
        "--svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("month 13 outside 1-12"));
    let golden = core_dir().join("tests/fixtures/golden");
    let mut names: Vec<_> = fs::read_dir(&golden).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for name in names {
        assert_eq!(
            fs::read(out.join(&name)).unwrap(),
            fs::read(golden.join(&name)).unwrap(),
            "{}",
            name.to_string_lossy()
        );
    }
}

#[test]
fn analyze_without_cutoff_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--metadata", METADATA, "--facts", FACTS, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cutoff-year"));
}

#[test]
fn unknown_flag_is_a_usage_error_and_help_is_not() {
    assert_eq!(run(&["analyze", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_survivor_set_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        "--metadata",
        METADATA,
        "--facts",
        FACTS,
        "--cutoff-year",
        "1990",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["validation"]["projects_collected"], 10);
    assert_eq!(json["validation"]["after_cutoff"]["projects"], 0);
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "analyze",
        "--metadata",
        "nope.jsonl",
        "--facts",
        FACTS,
        "--cutoff-year",
        "2012",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.jsonl"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = core_dir().join("tests/fixtures/corpus");
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        serde_json::json!({
            "metadata": [fixtures.join("metadata.jsonl")],
            "facts": [fixtures.join("facts.csv")],
            "cutoff-year": 1990,
            "growthless-year-policy": "zero",
        })
        .to_string(),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--cutoff-year",
        "2012",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["cutoff-year"], 2012);
    assert_eq!(json["config"]["growthless-year-policy"], "zero");
    assert!(!out.join("boxplot_cs.svg").exists());
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"cutoff-year": 2012, "metadata": [], "facts": [], "colour": "red"}"#).unwrap();
    let o = run(&["analyze", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "analyze",
            "--metadata",
            METADATA,
            "--facts",
            FACTS,
            "--cutoff-year",
            "2012",
            "--svg",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn snapshots_become_size_facts() {
    let dir = tempfile::tempdir().unwrap();
    for (name, lines) in [("s1", 100), ("s2", 110)] {
        let snap = dir.path().join(name);
        fs::create_dir(&snap).unwrap();
        fs::write(snap.join("a.c"), "x;\n".repeat(lines)).unwrap();
    }
    let s1 = format!("2012-01={}", dir.path().join("s1").display());
    let s2 = format!("2012-02={}", dir.path().join("s2").display());
    let o = run(&["snapshot", "--project", "p", "--snapshot", &s1, "--snapshot", &s2]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        csv,
        "project,year,month,loc,comments,blanks,loc_added,loc_removed,commits,contributors\n\
         p,2012,1,100,0,0,,,,\n\
         p,2012,2,110,0,0,,,,\n"
    );

    let o = run(&["snapshot", "--project", "p", "--snapshot", &s2, "--snapshot", &s1]);
    assert_eq!(o.status.code(), Some(1));
}
