use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures")
}

fn manifest() -> String {
    fixtures()
        .join("sample/manifest.json")
        .to_str()
        .unwrap()
        .to_string()
}

fn words() -> String {
    fixtures()
        .join("vectors/words.txt")
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskbench"))
        .args(args)
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn usage_errors_exit_2() {
    let m = manifest();
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(
        code(&["similarity", "risks", "--manifest", &m]),
        2,
        "embeddings are required"
    );
    assert_eq!(code(&["similarity", "docs"]), 2, "manifest is required");
    assert_eq!(code(&["--jobs", "0", "ingest", "--manifest", &m]), 2);
    assert_eq!(
        code(&[
            "similarity",
            "evaluation",
            "--manifest",
            &m,
            "--embeddings",
            &words(),
            "--threshold",
            "1.5"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "similarity",
            "docs",
            "--manifest",
            &m,
            "--group-by",
            "colour"
        ]),
        2
    );
}

#[test]
fn input_errors_exit_1() {
    let out = run(&["ingest", "--manifest", "/nonexistent/manifest.json"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/manifest.json"), "{stderr}");
    // the io cause is reported once
    assert_eq!(stderr.matches("No such file").count(), 1, "{stderr}");
}

#[test]
fn report_is_canonical_json() {
    let out = run(&[
        "similarity",
        "docs",
        "--manifest",
        &manifest(),
        "--group-by",
        "delivery_method",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("}\n"));
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        [
            "command",
            "config",
            "input_digests",
            "result",
            "tool_version"
        ]
    );
    // floats carry at most six significant digits
    for score in value["result"]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["score"].to_string())
    {
        let digits = score
            .trim_start_matches("0.")
            .trim_start_matches('-')
            .replace('.', "");
        let digits = digits.split('e').next().unwrap().trim_start_matches('0');
        assert!(digits.len() <= 6, "{score}");
    }
    assert!(text.contains("\n  \"command\": ["), "two-space indentation");
}

#[test]
fn writes_report_and_heatmap_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let heat = dir.path().join("h.csv");
    let status = run(&[
        "similarity",
        "risks",
        "--manifest",
        &manifest(),
        "--embeddings",
        &words(),
        "--out",
        out.to_str().unwrap(),
        "--heatmap",
        heat.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(!report["command"].to_string().contains("r.json"));
    let csv = std::fs::read_to_string(&heat).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 12);
    assert!(header.starts_with("project,1,2"));
}

#[test]
fn lifecycle_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let styles = dir.path().join("styles.json");
    assert!(run(&[
        "lifecycle",
        "styles",
        "--manifest",
        &manifest(),
        "--out",
        styles.to_str().unwrap()
    ])
    .status
    .success());
    let growth = fixtures().join("sample/growth.csv");
    let out = run(&[
        "lifecycle",
        "compare",
        "--groups",
        styles.to_str().unwrap(),
        "--outcomes",
        growth.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["result"]["hotelling"]["t_squared"].as_f64().unwrap() >= 0.0);
}
