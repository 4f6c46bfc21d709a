use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn vibrogrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vibrogrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const NOISE: &str = r#"{"duration_jitter_sd_ms":120,"count_miss_prob":0.05,"motor_confusion_prob":0.02,"reach_sd_cm":3.0,"seed":5}"#;

#[test]
fn plan_simulate_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let plans = dir.path().join("plans.json");
    let noise = dir.path().join("noise.json");
    let log = dir.path().join("trials.jsonl");
    let results = dir.path().join("results.json");
    let csv = dir.path().join("cells.csv");
    std::fs::write(&noise, NOISE).unwrap();

    let out = vibrogrid(&[
        "plan",
        "--participants",
        "12",
        "--seed",
        "2024",
        "--out",
        p(&plans),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let plan: Value = serde_json::from_str(&std::fs::read_to_string(&plans).unwrap()).unwrap();
    assert_eq!(plan.as_array().unwrap().len(), 12);

    let out = vibrogrid(&[
        "simulate",
        "--plans",
        p(&plans),
        "--noise",
        p(&noise),
        "--out",
        p(&log),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1296);

    let out = vibrogrid(&[
        "analyze",
        "--in",
        p(&log),
        "--out",
        p(&results),
        "--csv",
        p(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&results).unwrap()).unwrap();
    assert_eq!(doc["summary"]["participants"], 12);
    assert_eq!(doc["summary"]["trials"], 1296);
    assert_eq!(doc["anova"].as_array().unwrap().len(), 3);
    let cells = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(cells.lines().count(), 13);

    // same inputs, same bytes
    let again = dir.path().join("again.jsonl");
    vibrogrid(&[
        "simulate",
        "--plans",
        p(&plans),
        "--noise",
        p(&noise),
        "--out",
        p(&again),
    ]);
    assert_eq!(std::fs::read(&log).unwrap(), std::fs::read(&again).unwrap());

    let stdout = vibrogrid(&["analyze", "--in", p(&log)]);
    let printed: Value = serde_json::from_slice(&stdout.stdout).unwrap();
    assert_eq!(printed, doc);
}

#[test]
fn incomplete_logs_need_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let plans = dir.path().join("plans.json");
    let noise = dir.path().join("noise.json");
    let log = dir.path().join("trials.jsonl");
    std::fs::write(&noise, NOISE).unwrap();
    assert!(vibrogrid(&["plan", "--seed", "1", "--out", p(&plans)])
        .status
        .success());
    assert!(vibrogrid(&[
        "simulate",
        "--plans",
        p(&plans),
        "--noise",
        p(&noise),
        "--out",
        p(&log)
    ])
    .status
    .success());

    let text = std::fs::read_to_string(&log).unwrap();
    let kept: String = text.lines().take(1250).map(|l| format!("{l}\n")).collect();
    std::fs::write(&log, kept).unwrap();

    let out = vibrogrid(&["analyze", "--in", p(&log)]);
    assert_eq!(out.status.code(), Some(2));
    let out = vibrogrid(&["analyze", "--in", p(&log), "--allow-incomplete"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["analysed_participants"].as_array().unwrap().len(), 11);
    assert_eq!(doc["excluded_participants"].as_array().unwrap().len(), 1);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let plans = dir.path().join("plans.json");
    let out = vibrogrid(&[
        "plan",
        "--participants",
        "10",
        "--seed",
        "1",
        "--out",
        p(&plans),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!plans.exists());
    let out = vibrogrid(&[
        "plan",
        "--participants",
        "10",
        "--seed",
        "1",
        "--pad",
        "--out",
        p(&plans),
    ]);
    assert!(out.status.success());

    let noise = dir.path().join("noise.json");
    std::fs::write(&noise, r#"{"count_miss_prob": 1.5}"#).unwrap();
    let out = vibrogrid(&[
        "simulate",
        "--plans",
        p(&plans),
        "--noise",
        p(&noise),
        "--out",
        p(&dir.path().join("x.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = vibrogrid(&["analyze", "--in", p(&dir.path().join("missing.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
}
