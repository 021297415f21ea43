use std::path::Path;
use std::process::{Command, Output};

fn waterbid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waterbid"))
        .args(args)
        .current_dir(dir)
        .env_remove("WATERBID_OUT")
        .env_remove("WATERBID_LLM_ENDPOINT")
        .env_remove("WATERBID_LLM_API_KEY")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_writes_one_line_per_repetition() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waterbid(
        dir.path(),
        &["run", "--setting", "1", "--reps", "2", "--agents", "scripted:desperation", "--seed", "7", "--out", "runs"],
    ));
    let text = std::fs::read_to_string(dir.path().join("runs/setting-1/records.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let seeds: Vec<u64> = lines
        .iter()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["config"]["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [7, 8]);
    assert!(dir.path().join("runs/setting-1/manifest.json").exists());
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_waterbid"))
        .args(["run", "--setting", "2", "--reps", "1", "--agents", "scripted:desperation"])
        .current_dir(dir.path())
        .env("WATERBID_OUT", dir.path().join("elsewhere"))
        .output()
        .unwrap();
    ok(&out);
    assert!(dir.path().join("elsewhere/setting-2/records.jsonl").exists());
}

#[test]
fn replay_accepts_engine_output_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waterbid(dir.path(), &["run", "--setting", "3", "--reps", "3", "--agents", "scripted:random:4", "--out", "r"]));
    let file = dir.path().join("r/setting-3/records.jsonl");
    let stdout = ok(&waterbid(dir.path(), &["replay", file.to_str().unwrap(), "--output", "again.jsonl"]));
    assert!(stdout.contains("3 records replayed identically"));
    assert_eq!(
        std::fs::read_to_string(&file).unwrap(),
        std::fs::read_to_string(dir.path().join("again.jsonl")).unwrap()
    );

    let text = std::fs::read_to_string(&file).unwrap();
    let mut rec: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let supply = rec["rounds"][0]["supply"].as_u64().unwrap();
    rec["rounds"][0]["supply"] = (supply + 1).into();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, format!("{rec}\n")).unwrap();
    let out = waterbid(dir.path(), &["replay", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("day 1"));
}

#[test]
fn analyze_emits_six_setting_blocks_and_plot_renders() {
    let dir = tempfile::tempdir().unwrap();
    ok(&waterbid(dir.path(), &["run", "--setting", "all", "--reps", "3", "--agents", "scripted:fraction:0.4", "--out", "runs"]));
    let stdout = ok(&waterbid(dir.path(), &["analyze", "runs"]));
    let reports = dir.path().join("runs/reports");
    let table = std::fs::read_to_string(reports.join("summary.txt")).unwrap();
    let headers: Vec<&str> = table.lines().filter(|l| l.starts_with("Setting ")).collect();
    assert_eq!(headers.len(), 6, "{table}");
    for (i, h) in headers.iter().enumerate() {
        assert!(h.starts_with(&format!("Setting {}: ", i + 1)), "{h}");
    }
    assert!(stdout.contains(&table));
    for f in ["survival.csv", "runs.csv", "plot_data.json"] {
        assert!(reports.join(f).exists(), "{f}");
    }
    let survival = std::fs::read_to_string(reports.join("survival.csv")).unwrap();
    assert_eq!(survival.lines().count(), 1 + 6 * 5);

    let stdout = ok(&waterbid(dir.path(), &["plot", "runs/reports/plot_data.json"]));
    assert_eq!(stdout.lines().count(), 7);
    let svg = std::fs::read_to_string(reports.join("setting-1-min-bid.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn bad_arguments_print_usage_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--setting", "1", "--bogus"][..],
        &["frobnicate"],
    ] {
        let out = waterbid(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
    let out = waterbid(dir.path(), &["run", "--setting", "1", "--agents", "scripted:nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid value 'scripted:nonsense'"));
    let out = waterbid(dir.path(), &["run", "--setting", "7", "--agents", "scripted:desperation"]);
    assert!(!out.status.success());
    let out = waterbid(dir.path(), &["run", "--setting", "1", "--agents", "llm", "--out", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("WATERBID_LLM_ENDPOINT"));
    let out = waterbid(dir.path(), &["analyze", "nowhere"]);
    assert!(!out.status.success());
}

#[test]
fn llm_settings_replay_from_a_cache_without_network() {
    // Replay mode needs no provider; an empty cache fails every game with
    // the missing request named.
    let dir = tempfile::tempdir().unwrap();
    let out = waterbid(
        dir.path(),
        &["run", "--setting", "1", "--reps", "1", "--agents", "llm", "--gateway-mode", "replay", "--out", "r"],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("1 games failed"), "{stderr}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/setting-1/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"][0]["status"], "failed");
}
