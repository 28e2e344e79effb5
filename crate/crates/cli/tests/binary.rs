use std::process::Command;

fn ndslab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ndslab"));
    c.env_remove("NDSLAB_JOBS");
    c
}

#[test]
fn check_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = ndslab()
        .args(["check", "--config", concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/demo.toml"), "--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["items"].as_array().unwrap().len(), 7);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[[checks]]\nsystem = \"foo\"\nnotion = \"transitive\"\nhorizon = 1\nresolution = 1\n").unwrap();
    let out = ndslab().arg("check").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undefined system \"foo\""));

    let out = ndslab().args(["gallery", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = ndslab().arg("check").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"searches": [{"question": "Q2", "budget": 4, "horizon": 16, "resolution": 1}]}"#).unwrap();
    let out = ndslab().arg("check").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["items"][0]["kind"], "search");
}

#[test]
fn subcommands_run() {
    let out = ndslab().args(["verify", "periodic-collapse", "--horizon", "16", "--format", "markdown"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("# ndslab report"));
    let out = ndslab().args(["search", "Q1", "--budget", "8", "--jobs", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = ndslab().args(["gallery", "padded-rotation"]).env("NDSLAB_JOBS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn item_errors_exit_two_after_reporting_siblings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(
        &path,
        r#"
[[systems]]
name = "shift"
space = { kind = "shift", alphabet = 2 }
sequence = { kind = "constant", map = "shift" }

[[checks]]
system = "shift"
notion = "transitive"
horizon = 8
resolution = 1

[[chains]]
system = "shift"
eps = "1/2"
deltas = ["1/4"]
length_bound = 4
"#,
    )
    .unwrap();
    let out = ndslab().arg("check").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["items"][0]["status"], "completed");
    assert_eq!(v["items"][1]["status"], "error");
    assert!(String::from_utf8_lossy(&out.stderr).contains("finite space"));
}
