use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_safe-motion"))
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn run_writes_logs_that_replay_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args([
            "run",
            "--scene",
            &fixture("one_robot.json"),
            "--mode",
            "c",
            "--episodes",
            "2",
            "--duration",
            "0.5",
        ])
        .arg("--out")
        .arg(&out)
        .env("SAFE_MOTION_WORKERS", "2")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for f in ["episode_0000.jsonl", "episode_0001.jsonl", "summary.csv", "timings.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let replayed = bin()
        .arg("replay")
        .arg(out.join("episode_0001.jsonl"))
        .output()
        .unwrap();
    assert!(
        replayed.status.success(),
        "{}",
        String::from_utf8_lossy(&replayed.stderr)
    );

    let metrics = bin().arg("metrics").arg(&out).output().unwrap();
    assert!(metrics.status.success());
    let csv = String::from_utf8(metrics.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("schema,digest,episodes,"));
}

#[test]
fn errors_are_json_on_stderr() {
    let out = bin().args(["check-scene", "/nonexistent/scene.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains("/nonexistent/scene.json"));
}

#[test]
fn check_scene_accepts_the_fixtures() {
    for name in ["one_robot.json", "two_robot.json"] {
        let out = bin().args(["check-scene", &fixture(name)]).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn ft_demo_reports_both_controllers() {
    let out = bin().arg("ft-demo").output().unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("controller,t,distance,"));
    assert!(csv.lines().any(|l| l.starts_with("baseline,")));
    assert!(csv.lines().any(|l| l.starts_with("gate,")));
}
