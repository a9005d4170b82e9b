use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_uavmimo"));
    c.env_remove("UAVMIMO_THREADS");
    c
}

#[test]
fn swarm_prints_the_split() {
    let out = bin()
        .args(["swarm", "--r1", "5e6", "--r2", "5e6", "--total", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("t1_s = 1\n") && text.contains("throughput_bps = 2500000\n"),
        "{text}"
    );
}

#[test]
fn swarm_json_parses() {
    let out = bin()
        .args([
            "swarm", "--r1", "2e6", "--r2", "1e6", "--total", "3", "--json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["t1_s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["t2_s"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let bad = bin()
        .args(["swarm", "--r1", "0", "--r2", "1", "--total", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"pilot_reuse": 13}"#).unwrap();
    let out = bin()
        .args(["run", "--scenario", "decontam", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pilot_reuse"));

    std::fs::write(&cfg, "[1, 2").unwrap();
    let out = bin()
        .args(["run", "--scenario", "decontam", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["run", "--scenario", "decontam", "--config"])
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_flag_overrides_config_and_lands_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 1}"#).unwrap();
    let run = |seed: &str, out: &str| {
        let status = bin()
            .args([
                "run",
                "--scenario",
                "tracking",
                "--drops",
                "2",
                "--threads",
                "1",
            ])
            .arg("--config")
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
        let m: serde_json::Value = serde_json::from_slice(
            &std::fs::read(dir.path().join(out).join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(m["seed"].as_u64().unwrap(), seed.parse::<u64>().unwrap());
        assert_eq!(m["config"]["n_trajectories"].as_u64(), Some(2));
        std::fs::read(dir.path().join(out).join("tracking.csv")).unwrap()
    };
    let a = run("5", "a");
    let b = run("6", "b");
    assert_ne!(a, b);
    assert_eq!(a, run("5", "c"));
}

#[test]
fn threads_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("UAVMIMO_THREADS", "2")
        .args(["run", "--scenario", "decontam", "--drops", "1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["threads"].as_u64(), Some(2));
    assert_eq!(m["scenario"], "decontam");
}
