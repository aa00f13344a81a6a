use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// The three-scatterer configuration on a coarse grid, written into `dir`.
fn small_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let text = std::fs::read_to_string(configs().join("point3_gauss.json")).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, edit(text.replace("\"n\": 60", "\"n\": 16"))).unwrap();
    path
}

fn wavedsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavedsm")).args(args).env_remove("WAVEDSM_THREADS").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn malformed_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"scene\": [").unwrap();
    let out = dir.path().join("out");
    let r = wavedsm(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let m = manifest(&out);
    assert_eq!(m["status"], "incomplete");
    assert!(m["error"].is_string());
}

#[test]
fn missing_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let r = wavedsm(&["verify", "lemma", "--config", s(&dir.path().join("nope.json")), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn image_rejects_data_from_another_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let sim = dir.path().join("sim");
    let r = wavedsm(&["simulate", "--config", s(&cfg), "--out", s(&sim)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let other = dir.path().join("other");
    std::fs::create_dir(&other).unwrap();
    let cfg2 = small_config(&other, |t| t.replace("\"n_receivers\": 48", "\"n_receivers\": 40"));
    let r = wavedsm(&["image", "--config", s(&cfg2), "--data", s(&sim.join("clean.tdsm")), "--out", s(&other)]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("geometry"));
}

#[test]
fn simulate_writes_datasets_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let out = dir.path().join("out");
    let r = wavedsm(&["simulate", "--config", s(&cfg), "--out", s(&out), "--seed", "7"]);
    assert!(r.status.success());
    for f in ["clean.tdsm", "clean.meta.json", "clean.csv", "noisy.tdsm", "noisy.meta.json", "noisy.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let m = manifest(&out);
    assert_eq!(m["status"], "complete");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let listed: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
    assert!(listed.contains(&"noisy.tdsm"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("noisy.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["provenance"]["kind"], "noisy");
    assert_eq!(meta["provenance"]["seed"], 7);
    assert_eq!(meta["config"]["measurement"]["n_receivers"], 48);
    let csv = std::fs::read_to_string(out.join("clean.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 48);
}

#[test]
fn empty_scene_warns_and_imaging_finds_no_signal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| {
        let a = t.find("\"scatterers\": [").unwrap() + "\"scatterers\": [".len();
        let b = a + t[a..].find("\n    ]").unwrap();
        format!("{}{}", &t[..a], &t[b..])
    });
    let out = dir.path().join("out");
    let r = wavedsm(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("warning"));
    let r = wavedsm(&["image", "--config", s(&cfg), "--data", s(&out.join("clean.tdsm")), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn lemma_suite_reports_out_of_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let r = wavedsm(&["verify", "lemma", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(5));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_lemma.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for (run, threads) in runs.iter().zip(["1", "3"]) {
        let r = wavedsm(&["--threads", threads, "pipeline", "--config", s(&cfg), "--out", s(run)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let m = manifest(&runs[0]);
    let mut compared = 0;
    for a in m["artifacts"].as_array().unwrap() {
        let rel = a["path"].as_str().unwrap();
        if [".tdsm", ".csv", ".pgm"].iter().any(|e| rel.ends_with(e)) {
            let x = std::fs::read(runs[0].join(rel)).unwrap();
            let y = std::fs::read(runs[1].join(rel)).unwrap();
            assert!(x == y, "{rel} differs");
            compared += 1;
        }
    }
    assert_eq!(compared, 6);
    assert!(runs[0].join("verify_equivalence.json").is_file());
}
