use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratscat")).arg("--out").arg(out).args(args).output().unwrap()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn modes_on_the_waveguide() {
    let tmp = tempfile::tempdir().unwrap();
    let medium = configs().join("waveguide.json");
    let o = run(&["--medium", medium.to_str().unwrap(), "modes", "--kappa", "2"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(tmp.path().join("modes.json"));
    assert_eq!(m["eigenvalues"].as_array().unwrap().len(), 3);
    let manifest = json(tmp.path().join("manifest.json"));
    assert_eq!(manifest["command"], "modes");
    assert!(tmp.path().join("dispersion.csv").exists());
}

#[test]
fn barrier_has_no_guided_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let medium = configs().join("barrier.json");
    let o = run(&["--medium", medium.to_str().unwrap(), "modes", "--kappa", "2"], tmp.path());
    assert!(o.status.success());
    assert!(json(tmp.path().join("modes.json"))["eigenvalues"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_config_reports_json_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"lambda": 2.0, "numerics": {"delta_eq": 0.9}}"#).unwrap();
    let o = run(&["--config", bad.to_str().unwrap(), "modes", "--kappa", "1"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "ConfigInvalid");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn missing_medium_is_an_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["--medium", "/nonexistent/medium.json", "modes", "--kappa", "1"], tmp.path());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(o.status.code(), err["exit_code"].as_i64().map(|c| c as i32));
    assert!(o.status.code() != Some(0));
}

#[test]
fn transmit_map_reports_total_internal_reflection() {
    let tmp = tempfile::tempdir().unwrap();
    let medium = configs().join("interface.json");
    let o = run(&["--medium", medium.to_str().unwrap(), "maps", "--omega-n", "0.3"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let maps = json(tmp.path().join("maps.json"));
    assert!(maps["transmit"]["error"].as_str().unwrap().contains("no transmitted branch"), "{maps}");
    assert!(maps["reflect"].is_array());
}
