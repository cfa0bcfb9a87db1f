use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_informer-options"))
}

#[test]
fn generate_then_prepare_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for cmd in ["generate", "prepare"] {
        let output = bin()
            .args([cmd, "--out", out, "--seed", "4", "--set", "scenario.days=260"])
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(output.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&output.stderr));
    }
    let chain = std::fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    assert!(
        chain.starts_with("quote_date,expiry_date,strike,option_type,underlying_price,implied_vol,mid_price,volume")
    );
    assert!(dir.path().join("prepared.json").exists());
}

#[test]
fn unknown_key_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let output =
        bin().args(["generate", "--out", dir.path().to_str().unwrap(), "--set", "scenario.bogus=1"]).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("unknown key `scenario.bogus`"), "{err}");
}

#[test]
fn evaluate_without_checkpoint_explains_next_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let days = ["--set", "scenario.days=260"];
    for cmd in ["generate", "prepare"] {
        assert!(bin().args([cmd, "--out", out]).args(days).output().unwrap().status.success());
    }
    let output = bin().args(["evaluate", "--out", out, "--model", "lstm"]).args(days).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("train --model lstm"));
}
