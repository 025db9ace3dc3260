use std::path::Path;
use std::process::{Command, Output};

fn pinch(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinch"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PINCH_OUT")
        .output()
        .expect("binary runs")
}

#[test]
fn sweep_power_repeats_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep-power", "--scheme", "pass-single,cas", "--N", "3", "--D", "20", "--realizations", "20", "--seed", "9"];
    assert!(pinch(&args, a.path()).status.success());
    assert!(pinch(&args, b.path()).status.success());
    let x = std::fs::read(a.path().join("sweep_power.csv")).unwrap();
    let y = std::fs::read(b.path().join("sweep_power.csv")).unwrap();
    assert_eq!(x, y);

    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p_max_dbm,scheme,mean_se,outage,n"));
    let powers: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(powers, ["0", "0", "5", "5", "10", "10", "15", "15", "20", "20"]);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_pinch"))
        .args(["sweep-qos", "--scheme", "cas", "--realizations", "5", "--r-start", "0.5", "--r-stop", "1"])
        .env("PINCH_OUT", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("sweep_qos.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn unknown_scheme_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = pinch(&["sweep-power", "--scheme", "bogus", "--realizations", "5"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scheme") && err.contains("bogus"), "{err}");
}

#[test]
fn oversized_array_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = pinch(&["sweep-power", "--N", "3000", "--D", "5", "--realizations", "5"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_antennas"));
}

#[test]
fn bad_offsets_in_config_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[scenario]\nn_waveguides = 3\noffsets_m = [0.0, 1.0]\n").unwrap();
    let out = pinch(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("offsets"));
}

#[test]
fn trace_writes_both_logs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pinch(&["trace", "--index", "3"], dir.path()).status.success());
    let single = std::fs::read_to_string(dir.path().join("trace_single.csv")).unwrap();
    assert!(single.starts_with("iteration,alpha_s,semantic_se,positions_m"));
    assert!(dir.path().join("trace_mm.csv").exists());
}

#[test]
fn ratio_bins_cover_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = pinch(&["ratio-bins", "--scheme", "cas", "--realizations", "30", "--bin-width", "1", "--max-ratio", "5"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("ratio_bins.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
}
