//! End-to-end checks of the `pnsim` binary.

use std::path::PathBuf;
use std::process::Command;

fn pnsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pnsim"))
}

fn write_config(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pnsim-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const TINY_SWEEP: &str = r#"{
    "name": "cli-smoke",
    "channel": "both",
    "oscillators": "both",
    "rho_db": [0.0],
    "antennas": [2],
    "model": { "family": "von_mises", "param": 4.0, "terms": 32 },
    "constellation": { "psk": 4 },
    "trials": 200,
    "target_errors": 0,
    "seed": 5
}"#;

#[test]
fn sweep_emits_fixed_schema_csv() {
    let cfg = write_config("sweep.json", TINY_SWEEP);
    let out = pnsim()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,channel,oscillators,M,N,model_family,model_param,rho_db,trials,errors,ser,stderr,mean_terms,max_terms,flags"
    );
    assert_eq!(lines.count(), 4); // 2 channels × 2 modes × 1 M × 1 ρ
}

#[test]
fn seed_override_changes_output_and_is_reproducible() {
    let cfg = write_config("sweep-seed.json", TINY_SWEEP);
    let run = |seed: &str| {
        let out = pnsim()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--threads", "1"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
}

#[test]
fn out_flag_writes_csv_and_plot_companion() {
    let cfg = write_config("sweep-out.json", TINY_SWEEP);
    let out_path = cfg.with_file_name("result.csv");
    let out = pnsim()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .args(["--trials", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("scenario,channel"));
    assert!(csv.contains(",100,")); // trials override applied
    let companion = std::fs::read_to_string(out_path.with_extension("gp")).unwrap();
    assert!(companion.contains("gnuplot"));
}

#[test]
fn floors_and_truncation_subcommands_work() {
    let cfg = write_config("floors.json", TINY_SWEEP);
    let out = pnsim()
        .args(["floors", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("scenario,channel,M,N,model_family"));
    // κ=4 QPSK floor appears in every row.
    assert!(stdout.contains("0.1417882798862"));

    let out = pnsim()
        .args(["truncation", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("scenario,channel,oscillators,rho_db,evals,mean_terms,max_terms"));
}

#[test]
fn tslot_subcommand_works() {
    let cfg = write_config(
        "tslot.json",
        r#"{
            "name": "cli-tslot",
            "channel": "fc",
            "oscillators": "both",
            "rho_db": [10.0],
            "antennas": [4],
            "model": { "family": "wrapped_gaussian", "param": 0.07, "terms": 32 },
            "constellation": { "psk": 4 },
            "trials": 50,
            "target_errors": 0,
            "seed": 9,
            "data_slots": 3
        }"#,
    );
    let out = pnsim().args(["tslot", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("scenario,channel,detector,M,N"));
    assert!(stdout.contains("df_ns"));
    assert!(stdout.contains("genie_s"));
}

#[test]
fn validate_passes_and_reports() {
    let out = pnsim()
        .args(["validate", "--trials", "4", "--seed", "31", "--threads", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.matches("PASS").count(), 4);
}

#[test]
fn bad_config_fails_with_nonzero_exit() {
    let cfg = write_config("bad.json", r#"{ "name": "broken" }"#);
    let out = pnsim().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
}
