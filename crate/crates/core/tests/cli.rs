use std::process::Command;

fn gancc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gancc"))
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = gancc()
        .env("GANCC_OUT_DIR", dir.path())
        .args(["simulate", "--trials", "1", "--packet_len", "32"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("seed"));
}

#[test]
fn bad_config_key_is_a_one_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "m = 4\nbogus = 1\n").unwrap();
    let out = gancc().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim().lines().count(), 1);
}

#[test]
fn simulate_writes_csv_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "scheme = smoke\nm = 3\npacket_len = 32\ntrials = 2\nsnr_db = 10\n").unwrap();
    let out = gancc()
        .env("GANCC_OUT_DIR", dir.path())
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("smoke.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], gancc::harness::CSV_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("smoke,lt-ldpc,cwc,sequential,3,32,10,2,"));
}

#[test]
fn construct_then_girth() {
    let dir = tempfile::tempdir().unwrap();
    let out = gancc()
        .args(["construct", "--seed", "1", "--packet_len", "37", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let headers = std::fs::read_to_string(dir.path().join("headers.hex")).unwrap();
    assert_eq!(headers.lines().count(), 5);
    let g = gancc().arg("girth").arg(dir.path().join("H.alist")).output().unwrap();
    assert!(g.status.success());
    let girth: usize = String::from_utf8_lossy(&g.stdout).trim().parse().unwrap();
    assert!(girth >= 6);
}

#[test]
fn de_emits_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = gancc()
        .env("GANCC_OUT_DIR", dir.path())
        .args(["de", "--snr_db", "4,8", "--de_samples", "20", "--de_iters", "20", "--ensemble", "ldgm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ensemble,D,m,snr_db,samples,iterations,p_e");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ldgm,3,5,4,20,20,"));
}
