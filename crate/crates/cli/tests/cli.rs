use std::fs;
use std::process::{Command, Output};

fn ptychosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptychosc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn svd_table_counts() {
    let out = ptychosc(&["svd-table", "--d", "64", "--delta", "8", "--window", "gaussian:0.3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(counts, ["7", "0", "8", "22", "50", "578", "295"]);
}

#[test]
fn noiseless_recover_is_exact() {
    let out = ptychosc(&["recover", "--d", "16", "--delta", "4", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let err: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("relative_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-8, "{text}");
    assert!(text.contains("complete=true"));
}

#[test]
fn recover_accepts_noise_and_algorithms() {
    for alg in ["blockpr", "blockpr_sc", "wf"] {
        let out = ptychosc(&[
            "recover",
            "--d",
            "12",
            "--delta",
            "3",
            "--snr",
            "40",
            "--epsilon",
            "10^-3",
            "--algorithm",
            alg,
        ]);
        assert!(out.status.success(), "{alg}");
        assert!(stdout(&out).starts_with("relative_error="));
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let csv = dir.path().join("out.csv");
    fs::write(
        &cfg,
        "d = 15\ndelta = 4\nwindow = gaussian:0.3\nepsilon = 0, 0.1\nsnr = 30, inf\ntrials = 2\nseed = 5\n",
    )
    .unwrap();
    let out = ptychosc(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,epsilon,snr,mean_error,trials");
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",2")));
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "d = 64\ndelta = 8\nwindow = gaussian:0.3\ncolour = red\n").unwrap();
    let out = ptychosc(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = ptychosc(&["sweep", "--config", dir.path().join("nope.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(
        ptychosc(&["recover", "--d", "4", "--delta", "8"]).status.code(),
        Some(2)
    );
    assert_eq!(ptychosc(&["recover", "--window", "box:1"]).status.code(), Some(2));
    assert_eq!(
        ptychosc(&["recover", "--algorithm", "phaselift"]).status.code(),
        Some(2)
    );
}
