use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_frac-smith"));
    c.env("FRAC_SMITH_WORKERS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawning frac-smith")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_SWEEP: &str = r#"
chi_values = [0.6, 1.4]

[ga]
pop_size = 8
generations = 3

[sim]
dt = 0.05
horizon = 300.0
disturbance_time = 150.0

[approx]
omega_high = 10.0
"#;

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL_SWEEP).unwrap();
    p
}

/// Every file under `dir` with the given extension, relative path to bytes.
fn files_with_ext(dir: &Path, ext: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == ext) {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn approx_of_order_zero_is_the_constant_one() {
    let o = run(&["approx", "--order", "0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("num = [1e0]") && text.contains("den = [1e0]"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["approx"]).status.code(), Some(1));
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let o = run(&["simulate", "--out", s(&out), "--chi", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chi"));
    assert_eq!(run(&["report", "--in", s(&tmp.path().join("missing"))]).status.code(), Some(1));
    let o = bin().env("FRAC_SMITH_WORKERS", "zero").args(["approx", "--order", "0.5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_paper_settings_writes_the_full_run() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sim");
    let o = run(&["simulate", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,r,d,u,y,e"));
    assert_eq!(lines.count(), 100_001);
    let last = csv.lines().last().unwrap();
    let t: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert!((t - 1000.0).abs() < 1e-9);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["samples"], 100_001);
    assert_eq!(m["diverged"], false);
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn report_reproduces_the_sweep_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("sweep");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names = ["summary.csv", "comparison.json", "plot/region_points.csv"];
    let before: Vec<Vec<u8>> = names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect();
    for n in names {
        fs::remove_file(out.join(n)).unwrap();
    }
    let o = run(&["report", "--in", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (n, b) in names.iter().zip(&before) {
        assert_eq!(&fs::read(out.join(n)).unwrap(), b, "{n} differs");
    }
    assert!(out.join("fronts").join("front_chi_0.6.csv").exists());
    assert!(out.join("plot").join("plot_fronts.py").exists());
    let log = fs::read_to_string(out.join("ga_log.txt")).unwrap();
    assert_eq!(log.lines().count(), 2 * 4);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let cases: [(&str, &[&str]); 3] = [
        ("sweep", &[]),
        ("tune", &["--chi", "0.8"]),
        ("simulate", &["--kp", "0.7", "--ki", "0.03", "--lambda", "1.1", "--chi", "0.4"]),
    ];
    for (cmd, extra) in cases {
        let first = tmp.path().join(format!("{cmd}-1"));
        let second = tmp.path().join(format!("{cmd}-2"));
        let mut args = vec![cmd, "--config", s(&cfg), "--out", s(&first)];
        args.extend_from_slice(extra);
        assert!(run(&args).status.success(), "{cmd}");
        let manifest = first.join("manifest.toml");
        let o = run(&[cmd, "--config", s(&manifest), "--out", s(&second)]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let a = files_with_ext(&first, "csv");
        assert!(!a.is_empty());
        assert_eq!(a, files_with_ext(&second, "csv"), "{cmd}");
    }
}
