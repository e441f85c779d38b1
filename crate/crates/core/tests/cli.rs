use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fracture(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracture"))
        .args(args)
        .env("FRACTURE_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(
        out.status.success(),
        "stdout:\n{s}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    s
}

fn smoke() -> String {
    format!("{}/../../configs/smoke.cfg", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fracture-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

#[test]
fn simulate_then_inspect_the_final_state() {
    let dir = scratch("sim");
    let s = ok(&fracture(&[
        "simulate",
        "--config",
        &smoke(),
        "--output",
        p(&dir),
    ]));
    assert!(s.contains("balance: ok"), "{s}");
    for f in [
        "energies.csv",
        "balance.csv",
        "trace.json",
        "mesh.json",
        "field.json",
        "crack_ids.txt",
        "step_0000.vtu",
    ] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let mesh = dir.join("mesh.json");
    let s = ok(&fracture(&["check-mesh", p(&mesh)]));
    assert!(
        s.trim_end().ends_with("admissible") && !s.contains("NOT"),
        "{s}"
    );

    let s = ok(&fracture(&[
        "energy",
        "--mesh",
        p(&mesh),
        "--field",
        p(&dir.join("field.json")),
        "--config",
        &smoke(),
    ]));
    let e: serde_json::Value = serde_json::from_str(&s).unwrap();
    let csv = std::fs::read_to_string(dir.join("energies.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let total: f64 = last[2].parse().unwrap();
    // the trace charges every accumulated crack triangle, the static energy only those cracked now
    let accumulated: u64 = last[6].parse().unwrap();
    assert!(e["total"].as_f64().unwrap() <= total * (1.0 + 1e-12));
    assert!(e["n_cracked"].as_u64().unwrap() <= accumulated);
    assert!(e["total"].as_f64().unwrap() > 0.0);

    let vtp = dir.join("amod.vtp");
    let s = ok(&fracture(&[
        "voidmod",
        "--mesh",
        p(&mesh),
        "--set",
        p(&dir.join("crack_ids.txt")),
        "--field",
        p(&dir.join("field.json")),
        "--eta",
        "0.5",
        "--margin",
        "0",
        "--vtp",
        p(&vtp),
    ]));
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!(v["a_mod"].as_array().unwrap().len() >= v["t_mod"].as_array().unwrap().len());
    assert!(v["crack_length"]["raw"].as_f64().unwrap() > 0.0);
    assert!(vtp.exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn study_writes_a_row_per_level() {
    let dir = scratch("study");
    ok(&fracture(&[
        "study",
        "--config",
        &smoke(),
        "--refine",
        "1",
        "--output",
        p(&dir),
    ]));
    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("eps,delta,"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "eps = 0.1\nwobble = 2\n").unwrap();
    let out = fracture(&["simulate", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wobble") && err.contains('2'), "{err}");
    assert!(!fracture(&["check-mesh", p(&dir.join("missing.json"))])
        .status
        .success());
    let out = Command::new(env!("CARGO_BIN_EXE_fracture"))
        .args(["simulate", "--config", &smoke(), "--output", p(&dir)])
        .env("FRACTURE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}
