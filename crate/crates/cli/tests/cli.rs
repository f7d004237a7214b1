use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vll_cli::experiment::Report;
use vll_core::gallery::Sidecar;
use vll_core::snapshot::load_snapshot;

fn vll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vll")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, format!("{body}\n[output]\ndir = \"out\"\nsnapshots = \"all\"\n")).unwrap();
    p
}

const TG: &str = r#"
[grid]
n = "auto"
[physics]
nu_list = [1e-2]
[time]
T = 1.0
dt = 0.01
snap_every = 2
[initial]
kind = "taylor_green"
[diagnostics]
scales = [1.0]
deltas = [0.1]
"#;

#[test]
fn taylor_green_run_then_report_and_diagnose() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TG);
    let o = vll(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    let rep: Report = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep.runs.len(), 1);
    assert_eq!(rep.runs[0].n, 512);
    assert!(rep.runs[0].balance_residual <= 1e-6, "{}", rep.runs[0].balance_residual);
    assert_eq!(rep.constant_free_failures(), 0);
    assert!(out.join("ledger_nu0.csv").is_file());

    let r = vll(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("constant-free: 6 evaluated, 0 failed"), "{text}");

    let mut snaps: Vec<PathBuf> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "vll"))
        .collect();
    snaps.sort();
    assert_eq!(snaps.len(), 51);
    let mut args = vec!["diagnose".to_string(), "--ell".into(), "0.1".into(), "--delta".into(), "0.1".into()];
    args.extend(snaps.iter().map(|p| p.to_string_lossy().into_owned()));
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let d = vll(&argv);
    assert_eq!(code(&d), 0, "{}", String::from_utf8_lossy(&d.stderr));
    let csv = String::from_utf8_lossy(&d.stdout);
    assert!(csv.starts_with("nu,ell,delta,"));
    assert_eq!(csv.lines().count(), 2);
    // Same S2 as the run: both integrate the same snapshots.
    let run_csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    let field = |s: &str, k: usize| s.lines().nth(1).unwrap().split(',').nth(k).unwrap().parse::<f64>().unwrap();
    assert!((field(&csv, 4) - field(&run_csv, 4)).abs() <= 1e-12 * field(&run_csv, 4));
}

#[test]
fn under_resolved_config_is_rejected_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let body = TG.replace("n = \"auto\"", "n = 512").replace("nu_list = [1e-2]", "nu_list = [1e-2, 1e-3]");
    let cfg = write_config(tmp.path(), &body.replace("dt = 0.01", "dt = 2.0"));
    let o = vll(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("minimal n is 1600"), "{err}");
    assert!(err.contains("time.dt"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn single_viscosity_sweep_skips_trends() {
    let tmp = tempfile::tempdir().unwrap();
    let body = TG.replace("T = 1.0", "T = 0.2").replace("kind = \"taylor_green\"", "kind = \"shear\"\nk = 2");
    let cfg = write_config(tmp.path(), &body);
    let o = vll(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("trend tests skipped"));
    let rep: Report =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert!(rep.trends.notice.is_some());
    assert!(rep.trends.monotone.is_empty());
}

#[test]
fn report_errors_and_failures() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&vll(&["report", tmp.path().join("missing").to_str().unwrap()])), 2);

    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "nu,ell\n1,2\n").unwrap();
    assert_eq!(code(&vll(&["report", bad.to_str().unwrap()])), 2);

    let header = "nu,ell,delta,diss_total,s2,lambda_con,omega_con,q_con";
    let fitted = tmp.path().join("fitted.csv");
    std::fs::write(&fitted, format!("{header},s2_le_diss,diss_by_s2\n0.01,0.1,0.1,1,1,1,1,1,true:0.5,false:3\n")).unwrap();
    let o = vll(&["report", fitted.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    let hard = tmp.path().join("hard.csv");
    std::fs::write(&hard, format!("{header},s2_le_diss\n0.01,0.1,0.1,1,1,1,1,1,false:1.5\n")).unwrap();
    assert_eq!(code(&vll(&["report", hard.to_str().unwrap()])), 1);

    let torn = tmp.path().join("torn.csv");
    std::fs::write(&torn, format!("{header},s2_le_diss\n0.01,0.1,0.1,1,1,1,1,1,maybe:1\n")).unwrap();
    assert_eq!(code(&vll(&["report", torn.to_str().unwrap()])), 2);
}

#[test]
fn gallery_list_and_emit() {
    let o = vll(&["gallery", "list"]);
    assert_eq!(code(&o), 0);
    let list = String::from_utf8_lossy(&o.stdout);
    for name in ["checkerboard", "steady_shear", "heat_self_similar", "oscillating_stream"] {
        assert!(list.contains(name));
    }

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let o = vll(&["gallery", "emit", "oscillating_stream", "-0.25", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side: Sidecar =
        serde_json::from_str(&std::fs::read_to_string(out.join("oscillating_stream.json")).unwrap()).unwrap();
    assert_eq!(side.params["kappa"], -0.25);
    assert_eq!(side.params["m"], 3.0);
    assert!(side.facts.iter().all(|f| f.pass));
    let w = load_snapshot(out.join("oscillating_stream_omega.vll")).unwrap();
    assert_eq!(w.omega.grid().n(), side.n);
    assert_eq!(w.nu, side.nu.unwrap());
    assert!(out.join("oscillating_stream_u1.vll").is_file());

    let o = vll(&["gallery", "emit", "steady_shear", "4", "--n", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(load_snapshot(out.join("steady_shear_u2.vll")).unwrap().omega.grid().n(), 64);

    assert_eq!(code(&vll(&["gallery", "emit", "nope", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&vll(&["gallery", "emit", "checkerboard", "8", "4", "--n", "64", "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn thread_cap_must_be_positive() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TG);
    let o = Command::new(env!("CARGO_BIN_EXE_vll"))
        .args(["run", cfg.to_str().unwrap()])
        .env("VLL_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("VLL_THREADS"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[grid]
n = 540
[physics]
nu_list = [1e-2]
[time]
T = 0.2
dt = 0.005
[initial]
kind = "random_smooth"
seed = 11
"#;
    let cfg = write_config(tmp.path(), body);
    let mut tables = Vec::new();
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_vll"))
            .args(["run", cfg.to_str().unwrap()])
            .env("VLL_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        tables.push(std::fs::read(tmp.path().join("out/table.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}
