use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_galileo-lab"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(path: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(path).arg("--out").arg(out).args(extra).output().unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn audit<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["audits"].as_array().unwrap().iter().find(|a| a["audit"] == name).unwrap()
}

#[test]
fn kepler_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("kepler.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path());
    for name in ["momentum", "angular-momentum", "energy", "boost-covariance"] {
        assert_eq!(audit(&r, name)["verdict"], "PASS", "{name}");
    }
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["seed"], 42);

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,ax,ay,az,avx,avy,avz,bx,by,bz,bvx,bvy,bvz,Px,Py,Pz,Lx,Ly,Lz,E");
    assert_eq!(lines.count(), 10_001);
    assert!(dir.path().join("plot_orbit.csv").exists());
    assert!(dir.path().join("plot_drift.csv").exists());
}

#[test]
fn perp_demo_momentum_fails_rate_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("perp-demo.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    let m = audit(&r, "momentum");
    assert_eq!(m["verdict"], "FAIL");
    // x_AB = (1,0,0), v_AB = (0,1,0) and equal masses keep the relative
    // motion inertial, so P grows linearly at 2 |x x v| phi_perp = 2
    let t_end = 1.0;
    let expected = 2.0 * 1.0 * 1.0 * t_end;
    assert!((m["residual"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert_eq!(audit(&r, "dpdt-identity")["verdict"], "PASS");
    assert_eq!(r["verdict"], "FAIL");
}

#[test]
fn other_bundled_scenarios() {
    let cases = [
        ("drag.json", 2, vec![("momentum", "PASS"), ("angular-momentum", "FAIL"), ("dldt-identity", "PASS")]),
        ("light.json", 0, vec![("oplus-group", "PASS"), ("invariance-theorem", "PASS"), ("light-quotient", "PASS")]),
        ("light-galilean.json", 2, vec![("light-quotient", "FAIL")]),
    ];
    for (file, code, verdicts) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&scenario(file), dir.path(), &[]);
        assert_eq!(out.status.code(), Some(code), "{file}");
        let r = report(dir.path());
        for (name, verdict) in verdicts {
            assert_eq!(audit(&r, name)["verdict"], verdict, "{file}: {name}");
        }
    }
}

#[test]
fn missing_mass_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("perp-demo.json")).unwrap();
    let broken = text.replacen("\"mass\": 1.0, ", "", 1);
    assert_ne!(text, broken);
    let path = dir.path().join("broken.json");
    std::fs::write(&path, broken).unwrap();
    let out = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mass"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn invalid_values_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("perp-demo.json")).unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text.replace("\"step\": 0.01", "\"step\": -0.01")).unwrap();
    let out = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrator.step"));

    let out = run(&dir.path().join("does-not-exist.json"), &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn singularity_is_an_audit_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "schema": "v1",
        "name": "collision",
        "bodies": [
            {"id": "A", "mass": 1.0, "position": [0, 0, 0], "velocity": [0, 0, 0]},
            {"id": "B", "mass": 1.0, "position": [0, 0, 0], "velocity": [0, 0, 0]}
        ],
        "laws": [{"preset": "gravity"}],
        "integrator": {"method": "rk4", "step": 0.01, "t_end": 1.0},
        "audits": ["momentum", "energy"]
    }"#;
    let path = dir.path().join("collision.json");
    std::fs::write(&path, text).unwrap();
    let out = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&dir.path().join("out"));
    assert_eq!(audit(&r, "momentum")["verdict"], "ERROR");
    assert_eq!(r["verdict"], "ERROR");
}

#[test]
fn runs_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let path = scenario("light.json");
    run(&path, d1.path(), &["--seed", "7"]);
    run(&path, d2.path(), &["--seed", "7"]);
    for f in ["report.json", "trajectory.csv", "plot_orbit.csv", "plot_drift.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    assert_eq!(report(d1.path())["seed"], 7);
}

#[test]
fn flags_override_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("perp-demo.json"), dir.path(), &["--step", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["integrator"]["step"], 0.05);

    // verlet cannot integrate a velocity-dependent law
    let out = run(&scenario("perp-demo.json"), dir.path(), &["--method", "verlet"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&scenario("perp-demo.json"), dir.path(), &["--method", "euler"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn audits_catalog() {
    let out = bin().arg("audits").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["frame-group", "objectivity-sweep", "inertia", "momentum", "energy", "oplus-group", "light-quotient"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn version() {
    let out = bin().arg("version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("galileo-lab "));
}
