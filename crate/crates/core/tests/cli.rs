use std::path::Path;
use std::process::{Command, Output};

use nikoopman::dynamics::TrajectoryData;
use nikoopman::matcore::{sym_eig, Mat};
use nikoopman::model_io::{ModelFile, ModelKind};
use serde_json::Value;

fn nk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nikoopman"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_defaults_give_l_plus_one_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = nk(dir.path(), &["simulate", "--out", "t.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = TrajectoryData::load(&dir.path().join("t.csv")).unwrap();
    assert_eq!(t.states.rows(), 1001);
    assert_eq!(t.steps(), 1000);
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(text.starts_with('#'));
    assert!(text.contains("\"seed\":0"));
}

#[test]
fn zero_input_from_rest_stays_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = nk(dir.path(), &["simulate", "--input", "zero", "--x0", "0,0", "--steps", "50", "--out", "z.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = TrajectoryData::load(&dir.path().join("z.csv")).unwrap();
    for m in [&t.states, &t.inputs, &t.outputs] {
        assert!(m.as_slice().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn simulate_is_byte_reproducible() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = nk(dir.path(), &["simulate", "--seed", "9", "--input", "prbs", "--out", "t.csv"]);
            assert_eq!(code(&out), 0);
            std::fs::read(dir.path().join("t.csv")).unwrap()
        })
        .collect();
    assert!(runs[0] == runs[1], "same seed, different bytes");
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nk(dir.path(), &["simulate", "--seed", "10", "--input", "prbs", "--out", "t.csv"])), 0);
    assert!(runs[0] != std::fs::read(dir.path().join("t.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&nk(d, &["simulate"])), 2);
    assert_eq!(code(&nk(d, &["simulate", "--m", "0", "--out", "x.csv"])), 2);
    let neg = nk(d, &["simulate", "--b0", "-1", "--out", "x.csv"]);
    assert_eq!(code(&neg), 2);
    assert!(stderr(&neg).contains("damping"));
    assert_eq!(code(&nk(d, &["simulate", "--x0", "1", "--out", "x.csv"])), 2);
    assert_eq!(code(&nk(d, &["simulate", "--steps", "0", "--out", "x.csv"])), 2);
    assert!(!d.join("x.csv").exists());
    assert_eq!(code(&nk(d, &["simulate", "--amplitude", "1e8", "--out", "x.csv"])), 3);
    assert_eq!(code(&nk(d, &["bogus"])), 2);
    assert_eq!(code(&nk(d, &["--help"])), 0);

    let missing = nk(d, &["identify", "--traj", "missing.csv", "--out", "m.json"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("missing.csv"));
    assert_eq!(code(&nk(d, &["identify", "--traj", "t.csv", "--alpha", "-1", "--out", "m.json"])), 2);
    let v = nk(d, &["validate", "--models", "none.json", "--traj", "t.csv", "--out-dir", "r"]);
    assert_eq!(code(&v), 2);
    assert_eq!(code(&nk(d, &["linearize", "--x0", "1,2,3", "--out", "l.json"])), 2);
}

#[test]
fn solver_cap_writes_flagged_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&nk(d, &["simulate", "--seed", "1", "--out", "t.csv"])), 0);
    let out = nk(d, &["identify", "--traj", "t.csv", "--center-seed", "1", "--max-iters", "5", "--out", "m.json"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let v = json(&d.join("m.json"));
    assert_eq!(v["solver"]["converged"], Value::Bool(false));
    assert_eq!(v["kind"], "ni");
}

#[test]
fn unconstrained_mode_has_no_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&nk(d, &["simulate", "--seed", "2", "--out", "t.csv"])), 0);
    let out = nk(d, &["identify", "--traj", "t.csv", "--mode", "unconstrained", "--out", "u.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&d.join("u.json"));
    assert_eq!(v["kind"], "unconstrained");
    assert!(v.get("solver").is_none());
    assert_eq!(v["config"]["args"]["nrbf"], 6);
    let f = ModelFile::load(&d.join("u.json")).unwrap();
    assert_eq!(f.model.a.shape(), (8, 8));
}

#[test]
fn ni_model_certificate_holds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&nk(d, &["simulate", "--seed", "4", "--out", "t.csv"])), 0);
    let out = nk(d, &["identify", "--traj", "t.csv", "--center-seed", "4", "--out", "ni.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let f = ModelFile::load(&d.join("ni.json")).unwrap();
    assert_eq!(f.kind, ModelKind::Ni);
    let s = f.solver.unwrap();
    let (a, p) = (&f.model.a, &s.p);
    let lyap = &(&(a * p) * &a.transpose()) - p;
    assert!(sym_eig(&lyap.symmetrize()).unwrap().max() <= 1e-6);
    assert!(sym_eig(p).unwrap().min() > 0.0);
    assert_eq!(f.config["trajectory"]["args"]["seed"], 4);
}

#[test]
fn linearize_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a_of = |name: &str| -> Mat {
        let v = json(&d.join(name));
        serde_json::from_value(v["continuous"]["A"].clone()).unwrap()
    };
    assert_eq!(code(&nk(d, &["linearize", "--x0", "0,0", "--out", "l0.json"])), 0);
    let a0 = a_of("l0.json");
    assert_eq!(a0.to_rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
    assert_eq!(code(&nk(d, &["linearize", "--x0", "0.5,0.5", "--out", "l5.json"])), 0);
    // -(k1 + 3 k3 z^2) - b1 2 z zd with z = zd = 0.5
    assert!((a_of("l5.json")[(1, 0)] + 2.25).abs() < 1e-12);
    let f = ModelFile::load(&d.join("l5.json")).unwrap();
    assert_eq!(f.kind, ModelKind::Linearized);
    assert!(f.continuous.is_some());

    let lin = ["--k3", "0", "--b0", "1", "--b1", "0", "--b2", "0"];
    let mut outs = Vec::new();
    for (x0, name) in [("0,0", "a.json"), ("-0.7,1.3", "b.json")] {
        let mut args = vec!["linearize", "--x0", x0, "--out", name];
        args.extend_from_slice(&lin);
        assert_eq!(code(&nk(d, &args)), 0);
        outs.push(ModelFile::load(&d.join(name)).unwrap().model);
    }
    assert_eq!(outs[0].a, outs[1].a);
    assert_eq!(outs[0].b, outs[1].b);
}

#[test]
fn validate_four_model_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["simulate", "--seed", "4", "--out", "train.csv"][..],
        &["simulate", "--seed", "1004", "--amplitude", "2", "--out", "val.csv"],
        &["identify", "--traj", "train.csv", "--center-seed", "4", "--out", "ni.json"],
        &["identify", "--traj", "train.csv", "--center-seed", "4", "--mode", "unconstrained", "--out", "unc.json"],
        &["linearize", "--x0", "0,0", "--out", "lin00.json"],
        &["linearize", "--x0", "0.5,0.5", "--out", "lin55.json"],
    ] {
        let out = nk(d, args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    }
    let models = "ni.json,unc.json,lin00.json,lin55.json";
    let out = nk(d, &["validate", "--models", models, "--traj", "val.csv", "--ppf", "0.5,0.7,2", "--out-dir", "r"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&d.join("r/report.json"));
    let ms = rep["models"].as_array().unwrap();
    assert_eq!(ms.len(), 4);
    let names: Vec<_> = ms.iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["ni", "unc", "lin00", "lin55"]);
    for m in ms {
        assert_eq!(m["mse_states"].as_array().unwrap().len(), 2);
        assert!(m["closed_loop"]["verdict"].is_string());
    }
    assert_eq!(ms[0]["closed_loop"]["verdict"], "stable");
    assert!(ms[0]["lmi"].is_object());
    for f in ["bode.csv", "nyquist.csv", "step.csv", "timeseries.csv"] {
        let text = std::fs::read_to_string(d.join("r").join(f)).unwrap();
        assert!(text.starts_with("# config="), "{f}");
        assert!(text.lines().count() > 2, "{f}");
    }
    let ts = std::fs::read_to_string(d.join("r/timeseries.csv")).unwrap();
    assert!(ts.lines().nth(1).unwrap().starts_with("t,y_true,y_ni,y_unc,y_lin00,y_lin55"));

    let out = nk(d, &["validate", "--models", "ni.json", "--traj", "val.csv", "--grid", "0.1,10,50", "--out-dir", "q"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&d.join("q/report.json"));
    assert!(rep.get("controller").is_none());
    assert!(rep["models"][0].get("closed_loop").is_none());
    assert!(rep["models"][0]["mse_states"].is_array());
    assert_eq!(rep["grid"]["points"], 50);
}

#[test]
fn exact_model_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let lin = ["--k3", "0", "--b0", "1", "--b1", "0", "--b2", "0"];
    let mut sim = vec!["simulate", "--seed", "3", "--steps", "300", "--out", "t.csv"];
    sim.extend_from_slice(&lin);
    assert_eq!(code(&nk(d, &sim)), 0);
    let mut l = vec!["linearize", "--out", "exact.json"];
    l.extend_from_slice(&lin);
    assert_eq!(code(&nk(d, &l)), 0);
    let out = nk(d, &["validate", "--models", "exact.json", "--traj", "t.csv", "--out-dir", "r"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&d.join("r/report.json"));
    for v in rep["models"][0]["mse_states"].as_array().unwrap() {
        // the plant is integrated by RK4, the model is the exact sampled map
        assert!(v.as_f64().unwrap() < 1e-12, "{v}");
    }
}
