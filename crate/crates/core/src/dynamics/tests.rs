use super::*;
use crate::matcore::Mat;
use crate::Error;

fn step_response_oracle(t: f64) -> (f64, f64) {
    // z'' + z' + z = 1 from rest: zeta = 1/2, omega_n = 1.
    let wd = 3f64.sqrt() / 2.0;
    let e = (-0.5 * t).exp();
    let z = 1.0 - e * ((wd * t).cos() + 0.5 / wd * (wd * t).sin());
    let zd = e / wd * (wd * t).sin();
    (z, zd)
}

#[test]
fn zero_input_at_equilibrium_stays_zero() {
    let traj = simulate(&MsdParams::default(), &[0.0, 0.0], &InputSignal::zero(), 0.01, 200).unwrap();
    assert_eq!(traj.states.max_abs(), 0.0);
    assert_eq!(traj.outputs.max_abs(), 0.0);
    assert_eq!(traj.states.rows(), 201);
}

#[test]
fn linear_step_matches_closed_form() {
    let plant = MsdParams::linear(1.0, 1.0, 1.0);
    let inputs = Mat::from_fn(100, 1, |_, _| 1.0);
    let traj = simulate_inputs(&plant, &[0.0, 0.0], &inputs, 0.01).unwrap();
    let (z, zd) = step_response_oracle(1.0);
    assert!((traj.states[(100, 0)] - z).abs() < 1e-6);
    assert!((traj.states[(100, 1)] - zd).abs() < 1e-6);
    assert!((traj.outputs[(100, 0)] - z).abs() < 1e-6);
}

#[test]
fn default_plant_random_forcing_runs_to_completion() {
    let sig = InputSignal::random_steps(1.0, DEFAULT_HOLD, 7);
    let traj = simulate(&MsdParams::default(), &[0.0, 0.0], &sig, 0.01, 1000).unwrap();
    assert!(traj.states.is_finite());
    assert!(traj.states.max_abs() < 10.0);
}

#[test]
fn divergence_reports_step() {
    let blowup = OdePlant::new(1, 1, 1, |x, _u, dx| dx[0] = x[0] * x[0], |x, y| y[0] = x[0]);
    let inputs = Mat::zeros(500, 1);
    match simulate_inputs(&blowup, &[1.0], &inputs, 0.01) {
        Err(Error::NonFinite { step }) => assert!(step > 50 && step < 200, "step {step}"),
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn storage_examples() {
    let p = MsdParams::default();
    assert_eq!(storage_value(&p, &[0.0, 0.0]), 0.0);
    assert!((storage_value(&p, &[1.0, 0.0]) - 0.75).abs() < 1e-15);
    let heavy = MsdParams { m: 2.0, ..p };
    assert!((storage_value(&heavy, &[0.0, 3.0]) - 9.0).abs() < 1e-15);
}

#[test]
fn dissipation_holds_for_free_decay() {
    let p = MsdParams::default();
    let traj = simulate(&p, &[0.8, -0.5], &InputSignal::zero(), 0.01, 1000).unwrap();
    assert!(check_dissipation(&traj, &p, None).holds());
}

#[test]
fn dissipation_holds_under_random_forcing() {
    let p = MsdParams::default();
    let traj = simulate(&p, &[0.0, 0.0], &InputSignal::random_steps(1.0, 25, 3), 0.01, 1000).unwrap();
    let rep = check_dissipation(&traj, &p, None);
    assert!(rep.holds(), "{:?}", &rep.violations[..rep.violations.len().min(5)]);
}

#[test]
fn negative_damping_is_flagged() {
    let p = MsdParams {
        b0: -1.0,
        ..MsdParams::default()
    };
    assert!(p.validate().is_err());
    let traj = simulate(&p, &[0.1, 0.0], &InputSignal::random_steps(0.5, 25, 3), 0.01, 1000).unwrap();
    assert!(!check_dissipation(&traj, &p, None).holds());
}

#[test]
fn input_examples() {
    assert_eq!(make_input(&InputSignal::zero(), 50, 2).max_abs(), 0.0);

    let sig = InputSignal::random_steps(1.0, 10, 99);
    assert_eq!(make_input(&sig, 100, 1), make_input(&sig, 100, 1));

    let u = make_input(&sig, 100, 1).column(0);
    let mut plateaus: Vec<f64> = u.chunks(10).map(|c| c[0]).collect();
    assert!(u.chunks(10).all(|c| c.iter().all(|v| *v == c[0])));
    plateaus.sort_by(f64::total_cmp);
    plateaus.dedup();
    assert_eq!(plateaus.len(), 10);
    assert!(u.iter().all(|v| v.abs() <= 1.0));

    let prbs = make_input(&InputSignal { kind: InputKind::Prbs, amplitude: 0.3, hold: 4, seed: 1 }, 40, 1);
    assert!(prbs.as_slice().iter().all(|v| (v.abs() - 0.3).abs() < 1e-15));
}

#[test]
fn simulation_is_bit_deterministic() {
    let sig = InputSignal::random_steps(1.0, 25, 42);
    let a = simulate(&MsdParams::default(), &[0.1, 0.0], &sig, 0.01, 500).unwrap();
    let b = simulate(&MsdParams::default(), &[0.1, 0.0], &sig, 0.01, 500).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rk4_empirical_order() {
    // Same ZOH input, internal steps h, h/2, h/4 over a T = 0.2 s grid.
    let plant = MsdParams::linear(1.0, 1.0, 1.0);
    let inputs = Mat::from_fn(20, 1, |j, _| if j < 10 { 1.0 } else { -0.5 });
    let run = |h: f64| simulate_inputs_with_step(&plant, &[0.3, 0.0], &inputs, 0.2, h).unwrap();
    let (a, b, c) = (run(0.1), run(0.05), run(0.025));
    let last = |t: &TrajectoryData| t.states.row(20).to_vec();
    let d1: f64 = last(&a).iter().zip(last(&b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let d2: f64 = last(&b).iter().zip(last(&c)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let order = (d1 / d2).log2();
    assert!(order >= 3.5, "empirical order {order}");
}

#[test]
fn dissipation_over_twenty_seeds() {
    let p = MsdParams::default();
    for seed in 0..20 {
        let traj = simulate(&p, &[0.0, 0.0], &InputSignal::random_steps(1.0, 25, seed), 0.01, 1000).unwrap();
        let rep = check_dissipation(&traj, &p, None);
        assert!(rep.holds(), "seed {seed}: {:?}", rep.violations.first());
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let sig = InputSignal::random_steps(1.0, 25, 5);
    let traj = simulate(&MsdParams::default(), &[0.2, -0.1], &sig, 0.01, 30)
        .unwrap()
        .with_provenance("{\"seed\":5}");
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# config={\"seed\":5}"));
    assert!(lines.next().unwrap().starts_with("# T="));
    assert_eq!(lines.next(), Some("t,x1,x2,u1,y1"));
    assert!(text.lines().last().unwrap().contains(",,"));
    let back = TrajectoryData::read_csv(&buf[..]).unwrap();
    assert_eq!(back, traj);
}

#[test]
fn csv_missing_sample_time_is_an_error() {
    let text = "t,x1,u1,y1\n0,0,0,0\n0.1,0,,0\n";
    assert!(matches!(TrajectoryData::read_csv(text.as_bytes()), Err(Error::Parse(_))));
}
