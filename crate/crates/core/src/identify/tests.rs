use super::*;
use crate::dynamics::{simulate, InputSignal, MsdParams};
use crate::lifting::{build_matrices, LiftingDictionary};
use crate::matcore::{inverse, pinv, spectral_radius_with, sym_eig, Mat};
use crate::tol;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(v: f64) -> Mat {
    Mat::from_row_slice(1, 1, &[v])
}

/// min_p min_q w^2 (g p - q)^2 with q^2 <= p (p - alpha), p >= alpha.
/// For fixed p the best q clamps g p into the feasible interval, so only a
/// one-dimensional search over p remains.
fn scalar_oracle(g: f64, alpha: f64, w: f64) -> f64 {
    let cost = |p: f64| {
        let r = (p * (p - alpha)).max(0.0).sqrt();
        let q = (g * p).clamp(-r, r);
        w * w * (g * p - q).powi(2)
    };
    let (lo, hi) = (alpha.ln(), (alpha * 1e9).ln());
    let n = 400_000;
    let mut best = (f64::INFINITY, alpha);
    for i in 0..=n {
        let p = (lo + (hi - lo) * i as f64 / n as f64).exp();
        let c = cost(p);
        if c < best.0 {
            best = (c, p);
        }
    }
    // refine around the grid minimiser
    let (mut a, mut b) = (best.1 * 0.999, best.1 * 1.001);
    for _ in 0..200 {
        let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
        if cost(m1) < cost(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    best.0.min(cost(0.5 * (a + b)))
}

fn lmi_min_eig(p: &Mat, q: &Mat, alpha: f64) -> f64 {
    let n = p.rows();
    let top = p - &Mat::identity(n).scale(alpha);
    sym_eig(&Mat::block2(&top, q, &q.transpose(), p)).unwrap().min()
}

fn solve_scalar(g: f64, alpha: f64) -> NiProgramSolution {
    solve_ni(&NiProgram::new(scalar(g), scalar(0.0), alpha, 0.01)).unwrap()
}

#[test]
fn scalar_oracle_known_values() {
    assert_eq!(scalar_oracle(0.5, 1.0, 1.0), 0.0);
    // g = 2, alpha = 1: stationarity gives 12p^2 - 12p - 1 = 0
    let p = (12.0 + (144.0f64 + 48.0).sqrt()) / 24.0;
    let q = (p * (p - 1.0)).sqrt();
    assert!((scalar_oracle(2.0, 1.0, 1.0) - (2.0 * p - q).powi(2)).abs() < 1e-9);
    assert!((scalar_oracle(1.0, 1.0, 1.0) - 0.25).abs() < 1e-6);
}

#[test]
fn scalar_programs_match_grid_oracle() {
    for g in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
        let sol = solve_scalar(g, 1.0);
        let oracle = scalar_oracle(g, 1.0, 1.0);
        let d = &sol.diagnostics;
        assert!((d.objective - oracle).abs() < 1e-3, "g={g}: admm {} oracle {oracle} ({d:?})", d.objective);
        assert!(lmi_min_eig(&sol.p, &sol.q, 1.0) >= -1e-8);
        if d.converged {
            assert!(d.primal_res <= d.stage1.eps_pri && d.dual_res <= d.stage1.eps_dual);
        }
        assert!(sol.a_d[(0, 0)].abs() <= 1.0 + 1e-3);
    }
}

#[test]
fn scalar_inside_unit_interval_is_exact() {
    let sol = solve_scalar(0.5, 1e-3);
    assert!(sol.diagnostics.converged);
    assert!((sol.a_d[(0, 0)] - 0.5).abs() < 1e-5);
    assert!(sol.diagnostics.objective < 1e-10);
}

#[test]
fn feasible_program_keeps_g_a() {
    let ga = Mat::identity(3).scale(0.5);
    // (c I, 0.5 c I) is feasible for c >= alpha / 0.75
    let alpha = 1e-3;
    let c = alpha / 0.75;
    assert!(lmi_min_eig(&Mat::identity(3).scale(c), &ga.scale(c), alpha) >= -1e-15);
    let sol = solve_ni(&NiProgram::new(ga.clone(), Mat::zeros(3, 1), alpha, 0.01)).unwrap();
    assert!(sol.diagnostics.objective < 1e-10);
    assert!(sol.a_d.max_abs_diff(&ga) < 1e-5);
}

#[test]
fn unstable_target_is_pulled_inside() {
    let ga = Mat::identity(2).scale(2.0);
    let sol = solve_ni(&NiProgram::new(ga, Mat::zeros(2, 1), 1e-3, 0.01)).unwrap();
    let rho = spectral_radius_with(&sol.a_d, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS);
    assert!(rho.value <= 1.0, "{rho:?}");
    assert!(sol.diagnostics.objective > 0.0);
}

#[test]
fn bad_program_inputs_are_rejected() {
    assert!(solve_ni(&NiProgram::new(scalar(0.5), scalar(0.0), 0.0, 0.01)).is_err());
    let mut prog = NiProgram::new(Mat::identity(2), Mat::zeros(2, 1), 1e-3, 0.01);
    prog.w = Mat::zeros(2, 2);
    assert!(solve_ni(&prog).is_err());
}

fn random_data(seed: u64, n: usize, m: usize, l: usize) -> crate::lifting::DataMatrices {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = |rows, cols| Mat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
    crate::lifting::DataMatrices {
        theta: r(n, l),
        theta_plus: r(n, l),
        omega: r(m, l),
        y: r(1, l),
    }
}

#[test]
fn edmd_matches_normal_equations() {
    let dm = random_data(3, 5, 2, 60);
    let sol = edmd_fit(&dm).unwrap();
    let xi = dm.stacked();
    let normal = &(&dm.theta_plus * &xi.transpose()) * &inverse(&xi.transpose().gram()).unwrap();
    let gab = sol.g_a.hstack(&sol.g_b);
    assert!(gab.max_abs_diff(&normal) < 1e-9);
    let cd = &(&dm.y * &dm.theta.transpose()) * &inverse(&dm.theta.transpose().gram()).unwrap();
    assert!(sol.c_d.max_abs_diff(&cd) < 1e-9);
}

#[test]
fn edmd_self_map_and_single_sample() {
    let mut dm = random_data(4, 3, 1, 30);
    dm.theta_plus = dm.theta.clone();
    dm.omega = Mat::zeros(1, 30);
    let sol = edmd_fit(&dm).unwrap();
    assert!(sol.g_a.max_abs_diff(&Mat::identity(3)) < 1e-9);
    assert!(sol.residual_j1 < 1e-18);

    let dm = random_data(5, 3, 1, 1);
    let sol = edmd_fit(&dm).unwrap();
    let oracle = &dm.theta_plus * &pinv(&dm.stacked(), tol::PINV_RCOND).unwrap();
    assert!(sol.g_a.hstack(&sol.g_b).max_abs_diff(&oracle) < 1e-12);
    assert!(sol.residual_j1 < 1e-20);
}

#[test]
fn edmd_rejects_zero_data() {
    let dm = crate::lifting::DataMatrices {
        theta: Mat::zeros(2, 10),
        theta_plus: Mat::zeros(2, 10),
        omega: Mat::zeros(1, 10),
        y: Mat::zeros(1, 10),
    };
    assert!(matches!(edmd_fit(&dm), Err(crate::Error::DegenerateData(_))));
}

#[test]
fn reduced_cost_matches_direct_evaluation() {
    let dm = random_data(8, 4, 1, 50);
    let sol = edmd_fit(&dm).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = &Mat::identity(4) + &Mat::from_fn(4, 4, |_, _| rng.gen_range(-0.3..0.3));
    let cost = reduce_cost(&dm, &sol, &w).unwrap();
    let r = Mat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
    let p = &r.gram() + &Mat::identity(4);
    let q = Mat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
    let bd = Mat::from_fn(4, 1, |_, _| rng.gen_range(-1.0..1.0));

    let xi = dm.stacked();
    let mut blk = Mat::identity(5);
    blk.set_block(0, 0, &p);
    let what = &(&xi.transpose() * &inverse(&xi.transpose().gram()).unwrap()) * &blk;
    let direct = (&w * &(&(&dm.theta_plus * &what) - &q.hstack(&bd))).frobenius_norm().powi(2);
    assert!((cost.evaluate(&p, &q, &bd) - direct).abs() < 1e-9 * direct.max(1.0));

    assert!(cost.evaluate(&Mat::identity(4), &sol.g_a, &sol.g_b) < 1e-20);
    let id = reduce_cost(&dm, &sol, &Mat::identity(4)).unwrap();
    let zero_q = id.evaluate(&Mat::identity(4), &Mat::zeros(4, 4), &sol.g_b);
    assert!((zero_q - sol.g_a.frobenius_norm().powi(2)).abs() < 1e-12);
}

#[test]
fn reduce_cost_detects_rank_deficiency() {
    let mut dm = random_data(2, 3, 1, 40);
    let copy: Vec<f64> = dm.theta.row(0).to_vec();
    dm.theta.row_mut(1).copy_from_slice(&copy);
    let sol = edmd_fit(&dm).unwrap();
    assert!(matches!(
        reduce_cost(&dm, &sol, &Mat::identity(3)),
        Err(crate::Error::RankDeficient { rank: 3, rows: 4 })
    ));
}

#[test]
fn lifted_identity_model_is_constant() {
    let dict = LiftingDictionary::identity(2);
    let m = crate::nicore::DiscreteLinearModel::new(
        Mat::identity(2),
        Mat::zeros(2, 1),
        Mat::from_row_slice(1, 2, &[1.0, 2.0]),
        scalar(0.0),
        0.1,
    )
    .unwrap()
    .with_dict(dict);
    let y = simulate_lifted(&m, &[0.5, 0.25], &Mat::from_fn(20, 1, |j, _| j as f64)).unwrap();
    assert_eq!(y.rows(), 21);
    assert!(y.as_slice().iter().all(|v| *v == 1.0));
}

#[test]
fn zero_excitation_is_degenerate() {
    let traj = simulate(&MsdParams::default(), &[0.0, 0.0], &InputSignal::zero(), 0.01, 100).unwrap();
    let r = identify_ni(&traj, &LiftingDictionary::identity(2), &NiConfig::default());
    assert!(matches!(r, Err(crate::Error::DegenerateData(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn edmd_is_first_order_optimal(seed in any::<u64>()) {
        let dm = random_data(seed, 4, 1, 40);
        let sol = edmd_fit(&dm).unwrap();
        let xi = dm.stacked();
        let gab = sol.g_a.hstack(&sol.g_b);
        let j1 = |g: &Mat| (&dm.theta_plus - &(g * &xi)).frobenius_norm().powi(2);
        let base = j1(&gab);
        prop_assert!((base - sol.residual_j1).abs() <= 1e-9 * base.max(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..10 {
            let dir = Mat::from_fn(4, 5, |_, _| if rng.gen::<bool>() { 1e-4 } else { -1e-4 });
            prop_assert!(j1(&(&gab + &dir)) >= base - 1e-12 * base.max(1.0));
        }
    }

    #[test]
    fn ni_program_is_feasible_and_lyapunov(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ga = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.5..1.5));
        let alpha = 1e-3;
        let sol = solve_ni(&NiProgram::new(ga, Mat::zeros(n, 1), alpha, 0.01)).unwrap();
        let pn = sol.p.frobenius_norm();
        prop_assert!(lmi_min_eig(&sol.p, &sol.q, alpha) >= -1e-8 * (1.0 + pn));
        let lyap = &(&(&sol.a_d * &sol.p) * &sol.a_d.transpose()) - &sol.p;
        prop_assert!(sym_eig(&lyap).unwrap().max() <= 1e-6 * alpha.max(pn));
        let rho = spectral_radius_with(&sol.a_d, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS);
        prop_assert!(rho.value <= 1.0 + 1e-3);
    }
}

#[test]
fn linear_plant_recovery() {
    let plant = MsdParams::linear(1.0, 1.0, 1.0);
    let sig = InputSignal::random_steps(1.0, 25, 11);
    let traj = simulate(&plant, &[0.0, 0.0], &sig, 0.01, 1000).unwrap();
    let dict = LiftingDictionary::identity(2);
    let dm = build_matrices(&traj, &dict).unwrap();
    let sol = edmd_fit(&dm).unwrap();
    assert!(sol.residual_j1 < 1e-12, "{}", sol.residual_j1);
    let id = identify_ni(&traj, &dict, &NiConfig::default()).unwrap();
    assert!(id.program.diagnostics.converged, "{:?}", id.program.diagnostics);
    assert!(id.model.a.max_abs_diff(&sol.g_a) < 1e-3);
}

#[test]
fn strict_input_refit_satisfies_equality() {
    let plant = MsdParams::linear(1.0, 1.0, 1.0);
    let traj = simulate(&plant, &[0.0, 0.0], &InputSignal::random_steps(1.0, 25, 11), 0.01, 1000).unwrap();
    let dict = LiftingDictionary::identity(2);
    let cfg = NiConfig {
        strict_b: true,
        ..NiConfig::default()
    };
    let id = identify_ni(&traj, &dict, &cfg).unwrap();
    let d = &id.program.diagnostics;
    assert!(d.converged, "{d:?}");
    assert!(d.strict_refit.is_some());
    // B_d = -(1/T)(A_d - I) P (I + A_d^T)^-1 C_d^T, evaluated directly
    let n = 2;
    let (a, p) = (&id.model.a, &id.program.p);
    let am = a - &Mat::identity(n);
    let ip = inverse(&(&Mat::identity(n) + &a.transpose())).unwrap();
    let implied = (&(&(&am * p) * &ip) * &id.model.c.transpose()).scale(-1.0 / traj.dt);
    assert!(implied.max_abs_diff(&id.model.b) < 1e-9, "{:?} vs {:?}", implied, id.model.b);
    let lmi = lmi_min_eig(p, &(a * p), cfg.alpha);
    assert!(lmi >= -tol::LMI_FEASIBILITY, "{lmi}");
}
