//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities (run with `--nocapture` to see them
//! stream). Tolerances are fixed in code; desk-scale resolutions are
//! 16x16 elements at polynomial degree 5.

use mdsolve::basis::build_basis;
use mdsolve::cases::TestCase;
use mdsolve::config::{RunConfig, SystemKind};
use mdsolve::dg::{self, DiscreteSpace};
use mdsolve::equations::EquationSystem;
use mdsolve::field::{ExtendedState, NodalField};
use mdsolve::harness::{convergence_study, iteration_study, run, ConvergenceStudy};
use mdsolve::mesh::build_cartesian_mesh;
use mdsolve::solver::{
    self, newton_solve, schur_solve, Preconditioner, PrecondVariant, RebuildPolicy, SolveMode,
    SolveSpec, SolverConfig,
};
use mdsolve::time::tableau;
use std::f64::consts::PI;

fn pass(criterion: &str, detail: &str) {
    println!("acceptance {criterion}: PASS - {detail}");
}

/// Observed order between two rows of a sweep, with a measured error
/// floor removed in quadrature.
fn eoc_defloored(e_coarse: f64, e_fine: f64, dt_ratio: f64, floor: f64) -> f64 {
    let strip = |e: f64| ((e * e - floor * floor).max(0.0)).sqrt().max(1e-300);
    (strip(e_coarse) / strip(e_fine)).ln() / dt_ratio.ln()
}

fn base_config(system: SystemKind) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.system = system;
    cfg.nx = 16;
    cfg.ny = 16;
    cfg.degree = 5;
    cfg.t_end = 0.8;
    cfg
}

// ---------------------------------------------------------------- 1 ----

#[test]
fn criterion_01_tableau_exactness() {
    for q in [4usize, 6, 8] {
        let t = tableau(q).unwrap();
        for l in 0..t.s {
            for m in 0..q {
                let mut lhs = 0.0;
                for j in 0..t.s {
                    lhs += t.b1[[l, j]] * t.c[j].powi(m as i32);
                    if m >= 1 {
                        lhs += m as f64 * t.b2[[l, j]] * t.c[j].powi(m as i32 - 1);
                    }
                }
                let rhs = t.c[l].powi(m as i32 + 1) / (m as f64 + 1.0);
                assert!(
                    (lhs - rhs).abs() < 1e-13,
                    "criterion 1 FAIL: q={q} stage {l} moment {m}: {lhs} vs {rhs}"
                );
            }
        }
    }
    pass("criterion 1 (tableau exactness)", "orders 4/6/8 exact to 1e-13 up to degree q-1");
}

// ---------------------------------------------------------------- 2 ----

#[test]
fn criterion_02_operator_identities() {
    // free stream on constants
    let mesh = build_cartesian_mesh(8, 8, (-1.0, 1.0, -1.0, 1.0)).unwrap();
    let adv = DiscreteSpace::new(mesh.clone(), build_basis(5), EquationSystem::advection([0.3, 0.3]));
    let eul = DiscreteSpace::new(
        mesh.clone(),
        build_basis(5),
        EquationSystem::euler(1.4, 1.0).with_velocity([0.3, 0.3]),
    );
    let ns = DiscreteSpace::new(
        mesh,
        build_basis(5),
        EquationSystem::navier_stokes(1.4, 1.0, 1e-3, 0.72).with_velocity([0.3, 0.3]),
    );
    let mut max_fs: f64 = 0.0;
    for space in [&adv, &eul, &ns] {
        let w = if space.equation.n_var() == 1 {
            space.interpolate(|_, _, w| w[0] = 0.8)
        } else {
            space.interpolate(|_, _, w| {
                w[0] = 1.2;
                w[1] = 0.36;
                w[2] = -0.24;
                w[3] = 2.9;
            })
        };
        let r1 = dg::compute_r1(space, &w).unwrap();
        let sigma = NodalField::zeros_like(&w);
        let r2 = dg::compute_r2(space, &w, &sigma).unwrap();
        max_fs = max_fs.max(r1.max_abs()).max(r2.max_abs());
        assert!(r1.max_abs() <= 1e-12, "criterion 2 FAIL: free-stream R1 {}", r1.max_abs());
        assert!(r2.max_abs() <= 1e-12, "criterion 2 FAIL: free-stream R2 {}", r2.max_abs());
    }

    // global conservation on the sine field
    let case = TestCase::sine(&eul);
    let w = case.initial_state(&eul);
    let r1 = dg::compute_r1(&eul, &w).unwrap();
    let sums = eul.integral_per_var(&r1);
    let scale = w.norm_l2();
    let max_defect = sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    assert!(
        max_defect <= 1e-12 * scale,
        "criterion 2 FAIL: conservation defect {max_defect}"
    );

    // advection: R2(w, sigma) equals R1(sigma) exactly
    let case_a = TestCase::sine(&adv);
    let wa = case_a.initial_state(&adv);
    let sig = adv.interpolate(|x, y, s| s[0] = (2.0 * PI * x).cos() * (PI * y).sin());
    let r2a = dg::compute_r2(&adv, &wa, &sig).unwrap();
    let r1s = dg::compute_r1(&adv, &sig).unwrap();
    let adv_diff = r2a.sub(&r1s).max_abs();
    assert!(
        adv_diff <= 1e-13 * (1.0 + r1s.max_abs()),
        "criterion 2 FAIL: advection R2 != R1(sigma): {adv_diff}"
    );

    // euler: R2 against the finite-difference chain rule
    let r1e = dg::compute_r1(&eul, &w).unwrap();
    let h = 1e-7 * (1.0 + w.norm_l2() / r1e.norm_l2());
    let r1p = dg::compute_r1(&eul, &w.add_scaled(h, &r1e)).unwrap();
    let mut fd = r1p.sub(&r1e);
    fd.scale(1.0 / h);
    let r2e = dg::compute_r2(&eul, &w, &r1e).unwrap();
    let rel = r2e.sub(&fd).norm_l2() / fd.norm_l2();
    assert!(rel <= 1e-5, "criterion 2 FAIL: euler chain rule {rel}");

    pass(
        "criterion 2 (operator identities)",
        &format!("free-stream {max_fs:.1e}, conservation {max_defect:.1e}, euler chain rule {rel:.1e}"),
    );
}

// ---------------------------------------------------------------- 3 ----

fn advection_eoc_config() -> RunConfig {
    let mut cfg = base_config(SystemKind::Advection);
    cfg.dt_list = vec![0.4, 0.2, 0.1, 0.05];
    cfg.solver.tol_newton_rel = 1e-12;
    cfg.solver.tol_gmres_rel = 1e-8;
    cfg.solver.precond_rebuild = RebuildPolicy::EachTimestep;
    cfg
}

fn sweep(cfg: &RunConfig, q: usize, kmax: usize) -> ConvergenceStudy {
    let mut c = cfg.clone();
    c.q = q;
    c.kmax = kmax;
    convergence_study(&c).unwrap()
}

#[test]
fn criterion_03_advection_eoc() {
    let cfg = advection_eoc_config();
    let s40 = sweep(&cfg, 4, 0);
    let s62 = sweep(&cfg, 6, 2);
    let s84 = sweep(&cfg, 8, 4);

    // the spatial/roundoff floor of this resolution, measured as the
    // smallest error any scheme reaches (the eighth-order sweep flattens
    // onto it); it is stripped in quadrature before order extraction
    let floor = s40
        .rows
        .iter()
        .chain(&s62.rows)
        .chain(&s84.rows)
        .map(|r| r.err_sum)
        .fold(f64::INFINITY, f64::min);

    // fourth order: all pairs are far above the floor
    let e40: Vec<f64> = s40.rows.iter().map(|r| r.err_sum).collect();
    let mut eocs40 = Vec::new();
    for w in e40.windows(2) {
        eocs40.push((w[0] / w[1]).log2());
    }
    let mean40 = eocs40.iter().sum::<f64>() / eocs40.len() as f64;
    assert!(
        (mean40 - 4.0).abs() <= 0.4,
        "criterion 3 FAIL: HBPC(4,0) eoc {mean40} (pairs {eocs40:?})"
    );

    // sixth order from the first pair, before the floor
    let eoc62 = eoc_defloored(s62.rows[0].err_sum, s62.rows[1].err_sum, 2.0, floor);
    assert!(
        (eoc62 - 6.0).abs() <= 0.5,
        "criterion 3 FAIL: HBPC(6,2) eoc {eoc62}"
    );

    // eighth order: only the first pair is above the floor at this
    // resolution
    let eoc84 = eoc_defloored(s84.rows[0].err_sum, s84.rows[1].err_sum, 2.0, floor);
    assert!(eoc84 >= 7.0, "criterion 3 FAIL: HBPC(8,4) eoc {eoc84}");

    pass(
        "criterion 3 (advection EOC)",
        &format!("HBPC(4,0) {mean40:.2}, HBPC(6,2) {eoc62:.2}, HBPC(8,4) {eoc84:.2}, floor {floor:.2e}"),
    );
}

// ---------------------------------------------------------------- 4 ----

#[test]
fn criterion_04_fourth_order_corrector_invariance() {
    let mut cfg = base_config(SystemKind::Advection);
    cfg.q = 4;
    cfg.dt = 0.2;
    cfg.t_end = 0.8;
    cfg.solver.tol_newton_rel = 1e-12;
    cfg.solver.tol_gmres_rel = 1e-8;
    let newton_tol = cfg.solver.tol_newton_rel;
    cfg.kmax = 0;
    let (w0, _) = run(&cfg).unwrap();
    cfg.kmax = 2;
    let (w2, _) = run(&cfg).unwrap();
    let diff = w0.sub(&w2).norm_l2();
    let bound = 10.0 * newton_tol * w0.norm_l2();
    assert!(
        diff <= bound,
        "criterion 4 FAIL: |w(k=2) - w(k=0)| = {diff} > {bound}"
    );
    pass(
        "criterion 4 (HBPC(4,k) invariance)",
        &format!("|w(k=2) - w(k=0)| = {diff:.2e} <= {bound:.2e}"),
    );
}

// ---------------------------------------------------------------- 5 ----

#[test]
fn criterion_05_euler_eoc() {
    let mut cfg = base_config(SystemKind::Euler);
    cfg.epsilon = 1.0;
    cfg.dt_list = vec![0.4, 0.2, 0.1, 0.05];
    cfg.solver.tol_newton_rel = 1e-12;
    cfg.solver.tol_gmres_rel = 1e-5;
    cfg.solver.precond_rebuild = RebuildPolicy::EachTimestep;

    let mut details = Vec::new();
    let mut floor = f64::INFINITY;
    let mut studies = Vec::new();
    for k in 0..=2usize {
        let study = sweep(&cfg, 6, k);
        floor = study.rows.iter().map(|r| r.err_sum).fold(floor, f64::min);
        studies.push(study);
    }
    for (k, study) in studies.iter().enumerate() {
        let expected = (4 + k) as f64;
        // use the coarsest pair whose fine error still sits clear of the
        // floor; with the expected orders that is always the first pair
        let eoc = eoc_defloored(study.rows[0].err_sum, study.rows[1].err_sum, 2.0, floor);
        assert!(
            (eoc - expected).abs() <= 0.5,
            "criterion 5 FAIL: HBPC(6,{k}) eoc {eoc} (errors {:?})",
            study.rows.iter().map(|r| r.err_sum).collect::<Vec<_>>()
        );
        details.push(format!("k={k}: {eoc:.2}"));
    }
    pass("criterion 5 (euler EOC)", &details.join(", "));
}

// ---------------------------------------------------------------- 6 ----

#[test]
fn criterion_06_navier_stokes_eoc() {
    let mut cfg = base_config(SystemKind::NavierStokes);
    cfg.mu = 1e-3;
    cfg.q = 4;
    cfg.kmax = 0;
    cfg.dt_list = vec![0.025, 0.0125, 0.00625];
    cfg.solver.tol_newton_rel = 1e-10;
    cfg.solver.tol_newton_abs = 1e-12;
    cfg.solver.tol_gmres_rel = 1e-3;
    cfg.solver.precond_rebuild = RebuildPolicy::EachTimestep;
    let study = convergence_study(&cfg).unwrap();
    let errs: Vec<f64> = study.rows.iter().map(|r| r.err_sum).collect();
    let eocs: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mean = eocs.iter().sum::<f64>() / eocs.len() as f64;
    assert!(
        (mean - 4.0).abs() <= 0.5,
        "criterion 6 FAIL: HBPC(4,0) eoc {mean} (errors {errs:?})"
    );
    pass(
        "criterion 6 (navier-stokes EOC)",
        &format!("HBPC(4,0) eoc {mean:.2} against the explicit reference (errors {errs:?})"),
    );
}

// ---------------------------------------------------------------- 7 ----

#[test]
fn criterion_07_preconditioner_effect() {
    let mut cfg = base_config(SystemKind::Euler);
    cfg.q = 4;
    cfg.kmax = 0;
    cfg.dt_list = vec![0.05, 0.1, 0.2, 0.4];
    cfg.precond_list = vec![Preconditioner::None, Preconditioner::BjExt];
    cfg.solver.tol_newton_rel = 1e-8;
    cfg.solver.tol_gmres_rel = 1e-3;
    let study = iteration_study(&cfg).unwrap();

    let per_dt = |pc: Preconditioner, dt: f64| -> f64 {
        study
            .rows
            .iter()
            .find(|r| r.preconditioner == pc && (r.dt - dt).abs() < 1e-12)
            .and_then(|r| r.gmres_per_dt)
            .expect("converged row")
    };
    let none_02 = per_dt(Preconditioner::None, 0.2);
    let bj_02 = per_dt(Preconditioner::BjExt, 0.2);
    assert!(
        bj_02 <= 0.5 * none_02,
        "criterion 7 FAIL: bj_ext {bj_02} vs none {none_02} at dt=0.2"
    );

    // log-log slope of the preconditioned iteration counts
    let pts: Vec<(f64, f64)> = cfg
        .dt_list
        .iter()
        .map(|&dt| (dt.ln(), per_dt(Preconditioner::BjExt, dt).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    assert!(slope < 1.0, "criterion 7 FAIL: bj_ext iteration growth slope {slope}");

    pass(
        "criterion 7 (preconditioner effect)",
        &format!("at dt=0.2: bj_ext {bj_02:.0} vs none {none_02:.0} iterations/dt; bj_ext slope {slope:.2}"),
    );
}

// ---------------------------------------------------------------- 8 ----

#[test]
fn criterion_08_schur_degradation() {
    let mut cfg = base_config(SystemKind::Advection);
    cfg.q = 4;
    cfg.kmax = 0;
    cfg.t_end = 0.8;
    cfg.solver.tol_newton_rel = 1e-8;
    cfg.solver.tol_gmres_rel = 1e-3;
    cfg.mode_list = vec![SolveMode::Extended, SolveMode::Schur];
    cfg.dt_list = vec![0.05, 0.8];
    let study = iteration_study(&cfg).unwrap();
    let row = |mode: SolveMode, dt: f64| {
        study
            .rows
            .iter()
            .find(|r| r.mode == mode && (r.dt - dt).abs() < 1e-12)
            .expect("row present")
    };
    // at the largest timestep the Schur formulation loses: either more
    // Krylov iterations or outright non-convergence
    let ext_large = row(SolveMode::Extended, 0.8);
    let schur_large = row(SolveMode::Schur, 0.8);
    let degraded = match (schur_large.converged, schur_large.gmres_per_dt, ext_large.gmres_per_dt)
    {
        (false, _, _) => true,
        (true, Some(s), Some(e)) => s > e,
        _ => false,
    };
    assert!(
        degraded,
        "criterion 8 FAIL: schur {:?} vs extended {:?} at dt=0.8",
        schur_large.gmres_per_dt, ext_large.gmres_per_dt
    );

    // at the smallest timestep the two formulations agree
    let tol = cfg.solver.tol_newton_rel;
    cfg.dt = 0.05;
    cfg.solver.mode = SolveMode::Extended;
    let (w_ext, _) = run(&cfg).unwrap();
    cfg.solver.mode = SolveMode::Schur;
    let (w_schur, _) = run(&cfg).unwrap();
    let rel = w_ext.sub(&w_schur).norm_l2() / w_ext.norm_l2();
    assert!(
        rel <= 10.0 * tol,
        "criterion 8 FAIL: modes differ by {rel} at dt=0.05"
    );

    let detail = format!(
        "dt=0.8: schur {} vs extended {:.0} iters/dt; dt=0.05 agreement {rel:.2e}",
        schur_large
            .gmres_per_dt
            .map(|v| format!("{v:.0}"))
            .unwrap_or_else(|| "no convergence".to_string()),
        ext_large.gmres_per_dt.unwrap()
    );
    pass("criterion 8 (schur degradation)", &detail);
}

// ---------------------------------------------------------------- 9 ----

#[test]
fn criterion_09_matrix_free_consistency() {
    let mesh = build_cartesian_mesh(16, 16, (-1.0, 1.0, -1.0, 1.0)).unwrap();
    let space = DiscreteSpace::new(mesh, build_basis(5), EquationSystem::advection([0.3, 0.3]));
    let case = TestCase::sine(&space);
    let w = case.initial_state(&space);
    let r1 = dg::compute_r1(&space, &w).unwrap();
    let r2 = dg::compute_r2(&space, &w, &r1).unwrap();
    let mut b = w.clone();
    b.axpy(0.05, &r1);
    let spec = SolveSpec {
        alpha1: 0.5,
        alpha2: 1.0 / 6.0,
        dt: 0.2,
        b,
    };
    let x = ExtendedState::new(w.clone(), r1.clone());
    let eval = solver::ResidualEval {
        g: ExtendedState::zeros_like(&x),
        r1,
        r2,
        lift: None,
    };
    // deterministic pseudo-random increments (xorshift noise per node)
    let mut max_rel: f64 = 0.0;
    for seed in 0..5u64 {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(12345);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut dw = space.zero_field();
        let mut ds = space.zero_field();
        for v in dw.as_slice_mut() {
            *v = next();
        }
        for v in ds.as_slice_mut() {
            *v = next();
        }
        let dx = ExtendedState::new(dw, ds);
        let exact = solver::jvp(&space, &spec, &x, &eval, &dx, false).unwrap();
        let fd = solver::jvp(&space, &spec, &x, &eval, &dx, true).unwrap();
        let num = (exact.w.sub(&fd.w).norm_l2().powi(2)
            + exact.sigma.sub(&fd.sigma).norm_l2().powi(2))
        .sqrt();
        max_rel = max_rel.max(num / exact.norm_l2());
    }
    assert!(max_rel <= 1e-6, "criterion 9 FAIL: jvp paths differ by {max_rel}");

    // block inverse identity per element
    let eul_mesh = build_cartesian_mesh(4, 4, (-1.0, 1.0, -1.0, 1.0)).unwrap();
    let eul = DiscreteSpace::new(
        eul_mesh,
        build_basis(3),
        EquationSystem::euler(1.4, 1.0).with_velocity([0.3, 0.3]),
    );
    let we = TestCase::sine(&eul).initial_state(&eul);
    let (alpha1, alpha2, dt) = (0.5, 1.0 / 6.0, 0.2);
    let blocks = solver::build_precond(&eul, &we, alpha1, alpha2, dt, PrecondVariant::BjExt).unwrap();
    let m = blocks.m;
    let beta = 0.5 * alpha2 * dt * dt;
    let id = nalgebra::DMatrix::<f64>::identity(m, m);
    let mut max_defect: f64 = 0.0;
    for e in 0..eul.mesh.n_elements() {
        let k = blocks.k_block(e);
        let a = &id - (alpha1 * dt) * k;
        let b = beta * k;
        let c = -k;
        let (d, eb, f, g) = blocks.inverse_blocks(e);
        max_defect = max_defect
            .max(((&a * &d + &b * &f) - &id).amax())
            .max((&a * &eb + &b * &g).amax())
            .max(((&c * &d) + &f).amax())
            .max(((&c * &eb + &g) - &id).amax());
    }
    assert!(max_defect <= 1e-10, "criterion 9 FAIL: P P^-1 defect {max_defect}");

    pass(
        "criterion 9 (matrix-free consistency)",
        &format!("jvp agreement {max_rel:.1e}, block inverse defect {max_defect:.1e}"),
    );
}

// --------------------------------------------------------------- 10 ----

#[test]
fn criterion_10_sigma_consistency() {
    let mesh = build_cartesian_mesh(16, 16, (-1.0, 1.0, -1.0, 1.0)).unwrap();
    let space = DiscreteSpace::new(
        mesh,
        build_basis(5),
        EquationSystem::euler(1.4, 1.0).with_velocity([0.3, 0.3]),
    );
    let case = TestCase::sine(&space);
    let w = case.initial_state(&space);
    let r1 = dg::compute_r1(&space, &w).unwrap();
    let r2 = dg::compute_r2(&space, &w, &r1).unwrap();
    let cfg = SolverConfig {
        tol_newton_rel: 1e-8,
        tol_gmres_rel: 1e-5,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    // a predictor-coefficient stage and a corrector-coefficient stage
    for (alpha1, alpha2) in [(0.5, 1.0 / 6.0), (1.0, 1.0)] {
        let dt = 0.2;
        let mut b = w.clone();
        b.axpy(alpha1 * dt, &r1);
        b.axpy(0.5 * alpha2 * dt * dt, &r2);
        let spec = SolveSpec { alpha1, alpha2, dt, b };
        let x0 = ExtendedState::new(w.clone(), r1.clone());
        let g0 = solver::residual(&space, &spec, &x0).unwrap().norm_l2();
        for solve in [newton_solve, schur_solve] {
            let (x, _) = solve(&space, &spec, &cfg, x0.clone(), None).unwrap();
            let r1_x = dg::compute_r1(&space, &x.w).unwrap();
            let defect = x.sigma.sub(&r1_x).norm_l2();
            let bound = (cfg.tol_newton_rel * g0).max(1e-11);
            assert!(
                defect <= bound,
                "criterion 10 FAIL: |sigma - R1(W)| = {defect} > {bound}"
            );
            worst = worst.max(defect);
        }
    }
    pass(
        "criterion 10 (sigma consistency)",
        &format!("worst |sigma - R1(W)| = {worst:.2e} across stage solves"),
    );
}
