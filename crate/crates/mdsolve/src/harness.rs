//! Study drivers: single runs, timestep-sweep convergence studies with
//! observed-order tables, solver-iteration studies, and CSV emission.

use crate::basis::build_basis;
use crate::cases::{l2_error, TestCase};
use crate::config::{ConfigError, RunConfig, Scheme, SystemKind};
use crate::dg::DiscreteSpace;
use crate::equations::EquationSystem;
use crate::field::NodalField;
use crate::mesh::build_cartesian_mesh;
use crate::solver::{Preconditioner, SolveMode};
use crate::time::{hbpc_advance, rk4_reference_advance, tableau, HbpcConfig, TimeError};
use std::io::Write;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Version tag written as the first line of every CSV file.
pub const CSV_VERSION: &str = "# mdsolve-csv-v1";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        source: TimeError,
    },
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Operator(#[from] crate::dg::OperatorError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Whether this failure came from the implicit solver (as opposed to
    /// configuration or I/O).
    pub fn is_solver_failure(&self) -> bool {
        !matches!(self, HarnessError::Config(_) | HarnessError::Io(_))
    }
}

/// Build the discrete space described by a configuration.
pub fn build_space(cfg: &RunConfig) -> Result<DiscreteSpace, ConfigError> {
    let mesh = build_cartesian_mesh(cfg.nx, cfg.ny, cfg.bounds)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let basis = build_basis(cfg.degree);
    let equation = match cfg.system {
        SystemKind::Advection => EquationSystem::advection(cfg.a),
        SystemKind::Euler => EquationSystem::euler(cfg.gamma, cfg.epsilon).with_velocity(cfg.a),
        SystemKind::NavierStokes => {
            EquationSystem::navier_stokes(cfg.gamma, cfg.epsilon, cfg.mu, cfg.prandtl)
                .with_velocity(cfg.a)
        }
    };
    Ok(DiscreteSpace::new(mesh, basis, equation).with_br2_eta(cfg.br2_eta))
}

/// Outcome of a single time-marching run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub err_per_var: Option<Vec<f64>>,
    pub err_sum: Option<f64>,
    pub newton_total: usize,
    pub gmres_total: usize,
    pub wallclock_s: f64,
    pub config_hash: String,
}

/// An automatic explicit step size for reference runs, conservatively
/// inside the stability region of the collocation operator.
pub fn auto_reference_dt(space: &DiscreteSpace, w0: &NodalField) -> f64 {
    let eq = &space.equation;
    let np = space.n_nodes();
    let mut lambda: f64 = 0.0;
    for e in 0..space.mesh.n_elements() {
        let el = w0.element(e);
        for i in 0..np {
            for j in 0..np {
                let speed = if eq.n_var() == 1 {
                    eq.a[0].abs().max(eq.a[1].abs())
                } else {
                    let rho = el[[i, j, 0]];
                    let v1 = el[[i, j, 1]] / rho;
                    let v2 = el[[i, j, 2]] / rho;
                    let ws = [rho, el[[i, j, 1]], el[[i, j, 2]], el[[i, j, 3]]];
                    let p = eq.pressure(&ws).unwrap_or(1.0).max(1e-12);
                    let c = (eq.gamma * p / rho).sqrt() / eq.epsilon;
                    v1.abs().max(v2.abs()) + c
                };
                lambda = lambda.max(speed);
            }
        }
    }
    let h = space.mesh.dx.min(space.mesh.dy);
    let n = space.basis.degree as f64;
    0.05 * h / (lambda.max(1e-12) * (2.0 * n + 1.0))
}

/// March the explicit reference integrator from `w0` to `t_end`.
pub fn reference_solution(
    space: &DiscreteSpace,
    w0: &NodalField,
    t_end: f64,
    reference_dt: f64,
) -> Result<NodalField, HarnessError> {
    let dt = if reference_dt > 0.0 {
        reference_dt
    } else {
        auto_reference_dt(space, w0)
    };
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut w = w0.clone();
    for step in 0..steps {
        w = rk4_reference_advance(space, dt, &w).map_err(|source| HarnessError::Step {
            step,
            t: step as f64 * dt,
            source,
        })?;
    }
    Ok(w)
}

/// Time-march one configuration from 0 to `t_end`; the final step is
/// shortened so the run lands exactly on `t_end`.
pub fn run(cfg: &RunConfig) -> Result<(NodalField, RunSummary), HarnessError> {
    let space = build_space(cfg)?;
    let case = TestCase::sine(&space);
    let w0 = case.initial_state(&space);
    let reference = if !case.has_exact_solution() {
        Some(reference_solution(&space, &w0, cfg.t_end, cfg.reference_dt)?)
    } else {
        None
    };
    run_from(cfg, &space, &case, w0, reference.as_ref())
}

/// [`run`] with the space, initial state and (for viscous cases) the
/// reference solution supplied by the caller, so studies can share them.
pub fn run_from(
    cfg: &RunConfig,
    space: &DiscreteSpace,
    case: &TestCase,
    w0: NodalField,
    reference: Option<&NodalField>,
) -> Result<(NodalField, RunSummary), HarnessError> {
    let start = Instant::now();
    let tab = tableau(cfg.q).map_err(TimeError::from)?;
    let mut w = w0;
    let mut t = 0.0;
    let mut steps = 0;
    let mut newton_total = 0;
    let mut gmres_total = 0;
    let t_tol = 1e-12 * cfg.t_end.max(1.0);
    while t < cfg.t_end - t_tol {
        let dt_step = cfg.dt.min(cfg.t_end - t);
        match cfg.scheme {
            Scheme::Hbpc => {
                let hcfg = HbpcConfig {
                    q: cfg.q,
                    k_max: cfg.kmax,
                    dt: dt_step,
                };
                let (next, diag) = hbpc_advance(space, &hcfg, &tab, &cfg.solver, &w)
                    .map_err(|source| HarnessError::Step { step: steps, t, source })?;
                w = next;
                newton_total += diag.newton_iterations;
                gmres_total += diag.gmres_iterations;
            }
            Scheme::Rk4 => {
                w = rk4_reference_advance(space, dt_step, &w)
                    .map_err(|source| HarnessError::Step { step: steps, t, source })?;
            }
        }
        t += dt_step;
        steps += 1;
    }

    let (err_per_var, err_sum) = match (case.exact_state(space, cfg.t_end), reference) {
        (Some(exact), _) => {
            let (v, s) = l2_error(space, &w, &exact);
            (Some(v), Some(s))
        }
        (None, Some(reference)) => {
            let (v, s) = l2_error(space, &w, reference);
            (Some(v), Some(s))
        }
        (None, None) => (None, None),
    };

    let summary = RunSummary {
        steps,
        dt: cfg.dt,
        t_end: cfg.t_end,
        err_per_var,
        err_sum,
        newton_total,
        gmres_total,
        wallclock_s: start.elapsed().as_secs_f64(),
        config_hash: cfg.hash(),
    };
    Ok((w, summary))
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub err_per_var: Vec<f64>,
    pub err_sum: f64,
    /// Observed order against the previous row; absent on the first row.
    pub eoc_sum: Option<f64>,
    pub newton_total: usize,
    pub gmres_total: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub config_hash: String,
}

/// Run the timestep sweep of the configuration and tabulate errors and
/// observed orders.
pub fn convergence_study(cfg: &RunConfig) -> Result<ConvergenceStudy, HarnessError> {
    let dts = if cfg.dt_list.is_empty() {
        vec![cfg.dt]
    } else {
        cfg.dt_list.clone()
    };
    let space = build_space(cfg)?;
    let case = TestCase::sine(&space);
    let w0 = case.initial_state(&space);
    let reference = if !case.has_exact_solution() {
        Some(reference_solution(&space, &w0, cfg.t_end, cfg.reference_dt)?)
    } else {
        None
    };

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &dt in &dts {
        let mut run_cfg = cfg.clone();
        run_cfg.dt = dt;
        let (_, summary) = run_from(&run_cfg, &space, &case, w0.clone(), reference.as_ref())?;
        let err_per_var = summary.err_per_var.expect("sine cases always have errors");
        let err_sum = summary.err_sum.expect("sine cases always have errors");
        let eoc_sum = rows.last().map(|prev: &ConvergenceRow| {
            (prev.err_sum / err_sum).ln() / (prev.dt / dt).ln()
        });
        rows.push(ConvergenceRow {
            dt,
            err_per_var,
            err_sum,
            eoc_sum,
            newton_total: summary.newton_total,
            gmres_total: summary.gmres_total,
        });
    }
    Ok(ConvergenceStudy {
        rows,
        config_hash: cfg.hash(),
    })
}

#[derive(Debug, Clone)]
pub struct IterationRow {
    pub dt: f64,
    pub preconditioner: Preconditioner,
    pub mode: SolveMode,
    pub steps: usize,
    pub converged: bool,
    /// Krylov iterations per timestep, averaged over the run; missing when
    /// the run did not converge.
    pub gmres_per_dt: Option<f64>,
    pub newton_per_dt: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationStudy {
    pub rows: Vec<IterationRow>,
    pub config_hash: String,
}

/// Sweep `(dt, preconditioner, mode)` and record the solver effort per
/// timestep. Non-convergence is recorded, not fatal.
pub fn iteration_study(cfg: &RunConfig) -> Result<IterationStudy, HarnessError> {
    let dts = if cfg.dt_list.is_empty() {
        vec![cfg.dt]
    } else {
        cfg.dt_list.clone()
    };
    let preconds = if cfg.precond_list.is_empty() {
        vec![cfg.solver.preconditioner]
    } else {
        cfg.precond_list.clone()
    };
    let modes = if cfg.mode_list.is_empty() {
        vec![cfg.solver.mode]
    } else {
        cfg.mode_list.clone()
    };

    let space = build_space(cfg)?;
    let case = TestCase::sine(&space);
    let w0 = case.initial_state(&space);

    let mut rows = Vec::new();
    for &dt in &dts {
        for &pc in &preconds {
            for &mode in &modes {
                let mut run_cfg = cfg.clone();
                run_cfg.dt = dt;
                run_cfg.solver.preconditioner = pc;
                run_cfg.solver.mode = mode;
                match run_from(&run_cfg, &space, &case, w0.clone(), None) {
                    Ok((_, summary)) => rows.push(IterationRow {
                        dt,
                        preconditioner: pc,
                        mode,
                        steps: summary.steps,
                        converged: true,
                        gmres_per_dt: Some(summary.gmres_total as f64 / summary.steps as f64),
                        newton_per_dt: Some(summary.newton_total as f64 / summary.steps as f64),
                    }),
                    Err(err) if err.is_solver_failure() => rows.push(IterationRow {
                        dt,
                        preconditioner: pc,
                        mode,
                        steps: 0,
                        converged: false,
                        gmres_per_dt: None,
                        newton_per_dt: None,
                    }),
                    Err(err) => return Err(err),
                }
            }
        }
    }
    Ok(IterationStudy {
        rows,
        config_hash: cfg.hash(),
    })
}

fn precond_name(p: Preconditioner) -> &'static str {
    match p {
        Preconditioner::None => "none",
        Preconditioner::BjExt => "bj_ext",
        Preconditioner::BjExtH => "bj_ext_h",
    }
}

fn mode_name(m: SolveMode) -> &'static str {
    match m {
        SolveMode::Extended => "extended",
        SolveMode::Schur => "schur",
    }
}

pub fn write_run_csv(path: &Path, s: &RunSummary) -> Result<(), std::io::Error> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{CSV_VERSION}")?;
    let nv = s.err_per_var.as_ref().map_or(0, |v| v.len());
    let err_cols: Vec<String> = (0..nv).map(|v| format!("err_var_{v}")).collect();
    writeln!(
        f,
        "dt,t_end,steps,{},err_sum,newton_total,gmres_total,wallclock_s,config_hash",
        err_cols.join(",")
    )?;
    let errs = s
        .err_per_var
        .as_ref()
        .map(|v| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
        .unwrap_or_default();
    writeln!(
        f,
        "{},{},{},{},{},{},{},{},{}",
        s.dt,
        s.t_end,
        s.steps,
        errs,
        s.err_sum.map(|e| e.to_string()).unwrap_or_default(),
        s.newton_total,
        s.gmres_total,
        s.wallclock_s,
        s.config_hash
    )?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, study: &ConvergenceStudy) -> Result<(), std::io::Error> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{CSV_VERSION}")?;
    let nv = study.rows.first().map_or(0, |r| r.err_per_var.len());
    let err_cols: Vec<String> = (0..nv).map(|v| format!("err_var_{v}")).collect();
    writeln!(
        f,
        "dt,{},err_sum,eoc_sum,newton_total,gmres_total,config_hash",
        err_cols.join(",")
    )?;
    for r in &study.rows {
        let errs = r.err_per_var.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.dt,
            errs,
            r.err_sum,
            r.eoc_sum.map(|e| e.to_string()).unwrap_or_default(),
            r.newton_total,
            r.gmres_total,
            study.config_hash
        )?;
    }
    Ok(())
}

pub fn write_iterations_csv(path: &Path, study: &IterationStudy) -> Result<(), std::io::Error> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{CSV_VERSION}")?;
    writeln!(
        f,
        "dt,preconditioner,mode,steps,converged,gmres_per_dt,newton_per_dt,config_hash"
    )?;
    for r in &study.rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            r.dt,
            precond_name(r.preconditioner),
            mode_name(r.mode),
            r.steps,
            r.converged as u8,
            r.gmres_per_dt.map(|v| v.to_string()).unwrap_or_default(),
            r.newton_per_dt.map(|v| v.to_string()).unwrap_or_default(),
            study.config_hash
        )?;
    }
    Ok(())
}

/// Quick invariant battery; returns `(name, outcome)` per check.
pub fn selftest() -> Vec<(&'static str, Result<(), String>)> {
    use crate::dg;
    use crate::solver;
    let mut results: Vec<(&'static str, Result<(), String>)> = Vec::new();

    results.push((
        "basis quadrature and derivative exactness",
        (|| {
            for n in 0..=10usize {
                let b = build_basis(n);
                let sum: f64 = b.weights.sum();
                if (sum - 2.0).abs() > 1e-13 {
                    return Err(format!("weight sum {sum} at N={n}"));
                }
                for k in 0..=(2 * n + 1) {
                    let quad: f64 =
                        (0..=n).map(|i| b.weights[i] * b.nodes[i].powi(k as i32)).sum();
                    let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                    if (quad - exact).abs() > 1e-13 {
                        return Err(format!("monomial {k} at N={n}"));
                    }
                }
            }
            Ok(())
        })(),
    ));

    results.push((
        "tableau exactness, orders 4/6/8",
        (|| {
            for q in [4usize, 6, 8] {
                let t = tableau(q).map_err(|e| e.to_string())?;
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
                        if (lhs - rhs).abs() > 1e-13 {
                            return Err(format!("q={q} stage {l} moment {m}"));
                        }
                    }
                }
            }
            Ok(())
        })(),
    ));

    let euler_space = || -> DiscreteSpace {
        let mesh = build_cartesian_mesh(4, 4, (-1.0, 1.0, -1.0, 1.0)).unwrap();
        DiscreteSpace::new(
            mesh,
            build_basis(3),
            EquationSystem::euler(1.4, 1.0).with_velocity([0.3, 0.3]),
        )
    };

    results.push((
        "free-stream preservation",
        (|| {
            let space = euler_space();
            let w = space.interpolate(|_, _, w| {
                w[0] = 1.1;
                w[1] = 0.33;
                w[2] = -0.22;
                w[3] = 2.7;
            });
            let r1 = dg::compute_r1(&space, &w).map_err(|e| e.to_string())?;
            if r1.max_abs() > 1e-12 {
                return Err(format!("R1 on constants: {}", r1.max_abs()));
            }
            Ok(())
        })(),
    ));

    results.push((
        "global conservation of R1",
        (|| {
            let space = euler_space();
            let case = TestCase::sine(&space);
            let w = case.initial_state(&space);
            let r1 = dg::compute_r1(&space, &w).map_err(|e| e.to_string())?;
            let sums = space.integral_per_var(&r1);
            let scale = w.norm_l2();
            for s in sums {
                if s.abs() > 1e-12 * scale {
                    return Err(format!("conservation defect {s}"));
                }
            }
            Ok(())
        })(),
    ));

    results.push((
        "second-derivative operator consistency",
        (|| {
            let space = euler_space();
            let case = TestCase::sine(&space);
            let w = case.initial_state(&space);
            let r1 = dg::compute_r1(&space, &w).map_err(|e| e.to_string())?;
            let h = 1e-7 * (1.0 + w.norm_l2() / r1.norm_l2());
            let r1p = dg::compute_r1(&space, &w.add_scaled(h, &r1)).map_err(|e| e.to_string())?;
            let mut fd = r1p.sub(&r1);
            fd.scale(1.0 / h);
            let r2 = dg::compute_r2(&space, &w, &r1).map_err(|e| e.to_string())?;
            let rel = r2.sub(&fd).norm_l2() / fd.norm_l2();
            if rel > 1e-5 {
                return Err(format!("chain-rule mismatch {rel}"));
            }
            Ok(())
        })(),
    ));

    results.push((
        "matrix-free product vs exact linear product",
        (|| {
            let mesh = build_cartesian_mesh(4, 4, (-1.0, 1.0, -1.0, 1.0)).unwrap();
            let space =
                DiscreteSpace::new(mesh, build_basis(3), EquationSystem::advection([0.3, 0.3]));
            let case = TestCase::sine(&space);
            let w = case.initial_state(&space);
            let r1 = dg::compute_r1(&space, &w).map_err(|e| e.to_string())?;
            let r2 = dg::compute_r2(&space, &w, &r1).map_err(|e| e.to_string())?;
            let mut b = w.clone();
            b.axpy(0.05, &r1);
            let spec = solver::SolveSpec {
                alpha1: 0.5,
                alpha2: 1.0 / 6.0,
                dt: 0.1,
                b,
            };
            let x = crate::field::ExtendedState::new(w.clone(), r1.clone());
            let eval = solver::ResidualEval {
                g: crate::field::ExtendedState::new(NodalField::zeros_like(&w), NodalField::zeros_like(&w)),
                r1,
                r2,
                lift: None,
            };
            let dx = crate::field::ExtendedState::new(
                space.interpolate(|xc, yc, v| v[0] = (std::f64::consts::PI * xc).cos() * yc),
                space.interpolate(|xc, yc, v| v[0] = xc * yc),
            );
            let exact = solver::jvp(&space, &spec, &x, &eval, &dx, false).map_err(|e| e.to_string())?;
            let fd = solver::jvp(&space, &spec, &x, &eval, &dx, true).map_err(|e| e.to_string())?;
            let rel = (exact.w.sub(&fd.w).norm_l2().powi(2)
                + exact.sigma.sub(&fd.sigma).norm_l2().powi(2))
            .sqrt()
                / (1.0 + exact.norm_l2());
            if rel > 1e-6 {
                return Err(format!("products differ by {rel}"));
            }
            Ok(())
        })(),
    ));

    results.push((
        "preconditioner block inverse identity",
        (|| {
            let space = euler_space();
            let case = TestCase::sine(&space);
            let w = case.initial_state(&space);
            let blocks =
                solver::build_precond(&space, &w, 0.5, 1.0 / 6.0, 0.2, solver::PrecondVariant::BjExt)
                    .map_err(|e| e.to_string())?;
            let m = blocks.m;
            let k = blocks.k_block(0).clone();
            let id = nalgebra::DMatrix::<f64>::identity(m, m);
            let a = &id - (0.5 * 0.2) * &k;
            let beta = 0.5 * (1.0 / 6.0) * 0.2 * 0.2;
            let b = beta * &k;
            let c = -&k;
            let (d, e, f, g) = blocks.inverse_blocks(0);
            let tl = (&a * &d + &b * &f) - &id;
            let br = (&c * &e + &g) - &id;
            if tl.amax() > 1e-10 || br.amax() > 1e-10 {
                return Err(format!("identity defect {} / {}", tl.amax(), br.amax()));
            }
            Ok(())
        })(),
    ));

    results.push((
        "restarted GMRES vs dense solve",
        (|| {
            let n = 12;
            let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
                if i == j {
                    4.0 + i as f64
                } else {
                    0.3 / (1.0 + (i as f64 - j as f64).abs())
                }
            });
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let cfg = solver::GmresConfig {
                tol_rel: 1e-12,
                restart: 6,
                max_total: 200,
            };
            let apply = |v: &[f64]| -> Result<Vec<f64>, solver::SolverError> {
                let x = nalgebra::DVector::from_column_slice(v);
                Ok((&a * x).as_slice().to_vec())
            };
            let res = solver::gmres(apply, &rhs, None::<&fn(&[f64]) -> Vec<f64>>, &cfg)
                .map_err(|e| e.to_string())?;
            let exact = a
                .clone()
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(&rhs))
                .ok_or("dense solve failed")?;
            for (x, y) in res.x.iter().zip(exact.iter()) {
                if (x - y).abs() > 1e-8 {
                    return Err(format!("{x} vs {y}"));
                }
            }
            Ok(())
        })(),
    ));

    results
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_advection_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.system = SystemKind::Advection;
        cfg.nx = 4;
        cfg.ny = 4;
        cfg.degree = 3;
        cfg.q = 4;
        cfg.kmax = 0;
        cfg.dt = 0.1;
        cfg.t_end = 0.2;
        cfg
    }

    #[test]
    fn final_step_is_clipped() {
        let mut cfg = small_advection_cfg();
        cfg.dt = 0.3;
        cfg.t_end = 0.8;
        let (_, summary) = run(&cfg).unwrap();
        assert_eq!(summary.steps, 3); // 0.3 + 0.3 + 0.2
    }

    #[test]
    fn zero_velocity_keeps_initial_state() {
        let mut cfg = small_advection_cfg();
        cfg.a = [0.0, 0.0];
        let space = build_space(&cfg).unwrap();
        let case = TestCase::sine(&space);
        let w0 = case.initial_state(&space);
        let (w, summary) = run(&cfg).unwrap();
        assert!(w.sub(&w0).max_abs() < 1e-12);
        assert_eq!(summary.newton_total, 0);
    }

    #[test]
    fn degenerate_sweep_has_empty_eoc() {
        let mut cfg = small_advection_cfg();
        cfg.dt_list = vec![0.1];
        let study = convergence_study(&cfg).unwrap();
        assert_eq!(study.rows.len(), 1);
        assert!(study.rows[0].eoc_sum.is_none());
    }

    #[test]
    fn convergence_rows_track_dt_list() {
        // resolved enough in space that the timestep error dominates
        let mut cfg = small_advection_cfg();
        cfg.nx = 8;
        cfg.ny = 8;
        cfg.degree = 5;
        cfg.t_end = 0.8;
        cfg.dt_list = vec![0.4, 0.2];
        let study = convergence_study(&cfg).unwrap();
        assert_eq!(study.rows.len(), 2);
        assert!(study.rows[1].eoc_sum.is_some());
        assert!(study.rows[0].err_sum > study.rows[1].err_sum);
    }

    #[test]
    fn csv_files_round_trip_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_advection_cfg();
        cfg.dt_list = vec![0.2, 0.1];
        let study = convergence_study(&cfg).unwrap();
        let path = dir.path().join("convergence.csv");
        write_convergence_csv(&path, &study).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_VERSION);
        assert!(lines.next().unwrap().starts_with("dt,err_var_0"));
        assert_eq!(lines.count(), 2);
        // deterministic output for a fixed config
        let study2 = convergence_study(&cfg).unwrap();
        let path2 = dir.path().join("convergence2.csv");
        write_convergence_csv(&path2, &study2).unwrap();
        assert_eq!(text, std::fs::read_to_string(&path2).unwrap());
    }

    #[test]
    fn iteration_rows_cover_the_grid() {
        let mut cfg = small_advection_cfg();
        cfg.dt_list = vec![0.2, 0.1];
        cfg.precond_list = vec![Preconditioner::None, Preconditioner::BjExt];
        let study = iteration_study(&cfg).unwrap();
        assert_eq!(study.rows.len(), 4);
        assert!(study.rows.iter().all(|r| r.converged));
    }

    #[test]
    fn selftest_passes() {
        for (name, outcome) in selftest() {
            assert!(outcome.is_ok(), "{name}: {:?}", outcome.err());
        }
    }
}
