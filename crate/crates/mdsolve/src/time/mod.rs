//! Time integration: the implicit two-derivative predictor-corrector
//! stepper and an explicit RK4 reference integrator.

mod tableau;

pub use tableau::{stage_quadrature, tableau, ButcherTableau, UnsupportedOrder};

use crate::dg::{self, DiscreteSpace};
use crate::field::{ExtendedState, NodalField};
use crate::solver::{
    build_precond, stage_solve, PrecondBlocks, RebuildPolicy, SolveSpec, SolverConfig,
    SolverError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimeError {
    #[error(transparent)]
    Tableau(#[from] UnsupportedOrder),
    #[error("stage (sweep {sweep}, stage {stage}) failed: {source}")]
    StageSolve {
        sweep: usize,
        stage: usize,
        source: SolverError,
    },
    #[error(transparent)]
    Operator(#[from] dg::OperatorError),
    #[error("solution blew up (non-finite values) during explicit step")]
    BlowUp,
}

/// Scheme parameters of one predictor-corrector step.
#[derive(Debug, Clone)]
pub struct HbpcConfig {
    /// Quadrature order, 4, 6 or 8.
    pub q: usize,
    /// Number of correction sweeps.
    pub k_max: usize,
    pub dt: f64,
}

/// Per-step solver effort.
#[derive(Debug, Clone, Default)]
pub struct StepDiagnostics {
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    /// `(newton, gmres)` per implicit stage solve, in execution order.
    pub per_stage: Vec<(usize, usize)>,
}

/// Stage values of the current sweep with their cached operator
/// evaluations. The first stage always holds the accepted solution at the
/// beginning of the step.
pub struct StageStore {
    pub stages: Vec<NodalField>,
    pub r1: Vec<NodalField>,
    pub r2: Vec<NodalField>,
}

impl StageStore {
    fn initialize(space: &DiscreteSpace, s: usize, w: &NodalField) -> Result<Self, TimeError> {
        let r1 = dg::compute_r1(space, w)?;
        let r2 = dg::compute_r2(space, w, &r1)?;
        Ok(Self {
            stages: vec![w.clone(); s],
            r1: vec![r1; s],
            r2: vec![r2; s],
        })
    }

    fn refresh(&mut self, space: &DiscreteSpace, l: usize, w: NodalField) -> Result<(), TimeError> {
        let r1 = dg::compute_r1(space, &w)?;
        let r2 = dg::compute_r2(space, &w, &r1)?;
        self.stages[l] = w;
        self.r1[l] = r1;
        self.r2[l] = r2;
        Ok(())
    }
}

/// Caches preconditioner blocks per `(alpha1, alpha2)` pair within one
/// step, for the timestep-level rebuild policy.
struct StepPrecondCache {
    entries: Vec<((f64, f64), PrecondBlocks)>,
}

impl StepPrecondCache {
    fn new() -> Self {
        Self { entries: Vec::new() }
    }

    fn get_or_build(
        &mut self,
        space: &DiscreteSpace,
        cfg: &SolverConfig,
        w: &NodalField,
        alpha1: f64,
        alpha2: f64,
        dt: f64,
    ) -> Result<Option<&PrecondBlocks>, SolverError> {
        let variant = match cfg.preconditioner {
            crate::solver::Preconditioner::None => return Ok(None),
            crate::solver::Preconditioner::BjExt => crate::solver::PrecondVariant::BjExt,
            crate::solver::Preconditioner::BjExtH => crate::solver::PrecondVariant::BjExtH,
        };
        if cfg.precond_rebuild != RebuildPolicy::EachTimestep {
            return Ok(None);
        }
        let key = (alpha1, alpha2);
        if let Some(idx) = self.entries.iter().position(|(k, _)| *k == key) {
            return Ok(Some(&self.entries[idx].1));
        }
        let blocks = build_precond(space, w, alpha1, alpha2, dt, variant)?;
        self.entries.push((key, blocks));
        Ok(Some(&self.entries.last().unwrap().1))
    }
}

/// Advance one step with the predictor-corrector scheme: an implicit
/// fourth-order two-point predictor swept through the stages, then
/// `k_max` correction sweeps toward the order-`q` quadrature. The
/// accepted solution is the last stage of the final sweep (first same as
/// last).
pub fn hbpc_advance(
    space: &DiscreteSpace,
    config: &HbpcConfig,
    tab: &ButcherTableau,
    solver_cfg: &SolverConfig,
    w_n: &NodalField,
) -> Result<(NodalField, StepDiagnostics), TimeError> {
    let s = tab.s;
    let dt = config.dt;
    let mut diag = StepDiagnostics::default();
    let mut store = StageStore::initialize(space, s, w_n)?;
    let mut precond_cache = StepPrecondCache::new();

    // predictor sweep: cascaded two-point fourth-order solves
    for l in 1..s {
        let dc = tab.c[l] - tab.c[l - 1];
        let alpha1 = dc / 2.0;
        let alpha2 = dc * dc / 6.0;
        let mut b = store.stages[l - 1].clone();
        b.axpy(alpha1 * dt, &store.r1[l - 1]);
        b.axpy(0.5 * alpha2 * dt * dt, &store.r2[l - 1]);
        let spec = SolveSpec {
            alpha1,
            alpha2,
            dt,
            b,
        };
        let x0 = ExtendedState::new(store.stages[l - 1].clone(), store.r1[l - 1].clone());
        let prebuilt = precond_cache
            .get_or_build(space, solver_cfg, w_n, alpha1, alpha2, dt)
            .map_err(|source| TimeError::StageSolve { sweep: 0, stage: l, source })?;
        let (x, sd) = stage_solve(space, &spec, solver_cfg, x0, prebuilt)
            .map_err(|source| TimeError::StageSolve { sweep: 0, stage: l, source })?;
        diag.newton_iterations += sd.newton_iterations;
        diag.gmres_iterations += sd.gmres_iterations;
        diag.per_stage.push((sd.newton_iterations, sd.gmres_iterations));
        store.refresh(space, l, x.w)?;
    }

    // correction sweeps toward the order-q quadrature
    for sweep in 1..=config.k_max {
        // all right-hand sides use the previous sweep's stage data
        let mut rhs = Vec::with_capacity(s - 1);
        for l in 1..s {
            let mut b = stage_quadrature(tab, dt, &store.r1, &store.r2, l);
            b.axpy(1.0, w_n);
            b.axpy(-dt, &store.r1[l]);
            b.axpy(0.5 * dt * dt, &store.r2[l]);
            rhs.push(b);
        }
        let mut new_stages = Vec::with_capacity(s - 1);
        for l in 1..s {
            let spec = SolveSpec {
                alpha1: 1.0,
                alpha2: 1.0,
                dt,
                b: rhs[l - 1].clone(),
            };
            let x0 = ExtendedState::new(store.stages[l].clone(), store.r1[l].clone());
            let prebuilt = precond_cache
                .get_or_build(space, solver_cfg, w_n, 1.0, 1.0, dt)
                .map_err(|source| TimeError::StageSolve { sweep, stage: l, source })?;
            let (x, sd) = stage_solve(space, &spec, solver_cfg, x0, prebuilt)
                .map_err(|source| TimeError::StageSolve { sweep, stage: l, source })?;
            diag.newton_iterations += sd.newton_iterations;
            diag.gmres_iterations += sd.gmres_iterations;
            diag.per_stage.push((sd.newton_iterations, sd.gmres_iterations));
            new_stages.push(x.w);
        }
        for (l, w) in new_stages.into_iter().enumerate() {
            store.refresh(space, l + 1, w)?;
        }
    }

    Ok((store.stages[s - 1].clone(), diag))
}

/// Classical four-stage fourth-order explicit step of `w_t = R1(w)`.
pub fn rk4_reference_advance(
    space: &DiscreteSpace,
    dt: f64,
    w: &NodalField,
) -> Result<NodalField, TimeError> {
    let k1 = dg::compute_r1(space, w)?;
    let k2 = dg::compute_r1(space, &w.add_scaled(0.5 * dt, &k1))?;
    let k3 = dg::compute_r1(space, &w.add_scaled(0.5 * dt, &k2))?;
    let k4 = dg::compute_r1(space, &w.add_scaled(dt, &k3))?;
    let mut out = w.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    if !out.is_finite() {
        return Err(TimeError::BlowUp);
    }
    Ok(out)
}
