//! Newton-Krylov solution of the implicit stage equations.
//!
//! Each implicit stage solves `g(W) = b` with
//! `g(W) = W - alpha1 dt R1(W) + (alpha2 dt^2 / 2) R2(W, sigma)` over the
//! extended unknown `X = (W, sigma)`, the auxiliary variable constrained
//! by `sigma = R1(W)`. Newton corrections come from restarted GMRES with
//! right preconditioning and matrix-free Jacobian actions; alternatively
//! the sigma block is eliminated with a Schur complement and only a
//! state-sized system is solved per Newton step.

mod gmres;
mod jvp;
mod precond;

pub use gmres::{gmres, GmresConfig, GmresResult};
pub use jvp::{fd_step, jvp};
pub use precond::{
    build_precond, element_block_hessian, element_block_jacobian, PrecondBlocks, PrecondVariant,
};

use crate::dg::{self, DiscreteSpace, Lifting, OperatorError};
use crate::equations::EquationKind;
use crate::field::{ExtendedState, NodalField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("GMRES did not converge within {iterations} iterations (relative residual {residual:.3e})")]
    GmresMaxIterations { iterations: usize, residual: f64 },
    #[error("Newton did not converge within {iterations} iterations (residual history {history:?})")]
    NewtonMaxIterations { iterations: usize, history: Vec<f64> },
    #[error("non-finite values in {context}")]
    NonFinite { context: &'static str },
    #[error("singular preconditioner core block for element {element} at dt={dt}")]
    SingularBlock { element: usize, dt: f64 },
}

/// Preconditioner selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    BjExt,
    BjExtH,
}

/// Linear-system formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// The full extended system in `(dW, dsigma)`.
    Extended,
    /// Schur complement in `dW` with explicit `dsigma` recovery.
    Schur,
}

/// When the preconditioner blocks are refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebuildPolicy {
    EachNewton,
    EachTimestep,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tol_newton_rel: f64,
    /// Absolute Newton criterion on `||dW||`, also the residual floor
    /// below which the initial guess is accepted unchanged.
    pub tol_newton_abs: f64,
    pub max_newton: usize,
    pub tol_gmres_rel: f64,
    pub gmres_restart: usize,
    pub max_krylov_total: usize,
    pub preconditioner: Preconditioner,
    pub mode: SolveMode,
    pub precond_rebuild: RebuildPolicy,
    /// Use the finite-difference product even for linear equations.
    pub force_fd_jvp: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_newton_rel: 1e-8,
            tol_newton_abs: 1e-12,
            max_newton: 50,
            tol_gmres_rel: 1e-3,
            gmres_restart: 700,
            max_krylov_total: 7000,
            preconditioner: Preconditioner::BjExt,
            mode: SolveMode::Extended,
            precond_rebuild: RebuildPolicy::EachNewton,
            force_fd_jvp: false,
        }
    }
}

impl SolverConfig {
    fn gmres_config(&self) -> GmresConfig {
        GmresConfig {
            tol_rel: self.tol_gmres_rel,
            restart: self.gmres_restart,
            max_total: self.max_krylov_total,
        }
    }

    fn precond_variant(&self) -> Option<PrecondVariant> {
        match self.preconditioner {
            Preconditioner::None => None,
            Preconditioner::BjExt => Some(PrecondVariant::BjExt),
            Preconditioner::BjExtH => Some(PrecondVariant::BjExtH),
        }
    }
}

/// One implicit stage equation in generalized form.
#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub dt: f64,
    pub b: NodalField,
}

/// Residual together with the operator evaluations it required; the
/// caches feed the matrix-free products.
pub struct ResidualEval {
    pub g: ExtendedState,
    pub r1: NodalField,
    pub r2: NodalField,
    pub lift: Option<Lifting>,
}

pub(crate) fn residual_eval(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    x: &ExtendedState,
) -> Result<ResidualEval, SolverError> {
    let lift = if space.equation.kind == EquationKind::NavierStokes {
        Some(dg::compute_lifting(space, &x.w)?)
    } else {
        None
    };
    let r1 = dg::compute_r1_with_lifting(space, &x.w, lift.as_ref())?;
    let r2 = dg::compute_r2_with_lifting(space, &x.w, &x.sigma, lift.as_ref())?;
    let mut g1 = x.w.clone();
    g1.axpy(-spec.alpha1 * spec.dt, &r1);
    g1.axpy(0.5 * spec.alpha2 * spec.dt * spec.dt, &r2);
    g1.axpy(-1.0, &spec.b);
    let mut g2 = x.sigma.clone();
    g2.axpy(-1.0, &r1);
    Ok(ResidualEval {
        g: ExtendedState::new(g1, g2),
        r1,
        r2,
        lift,
    })
}

/// Residual of the extended stage equations, `(g(W) - b, sigma - R1(W))`.
pub fn residual(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    x: &ExtendedState,
) -> Result<ExtendedState, SolverError> {
    Ok(residual_eval(space, spec, x)?.g)
}

/// Iteration counts and residual history of one stage solve.
#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub residual_history: Vec<f64>,
}

/// Newton's method on the extended system. `prebuilt` supplies reusable
/// preconditioner blocks under the `EachTimestep` rebuild policy.
pub fn newton_solve(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    cfg: &SolverConfig,
    x0: ExtendedState,
    prebuilt: Option<&PrecondBlocks>,
) -> Result<(ExtendedState, SolveDiagnostics), SolverError> {
    let mut x = x0;
    let mut diag = SolveDiagnostics::default();
    let mut eval = residual_eval(space, spec, &x)?;
    let g0 = eval.g.norm_l2();
    diag.residual_history.push(g0);
    if g0 <= cfg.tol_newton_abs {
        return Ok((x, diag));
    }
    let gmres_cfg = cfg.gmres_config();

    for _ in 0..cfg.max_newton {
        let owned_blocks: Option<PrecondBlocks> =
            match (cfg.precond_variant(), cfg.precond_rebuild) {
                (None, _) => None,
                (Some(_), RebuildPolicy::EachTimestep) if prebuilt.is_some() => None,
                (Some(variant), _) => Some(build_precond(
                    space, &x.w, spec.alpha1, spec.alpha2, spec.dt, variant,
                )?),
            };
        let blocks = owned_blocks.as_ref().or(match cfg.precond_variant() {
            Some(_) => prebuilt,
            None => None,
        });

        let rhs: Vec<f64> = eval.g.to_vec().iter().map(|v| -v).collect();
        let apply = |v: &[f64]| -> Result<Vec<f64>, SolverError> {
            let dx = ExtendedState::from_vec(&x, v);
            Ok(jvp(space, spec, &x, &eval, &dx, cfg.force_fd_jvp)?.to_vec())
        };
        let result = match blocks {
            Some(bl) => {
                let p = |v: &[f64]| bl.apply(v);
                gmres(apply, &rhs, Some(&p), &gmres_cfg)?
            }
            None => gmres(apply, &rhs, None::<&fn(&[f64]) -> Vec<f64>>, &gmres_cfg)?,
        };
        diag.gmres_iterations += result.iterations;
        diag.newton_iterations += 1;

        let dx = ExtendedState::from_vec(&x, &result.x);
        x.axpy(1.0, &dx);
        eval = residual_eval(space, spec, &x)?;
        let g = eval.g.norm_l2();
        diag.residual_history.push(g);
        if g <= cfg.tol_newton_rel * g0 || dx.w.norm_l2() <= cfg.tol_newton_abs {
            return Ok((x, diag));
        }
    }
    Err(SolverError::NewtonMaxIterations {
        iterations: diag.newton_iterations,
        history: diag.residual_history,
    })
}

/// Newton's method with the sigma block eliminated: each step solves the
/// Schur-complement system for `dW` and recovers `dsigma` explicitly.
pub fn schur_solve(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    cfg: &SolverConfig,
    x0: ExtendedState,
    prebuilt: Option<&PrecondBlocks>,
) -> Result<(ExtendedState, SolveDiagnostics), SolverError> {
    let mut x = x0;
    let mut diag = SolveDiagnostics::default();
    let mut eval = residual_eval(space, spec, &x)?;
    let g0 = eval.g.norm_l2();
    diag.residual_history.push(g0);
    if g0 <= cfg.tol_newton_abs {
        return Ok((x, diag));
    }
    let gmres_cfg = cfg.gmres_config();
    let half_a2dt2 = 0.5 * spec.alpha2 * spec.dt * spec.dt;
    let a1dt = spec.alpha1 * spec.dt;
    let linear = space.equation.is_linear() && !cfg.force_fd_jvp;

    for _ in 0..cfg.max_newton {
        let owned_blocks: Option<PrecondBlocks> =
            match (cfg.precond_variant(), cfg.precond_rebuild) {
                (None, _) => None,
                (Some(_), RebuildPolicy::EachTimestep) if prebuilt.is_some() => None,
                (Some(_), _) => Some(build_precond(
                    space,
                    &x.w,
                    spec.alpha1,
                    spec.alpha2,
                    spec.dt,
                    PrecondVariant::BjExt,
                )?),
            };
        let blocks = owned_blocks.as_ref().or(match cfg.precond_variant() {
            Some(_) => prebuilt,
            None => None,
        });

        // matrix-free action of dR1/dW at x
        let k_action = |v: &NodalField| -> Result<NodalField, SolverError> {
            if linear {
                Ok(dg::compute_r1(space, v)?)
            } else {
                let vnorm = v.norm_l2();
                if vnorm == 0.0 {
                    return Ok(NodalField::zeros_like(v));
                }
                let eps = fd_step(space.equation.epsilon, vnorm);
                let wp = x.w.add_scaled(eps, v);
                let r1p = dg::compute_r1(space, &wp)?;
                let mut q = r1p.sub(&eval.r1);
                q.scale(1.0 / eps);
                Ok(q)
            }
        };
        // Hessian action (d R2 / d W at fixed sigma); zero for linear flux
        let h_action = |v: &NodalField| -> Result<Option<NodalField>, SolverError> {
            if linear {
                return Ok(None);
            }
            let vnorm = v.norm_l2();
            if vnorm == 0.0 {
                return Ok(None);
            }
            let eps = fd_step(space.equation.epsilon, vnorm);
            let wp = x.w.add_scaled(eps, v);
            let r2p = dg::compute_r2(space, &wp, &x.sigma)?;
            let mut q = r2p.sub(&eval.r2);
            q.scale(1.0 / eps);
            Ok(Some(q))
        };

        // rhs = -G1 + beta (dR2/dsigma) G2; the sigma derivative is exact
        // because R2 is linear in sigma
        let r2_g2 = dg::compute_r2_with_lifting(space, &x.w, &eval.g.sigma, eval.lift.as_ref())?;
        let mut rhs_field = eval.g.w.clone();
        rhs_field.scale(-1.0);
        rhs_field.axpy(half_a2dt2, &r2_g2);
        let rhs = rhs_field.as_slice().to_vec();

        let template = x.w.clone();
        let apply = |v: &[f64]| -> Result<Vec<f64>, SolverError> {
            let mut vf = NodalField::zeros_like(&template);
            vf.as_slice_mut().copy_from_slice(v);
            let kv = k_action(&vf)?;
            let kkv = k_action(&kv)?;
            let hv = h_action(&vf)?;
            let mut out = vf;
            out.axpy(-a1dt, &kv);
            out.axpy(half_a2dt2, &kkv);
            if let Some(h) = hv {
                out.axpy(half_a2dt2, &h);
            }
            if !out.is_finite() {
                return Err(SolverError::NonFinite {
                    context: "Schur matrix-vector product",
                });
            }
            Ok(out.as_slice().to_vec())
        };

        let result = match blocks {
            Some(bl) => {
                let p = |v: &[f64]| bl.apply_core(v);
                gmres(apply, &rhs, Some(&p), &gmres_cfg)?
            }
            None => gmres(apply, &rhs, None::<&fn(&[f64]) -> Vec<f64>>, &gmres_cfg)?,
        };
        diag.gmres_iterations += result.iterations;
        diag.newton_iterations += 1;

        let mut dw = NodalField::zeros_like(&x.w);
        dw.as_slice_mut().copy_from_slice(&result.x);
        // dsigma = -G2 + K dW
        let k_dw = k_action(&dw)?;
        let mut dsigma = eval.g.sigma.clone();
        dsigma.scale(-1.0);
        dsigma.axpy(1.0, &k_dw);

        x.w.axpy(1.0, &dw);
        x.sigma.axpy(1.0, &dsigma);
        eval = residual_eval(space, spec, &x)?;
        let g = eval.g.norm_l2();
        diag.residual_history.push(g);
        if g <= cfg.tol_newton_rel * g0 || dw.norm_l2() <= cfg.tol_newton_abs {
            return Ok((x, diag));
        }
    }
    Err(SolverError::NewtonMaxIterations {
        iterations: diag.newton_iterations,
        history: diag.residual_history,
    })
}

/// Solve one implicit stage with the configured formulation.
pub fn stage_solve(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    cfg: &SolverConfig,
    x0: ExtendedState,
    prebuilt: Option<&PrecondBlocks>,
) -> Result<(ExtendedState, SolveDiagnostics), SolverError> {
    match cfg.mode {
        SolveMode::Extended => newton_solve(space, spec, cfg, x0, prebuilt),
        SolveMode::Schur => schur_solve(space, spec, cfg, x0, prebuilt),
    }
}
