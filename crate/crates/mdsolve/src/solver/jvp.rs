//! Matrix-free Jacobian-vector products for the extended system.
//!
//! The nonlinear path approximates the system-matrix action by one-sided
//! finite differences of the spatial operators, with the step
//! `eps_fd = sqrt(eps_machine) / (eps * ||increment||)` scaled by the
//! reference Mach number. For a linear flux the product is formed exactly
//! from two operator evaluations.

use super::{ResidualEval, SolveSpec, SolverError};
use crate::dg::{self, DiscreteSpace};
use crate::field::{ExtendedState, NodalField};

/// Finite-difference step for an increment of the given norm.
#[inline]
pub fn fd_step(epsilon: f64, increment_norm: f64) -> f64 {
    f64::EPSILON.sqrt() / (epsilon * increment_norm)
}

/// Action of the extended system matrix on `dx` at the state `x`, using
/// the cached operator evaluations from the residual.
///
/// `force_fd` selects the finite-difference path even for linear
/// equations.
pub fn jvp(
    space: &DiscreteSpace,
    spec: &SolveSpec,
    x: &ExtendedState,
    cache: &ResidualEval,
    dx: &ExtendedState,
    force_fd: bool,
) -> Result<ExtendedState, SolverError> {
    let half_a2dt2 = 0.5 * spec.alpha2 * spec.dt * spec.dt;
    let a1dt = spec.alpha1 * spec.dt;

    let out = if space.equation.is_linear() && !force_fd {
        // exact product for a linear flux: the Hessian block vanishes and
        // dR2/dsigma equals R1
        let r1_dw = dg::compute_r1(space, &dx.w)?;
        let r1_ds = dg::compute_r1(space, &dx.sigma)?;
        let mut top = dx.w.clone();
        top.axpy(-a1dt, &r1_dw);
        top.axpy(half_a2dt2, &r1_ds);
        let mut bottom = dx.sigma.clone();
        bottom.axpy(-1.0, &r1_dw);
        ExtendedState::new(top, bottom)
    } else {
        let dw_norm = dx.w.norm_l2();
        let ds_norm = dx.sigma.norm_l2();

        // W-direction quotients
        let (r1_quot, r2_quot_w) = if dw_norm == 0.0 {
            (NodalField::zeros_like(&dx.w), NodalField::zeros_like(&dx.w))
        } else {
            let eps = fd_step(space.equation.epsilon, dw_norm);
            let wp = x.w.add_scaled(eps, &dx.w);
            let r1p = dg::compute_r1(space, &wp)?;
            let r2p = dg::compute_r2(space, &wp, &x.sigma)?;
            let mut q1 = r1p.sub(&cache.r1);
            q1.scale(1.0 / eps);
            let mut q2 = r2p.sub(&cache.r2);
            q2.scale(1.0 / eps);
            (q1, q2)
        };
        // sigma-direction quotient; the lifting of W is unchanged here
        let r2_quot_s = if ds_norm == 0.0 {
            NodalField::zeros_like(&dx.sigma)
        } else {
            let eps = fd_step(space.equation.epsilon, ds_norm);
            let sp = x.sigma.add_scaled(eps, &dx.sigma);
            let r2p = dg::compute_r2_with_lifting(space, &x.w, &sp, cache.lift.as_ref())?;
            let mut q = r2p.sub(&cache.r2);
            q.scale(1.0 / eps);
            q
        };

        let mut top = dx.w.clone();
        top.axpy(-a1dt, &r1_quot);
        top.axpy(half_a2dt2, &r2_quot_w);
        top.axpy(half_a2dt2, &r2_quot_s);
        let mut bottom = dx.sigma.clone();
        bottom.axpy(-1.0, &r1_quot);
        ExtendedState::new(top, bottom)
    };

    if !out.is_finite() {
        return Err(SolverError::NonFinite {
            context: "jacobian-vector product",
        });
    }
    Ok(out)
}
