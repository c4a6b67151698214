//! Extended block-Jacobi preconditioners.
//!
//! Per element, with `K_i` the element-local Jacobian of the first
//! spatial operator and `beta = alpha2 dt^2 / 2`, the preconditioner is
//! the 2x2 block matrix `P_i = [[A_i, beta K_i], [-K_i, I]]` where
//! `A_i = I - alpha1 dt K_i` (optionally plus `beta H_i`, the element
//! Hessian block). Its inverse needs one dense LU factorization of the
//! element-sized core `A_i + beta K_i^2`; storing that inverse `M_i`
//! together with `K_i` is enough to apply all four inverse blocks:
//! `top = M_i (W - beta K_i sigma)`, `bottom = K_i top + sigma`.

use super::SolverError;
use crate::dg::{self, DiscreteSpace, LocalContext};
use crate::field::NodalField;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondVariant {
    /// Hessian-free blocks.
    BjExt,
    /// Blocks including the element Hessian of the second operator.
    BjExtH,
}

/// Per-element dense blocks realizing the preconditioner inverse.
pub struct PrecondBlocks {
    pub variant: PrecondVariant,
    pub alpha1: f64,
    pub alpha2: f64,
    pub dt: f64,
    /// Element DOF count `m = (n+1)^2 n_var`.
    pub m: usize,
    /// Core inverses `M_i = (A_i + beta K_i^2)^{-1}`.
    core_inv: Vec<DMatrix<f64>>,
    /// Element Jacobians `K_i`.
    k: Vec<DMatrix<f64>>,
}

/// Element-local Jacobian of the first spatial operator by one-sided
/// finite differences with neighbor traces frozen.
pub fn element_block_jacobian(
    space: &DiscreteSpace,
    ctx: &LocalContext,
    w: &NodalField,
    element: usize,
) -> Result<DMatrix<f64>, SolverError> {
    fd_block(space, w, element, |wl, out| ctx.eval_r1(space, element, wl, out))
}

/// Element-local Hessian block: the Jacobian of the second spatial
/// operator in the state at fixed `sigma`, neighbor traces frozen.
pub fn element_block_hessian(
    space: &DiscreteSpace,
    ctx: &LocalContext,
    w: &NodalField,
    element: usize,
) -> Result<DMatrix<f64>, SolverError> {
    fd_block(space, w, element, |wl, out| ctx.eval_r2(space, element, wl, out))
}

fn fd_block(
    space: &DiscreteSpace,
    w: &NodalField,
    element: usize,
    eval: impl Fn(&[f64], &mut [f64]) -> Result<(), dg::OperatorError>,
) -> Result<DMatrix<f64>, SolverError> {
    let m = space.element_dof();
    let mut w_local = w.element(element).to_owned().into_raw_vec_and_offset().0;
    let mut base = vec![0.0; m];
    eval(&w_local, &mut base)?;
    let mut out = vec![0.0; m];
    let mut block = DMatrix::<f64>::zeros(m, m);
    for col in 0..m {
        let orig = w_local[col];
        let h = f64::EPSILON.sqrt() * (1.0 + orig.abs());
        w_local[col] = orig + h;
        eval(&w_local, &mut out)?;
        w_local[col] = orig;
        for (row, (o, b)) in out.iter().zip(&base).enumerate() {
            block[(row, col)] = (o - b) / h;
        }
    }
    Ok(block)
}

/// Build the per-element preconditioner blocks at the state `w`.
pub fn build_precond(
    space: &DiscreteSpace,
    w: &NodalField,
    alpha1: f64,
    alpha2: f64,
    dt: f64,
    variant: PrecondVariant,
) -> Result<PrecondBlocks, SolverError> {
    let ne = space.mesh.n_elements();
    let m = space.element_dof();
    let beta = 0.5 * alpha2 * dt * dt;

    let r1_ctx = LocalContext::for_r1(space, w)?;
    let r2_ctx = if variant == PrecondVariant::BjExtH {
        let sigma = dg::compute_r1(space, w)?;
        Some(LocalContext::for_r2(space, w, &sigma)?)
    } else {
        None
    };

    let results: Vec<Result<(DMatrix<f64>, DMatrix<f64>), SolverError>> = (0..ne)
        .into_par_iter()
        .map(|e| {
            let k = element_block_jacobian(space, &r1_ctx, w, e)?;
            // core = I - alpha1 dt K + beta (K^2 [+ H])
            let mut core = beta * (&k * &k) - (alpha1 * dt) * &k;
            if let Some(ctx2) = &r2_ctx {
                let h = element_block_hessian(space, ctx2, w, e)?;
                core += beta * h;
            }
            for i in 0..m {
                core[(i, i)] += 1.0;
            }
            let inv = core.lu().try_inverse().ok_or(SolverError::SingularBlock {
                element: e,
                dt,
            })?;
            Ok((inv, k))
        })
        .collect();

    let mut core_inv = Vec::with_capacity(ne);
    let mut k = Vec::with_capacity(ne);
    for r in results {
        let (inv, ke) = r?;
        core_inv.push(inv);
        k.push(ke);
    }
    Ok(PrecondBlocks {
        variant,
        alpha1,
        alpha2,
        dt,
        m,
        core_inv,
        k,
    })
}

impl PrecondBlocks {
    pub fn n_elements(&self) -> usize {
        self.k.len()
    }

    #[inline]
    fn beta(&self) -> f64 {
        0.5 * self.alpha2 * self.dt * self.dt
    }

    /// Apply the inverse to a flat extended vector `[w..., sigma...]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let ne = self.n_elements();
        let m = self.m;
        let n = ne * m;
        debug_assert_eq!(x.len(), 2 * n);
        let beta = self.beta();
        let mut out = vec![0.0; 2 * n];
        let (out_w, out_s) = out.split_at_mut(n);
        out_w
            .par_chunks_mut(m)
            .zip(out_s.par_chunks_mut(m))
            .enumerate()
            .for_each(|(e, (ow, os))| {
                let we = DVector::from_column_slice(&x[e * m..(e + 1) * m]);
                let se = DVector::from_column_slice(&x[n + e * m..n + (e + 1) * m]);
                let t = &we - beta * (&self.k[e] * &se);
                let top = &self.core_inv[e] * t;
                let bottom = &self.k[e] * &top + se;
                ow.copy_from_slice(top.as_slice());
                os.copy_from_slice(bottom.as_slice());
            });
        out
    }

    /// Apply only the core inverse blocks to a state-sized vector (the
    /// Schur-complement preconditioner).
    pub fn apply_core(&self, x: &[f64]) -> Vec<f64> {
        let ne = self.n_elements();
        let m = self.m;
        debug_assert_eq!(x.len(), ne * m);
        let mut out = vec![0.0; ne * m];
        out.par_chunks_mut(m).enumerate().for_each(|(e, oe)| {
            let xe = DVector::from_column_slice(&x[e * m..(e + 1) * m]);
            let top = &self.core_inv[e] * xe;
            oe.copy_from_slice(top.as_slice());
        });
        out
    }

    /// The four inverse blocks of one element, for verification.
    pub fn inverse_blocks(
        &self,
        e: usize,
    ) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let m = self.m;
        let beta = self.beta();
        let id = DMatrix::<f64>::identity(m, m);
        let d = self.core_inv[e].clone();
        let eb = -beta * (&d * &self.k[e]);
        let f = &self.k[e] * &d;
        let g = &id - beta * (&self.k[e] * (&d * &self.k[e]));
        (d, eb, f, g)
    }

    /// The element Jacobian block.
    pub fn k_block(&self, e: usize) -> &DMatrix<f64> {
        &self.k[e]
    }
}
