//! Element-local operator evaluations with frozen neighbor traces.
//!
//! The block preconditioners need the element-restricted Jacobians of the
//! spatial operators. Those are obtained by finite differences of a local
//! evaluation in which only the element's own degrees of freedom vary: the
//! neighbor face data are captured once from the global state. A face
//! whose periodic neighbor is the element itself is re-derived from the
//! local data on every evaluation, so the single-element mesh keeps its
//! exact free-stream block.
//!
//! All local buffers are flat slices in the element layout `[i, j, v]`
//! (face data `[face, k, v]`); these evaluations run `m` times per element
//! per preconditioner build.

use super::lifting::Lifting;
use super::{compute_eta, compute_lifting, compute_traces, trace_offset, DiscreteSpace, OperatorError};
use crate::equations::{EquationKind, N_GRAD};
use crate::field::NodalField;
use crate::mesh::Face;
use ndarray::Array4;

/// Frozen global data for element-local operator evaluations.
pub struct LocalContext {
    w_traces: Array4<f64>,
    /// Navier-Stokes: gradient variables at the faces.
    u_traces: Option<Array4<f64>>,
    /// Navier-Stokes: viscous flux (x, y) at the faces from the base state.
    fv_face: Option<(Array4<f64>, Array4<f64>)>,
    /// Second-derivative data: the fixed sigma field and its traces.
    sigma: Option<NodalField>,
    sigma_traces: Option<Array4<f64>>,
    /// Navier-Stokes: linearized gradient variables at the faces.
    u_lin_traces: Option<Array4<f64>>,
    /// Navier-Stokes: linearized viscous flux (x, y) at the faces.
    fv_lin_face: Option<(Array4<f64>, Array4<f64>)>,
}

/// Line-wise face traces of one element's nodal values, written into
/// `out` with layout `[face, k, v]`.
fn element_traces(space: &DiscreteSpace, nv: usize, w: &[f64], out: &mut [f64]) {
    let np = space.n_nodes();
    let row = np * nv;
    let fsz = np * nv;
    out.fill(0.0);
    let ll = space.basis.l_left.as_slice().unwrap();
    let lr = space.basis.l_right.as_slice().unwrap();
    let (west, rest) = out.split_at_mut(fsz);
    let (east, rest) = rest.split_at_mut(fsz);
    let (south, north) = rest.split_at_mut(fsz);
    for m in 0..np {
        let lm = ll[m];
        let rm = lr[m];
        let wrow = &w[m * row..(m + 1) * row];
        for ((dw, de), s) in west.iter_mut().zip(east.iter_mut()).zip(wrow) {
            *dw += s * lm;
            *de += s * rm;
        }
    }
    for k in 0..np {
        let base = k * row;
        let sk = &mut south[k * nv..(k + 1) * nv];
        let nk = &mut north[k * nv..(k + 1) * nv];
        for m in 0..np {
            let lm = ll[m];
            let rm = lr[m];
            let wkm = &w[base + m * nv..base + (m + 1) * nv];
            for v in 0..nv {
                sk[v] += wkm[v] * lm;
                nk[v] += wkm[v] * rm;
            }
        }
    }
}

/// One-element version of the BR2 lifting. `u_nb(face, k, g)` supplies the
/// neighbor-side gradient-variable trace. Returns the nodal gradients
/// (layout `[i, j, 2 N_GRAD]`) and the face traces `[face, k, 2 N_GRAD]`.
pub(crate) fn local_lifting(
    space: &DiscreteSpace,
    u: &[f64],
    u_own: &[f64],
    u_nb: impl Fn(Face, usize, usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let np = space.n_nodes();
    let basis = &space.basis;
    let eta = space.br2_eta;
    let ng = N_GRAD;
    let cdim = 2 * N_GRAD;
    let own_lift_trace: f64 = (0..np).map(|i| basis.l_right[i] * basis.lhat_right[i]).sum();
    let scale_x = 2.0 / space.mesh.dx;
    let scale_y = 2.0 / space.mesh.dy;
    let u_row = np * ng;
    let g_row = np * cdim;
    let diff = basis.diff.as_slice().unwrap();
    let ll = basis.l_left.as_slice().unwrap();
    let lr = basis.l_right.as_slice().unwrap();

    let mut grad = vec![0.0; np * np * cdim];
    for i in 0..np {
        let gi = &mut grad[i * g_row..(i + 1) * g_row];
        for m in 0..np {
            let dx_im = scale_x * diff[i * np + m];
            let um = &u[m * u_row..(m + 1) * u_row];
            for j in 0..np {
                let gj = &mut gi[j * cdim..j * cdim + ng];
                let uj = &um[j * ng..(j + 1) * ng];
                for g in 0..ng {
                    gj[g] += dx_im * uj[g];
                }
            }
        }
        let ui = &u[i * u_row..(i + 1) * u_row];
        for j in 0..np {
            let gj = &mut gi[j * cdim + ng..(j + 1) * cdim];
            for m in 0..np {
                let dy_jm = scale_y * diff[j * np + m];
                let um = &ui[m * ng..(m + 1) * ng];
                for g in 0..ng {
                    gj[g] += dy_jm * um[g];
                }
            }
        }
    }
    // traces of the interior gradient
    let fsz = np * cdim;
    let mut face_tr = vec![0.0; 4 * fsz];
    {
        let (west, rest) = face_tr.split_at_mut(fsz);
        let (east, rest) = rest.split_at_mut(fsz);
        let (south, north) = rest.split_at_mut(fsz);
        for m in 0..np {
            let lm = ll[m];
            let rm = lr[m];
            let grow = &grad[m * g_row..(m + 1) * g_row];
            for ((dw, de), s) in west.iter_mut().zip(east.iter_mut()).zip(grow) {
                *dw += s * lm;
                *de += s * rm;
            }
        }
        for k in 0..np {
            let base = k * g_row;
            let sk = &mut south[k * cdim..(k + 1) * cdim];
            let nk = &mut north[k * cdim..(k + 1) * cdim];
            for m in 0..np {
                let lm = ll[m];
                let rm = lr[m];
                let gkm = &grad[base + m * cdim..base + (m + 1) * cdim];
                for c in 0..cdim {
                    sk[c] += gkm[c] * lm;
                    nk[c] += gkm[c] * rm;
                }
            }
        }
    }

    for face in Face::ALL {
        let axis = match face {
            Face::West | Face::East => 0,
            Face::South | Face::North => 1,
        };
        let n = face.normal();
        let factor = space.mesh.surface(face) / space.mesh.jgeo * (n.0 + n.1);
        let lhat = match face {
            Face::West | Face::South => basis.lhat_left.as_slice().unwrap(),
            Face::East | Face::North => basis.lhat_right.as_slice().unwrap(),
        };
        let c0 = axis * ng;
        let mut lk = [0.0; 64];
        debug_assert!(np * ng <= 64);
        for k in 0..np {
            for g in 0..ng {
                let own = u_own[(face as usize * np + k) * ng + g];
                lk[k * ng + g] = factor * 0.5 * (u_nb(face, k, g) - own);
            }
        }
        match face {
            Face::West | Face::East => {
                for i in 0..np {
                    let li = lhat[i];
                    let gi = &mut grad[i * g_row..(i + 1) * g_row];
                    for k in 0..np {
                        let gk = &mut gi[k * cdim + c0..k * cdim + c0 + ng];
                        let lkk = &lk[k * ng..(k + 1) * ng];
                        for g in 0..ng {
                            gk[g] += li * lkk[g];
                        }
                    }
                }
            }
            Face::South | Face::North => {
                for k in 0..np {
                    let gk_row = &mut grad[k * g_row..(k + 1) * g_row];
                    let lkk = &lk[k * ng..(k + 1) * ng];
                    for j in 0..np {
                        let lj = lhat[j];
                        let gj = &mut gk_row[j * cdim + c0..j * cdim + c0 + ng];
                        for g in 0..ng {
                            gj[g] += lj * lkk[g];
                        }
                    }
                }
            }
        }
        let fb = face as usize * fsz;
        for k in 0..np {
            let lkk = &lk[k * ng..(k + 1) * ng];
            let dst = &mut face_tr[fb + k * cdim + c0..fb + k * cdim + c0 + ng];
            for g in 0..ng {
                dst[g] += eta * lkk[g] * own_lift_trace;
            }
        }
    }
    (grad, face_tr)
}

/// Gradient variables at all nodes of one element (layout
/// `[i, j, N_GRAD]`).
fn nodal_grad_vars(
    space: &DiscreteSpace,
    element: usize,
    w: &[f64],
    out: &mut [f64],
) -> Result<(), OperatorError> {
    let np = space.n_nodes();
    let nv = space.equation.n_var();
    for (node, ws) in w.chunks_exact(nv).enumerate() {
        let g = &mut out[node * N_GRAD..(node + 1) * N_GRAD];
        space.equation.grad_vars(ws, g).map_err(|source| OperatorError::AtNode {
            element,
            i: node / np,
            j: node % np,
            source,
        })?;
    }
    Ok(())
}

impl LocalContext {
    /// Capture the data needed for element-local first-derivative
    /// evaluations at the base state `w`.
    pub fn for_r1(space: &DiscreteSpace, w: &NodalField) -> Result<Self, OperatorError> {
        let w_traces = compute_traces(&space.basis, w);
        let (u_traces, fv_face) = if space.equation.kind == EquationKind::NavierStokes {
            let lift = compute_lifting(space, w)?;
            let (u, fv) = face_viscous_data(space, &w_traces, &lift)?;
            (Some(u), Some(fv))
        } else {
            (None, None)
        };
        Ok(Self {
            w_traces,
            u_traces,
            fv_face,
            sigma: None,
            sigma_traces: None,
            u_lin_traces: None,
            fv_lin_face: None,
        })
    }

    /// Capture first- and second-derivative data at the base state
    /// `(w, sigma)`.
    pub fn for_r2(
        space: &DiscreteSpace,
        w: &NodalField,
        sigma: &NodalField,
    ) -> Result<Self, OperatorError> {
        let mut ctx = Self::for_r1(space, w)?;
        let s_traces = compute_traces(&space.basis, sigma);
        if space.equation.kind == EquationKind::NavierStokes {
            let lift = compute_lifting(space, w)?;
            let eta = compute_eta(space, w, sigma)?;
            let (u_lin, fv_lin) =
                face_linearized_viscous_data(space, &ctx.w_traces, &s_traces, &lift, &eta)?;
            ctx.u_lin_traces = Some(u_lin);
            ctx.fv_lin_face = Some(fv_lin);
        }
        ctx.sigma = Some(sigma.clone());
        ctx.sigma_traces = Some(s_traces);
        Ok(ctx)
    }

    /// Element-local first-derivative operator at `w_local` (layout
    /// `[i, j, v]`), with neighbor data frozen at the base state.
    pub fn eval_r1(
        &self,
        space: &DiscreteSpace,
        element: usize,
        w_local: &[f64],
        out: &mut [f64],
    ) -> Result<(), OperatorError> {
        let eq = &space.equation;
        let np = space.n_nodes();
        let nv = eq.n_var();
        let ns = eq.kind == EquationKind::NavierStokes;
        let esize = np * np * nv;
        debug_assert_eq!(w_local.len(), esize);

        let mut own_tr = vec![0.0; 4 * np * nv];
        element_traces(space, nv, w_local, &mut own_tr);

        // local lifting for viscous terms
        let viscous = if ns {
            let mut u = vec![0.0; np * np * N_GRAD];
            nodal_grad_vars(space, element, w_local, &mut u)?;
            let mut u_own = vec![0.0; 4 * np * N_GRAD];
            for f in 0..4 {
                for k in 0..np {
                    let ws = &own_tr[(f * np + k) * nv..(f * np + k + 1) * nv];
                    let g = &mut u_own[(f * np + k) * N_GRAD..(f * np + k + 1) * N_GRAD];
                    eq.grad_vars(ws, g).map_err(|source| OperatorError::AtFace {
                        element,
                        face: Face::ALL[f],
                        k,
                        source,
                    })?;
                }
            }
            let frozen_u = self.u_traces.as_ref().expect("NS context");
            let frozen_u = frozen_u.as_slice().unwrap();
            let (d, d_face) = local_lifting(space, &u, &u_own, |face, k, g| {
                let nb = space.mesh.neighbor(element, face);
                let opp = face.opposite() as usize;
                if nb == element {
                    u_own[(opp * np + k) * N_GRAD + g]
                } else {
                    frozen_u[trace_offset(np, N_GRAD, nb, opp, k) + g]
                }
            });
            Some((d, d_face))
        } else {
            None
        };

        let mut fx = vec![0.0; esize];
        let mut fy = vec![0.0; esize];
        for (node, ws) in w_local.chunks_exact(nv).enumerate() {
            let fxs = &mut fx[node * nv..(node + 1) * nv];
            let fys = &mut fy[node * nv..(node + 1) * nv];
            eq.physical_flux(ws, fxs, fys).map_err(|source| OperatorError::AtNode {
                element,
                i: node / np,
                j: node % np,
                source,
            })?;
            if let Some((d, _)) = &viscous {
                let mut vx = [0.0; 4];
                let mut vy = [0.0; 4];
                eq.viscous_flux(ws, &d[node * 6..(node + 1) * 6], &mut vx, &mut vy).map_err(
                    |source| OperatorError::AtNode { element, i: node / np, j: node % np, source },
                )?;
                for v in 0..nv {
                    fxs[v] -= vx[v];
                    fys[v] -= vy[v];
                }
            }
        }
        out.fill(0.0);
        super::accumulate_volume(&space.basis, &space.mesh, np, nv, &fx, &fy, out);

        let w_traces = self.w_traces.as_slice().unwrap();
        let mut fstar = vec![0.0; np * nv];
        for face in Face::ALL {
            let nb = space.mesh.neighbor(element, face);
            let opp = face.opposite();
            let n = face.normal();
            let self_face = nb == element;
            for k in 0..np {
                let wl = &own_tr[(face as usize * np + k) * nv..(face as usize * np + k + 1) * nv];
                let mut wr_buf = [0.0; 4];
                if self_face {
                    wr_buf[..nv]
                        .copy_from_slice(&own_tr[(opp as usize * np + k) * nv..(opp as usize * np + k + 1) * nv]);
                } else {
                    let ro = trace_offset(np, nv, nb, opp as usize, k);
                    wr_buf[..nv].copy_from_slice(&w_traces[ro..ro + nv]);
                }
                let fs = &mut fstar[k * nv..(k + 1) * nv];
                eq.lax_friedrichs(wl, &wr_buf[..nv], n, fs).map_err(|source| {
                    OperatorError::AtFace { element, face, k, source }
                })?;
                if let Some((_, d_face)) = &viscous {
                    let mut vx_l = [0.0; 4];
                    let mut vy_l = [0.0; 4];
                    let dl = &d_face[(face as usize * np + k) * 6..(face as usize * np + k + 1) * 6];
                    eq.viscous_flux(wl, dl, &mut vx_l, &mut vy_l)
                        .map_err(|source| OperatorError::AtFace { element, face, k, source })?;
                    let (mut vx_r, mut vy_r) = ([0.0; 4], [0.0; 4]);
                    if self_face {
                        let dr = &d_face
                            [(opp as usize * np + k) * 6..(opp as usize * np + k + 1) * 6];
                        eq.viscous_flux(&wr_buf[..nv], dr, &mut vx_r, &mut vy_r)
                            .map_err(|source| OperatorError::AtFace { element, face, k, source })?;
                    } else {
                        let (fvx, fvy) = self.fv_face.as_ref().expect("NS context");
                        let o = trace_offset(np, nv, nb, opp as usize, k);
                        vx_r[..nv].copy_from_slice(&fvx.as_slice().unwrap()[o..o + nv]);
                        vy_r[..nv].copy_from_slice(&fvy.as_slice().unwrap()[o..o + nv]);
                    }
                    for v in 0..nv {
                        fs[v] -= 0.5 * ((vx_l[v] + vx_r[v]) * n.0 + (vy_l[v] + vy_r[v]) * n.1);
                    }
                }
            }
            super::accumulate_face(&space.basis, &space.mesh, face, np, nv, &fstar, out);
        }
        let inv_j = 1.0 / space.mesh.jgeo;
        for a in out.iter_mut() {
            *a *= -inv_j;
        }
        Ok(())
    }

    /// Element-local second-derivative operator at `w_local`, with the
    /// element's `sigma` fixed at the base state and neighbor data frozen.
    pub fn eval_r2(
        &self,
        space: &DiscreteSpace,
        element: usize,
        w_local: &[f64],
        out: &mut [f64],
    ) -> Result<(), OperatorError> {
        let eq = &space.equation;
        let np = space.n_nodes();
        let nv = eq.n_var();
        let ns = eq.kind == EquationKind::NavierStokes;
        let esize = np * np * nv;
        let sigma = self.sigma.as_ref().expect("second-derivative context");
        let s_traces = self
            .sigma_traces
            .as_ref()
            .expect("second-derivative context")
            .as_slice()
            .unwrap();
        let se = &sigma.as_slice()[element * esize..(element + 1) * esize];

        let mut own_tr = vec![0.0; 4 * np * nv];
        element_traces(space, nv, w_local, &mut own_tr);

        // local lifting of w and of the linearized gradient variables
        let viscous = if ns {
            let mut u = vec![0.0; np * np * N_GRAD];
            let mut u_lin = vec![0.0; np * np * N_GRAD];
            for (node, (ws, ss)) in w_local.chunks_exact(nv).zip(se.chunks_exact(nv)).enumerate() {
                let g = &mut u[node * N_GRAD..(node + 1) * N_GRAD];
                eq.grad_vars(ws, g).map_err(|source| OperatorError::AtNode {
                    element,
                    i: node / np,
                    j: node % np,
                    source,
                })?;
                let gl = &mut u_lin[node * N_GRAD..(node + 1) * N_GRAD];
                eq.grad_vars_jacobian_apply(ws, ss, gl).map_err(|source| {
                    OperatorError::AtNode { element, i: node / np, j: node % np, source }
                })?;
            }
            let mut u_own = vec![0.0; 4 * np * N_GRAD];
            let mut u_lin_own = vec![0.0; 4 * np * N_GRAD];
            for f in 0..4 {
                for k in 0..np {
                    let ws = &own_tr[(f * np + k) * nv..(f * np + k + 1) * nv];
                    let so = trace_offset(np, nv, element, f, k);
                    let ss = &s_traces[so..so + nv];
                    let g = &mut u_own[(f * np + k) * N_GRAD..(f * np + k + 1) * N_GRAD];
                    eq.grad_vars(ws, g).map_err(|source| OperatorError::AtFace {
                        element,
                        face: Face::ALL[f],
                        k,
                        source,
                    })?;
                    let gl = &mut u_lin_own[(f * np + k) * N_GRAD..(f * np + k + 1) * N_GRAD];
                    eq.grad_vars_jacobian_apply(ws, ss, gl).map_err(|source| {
                        OperatorError::AtFace { element, face: Face::ALL[f], k, source }
                    })?;
                }
            }
            let frozen_u = self.u_traces.as_ref().expect("NS context").as_slice().unwrap();
            let (d, d_face) = local_lifting(space, &u, &u_own, |face, k, g| {
                let nb = space.mesh.neighbor(element, face);
                let opp = face.opposite() as usize;
                if nb == element {
                    u_own[(opp * np + k) * N_GRAD + g]
                } else {
                    frozen_u[trace_offset(np, N_GRAD, nb, opp, k) + g]
                }
            });
            let frozen_u_lin = self
                .u_lin_traces
                .as_ref()
                .expect("NS r2 context")
                .as_slice()
                .unwrap();
            let (etav, eta_face) = local_lifting(space, &u_lin, &u_lin_own, |face, k, g| {
                let nb = space.mesh.neighbor(element, face);
                let opp = face.opposite() as usize;
                if nb == element {
                    u_lin_own[(opp * np + k) * N_GRAD + g]
                } else {
                    frozen_u_lin[trace_offset(np, N_GRAD, nb, opp, k) + g]
                }
            });
            Some((d, d_face, etav, eta_face))
        } else {
            None
        };

        let mut fx = vec![0.0; esize];
        let mut fy = vec![0.0; esize];
        for (node, (ws, ss)) in w_local.chunks_exact(nv).zip(se.chunks_exact(nv)).enumerate() {
            let fxs = &mut fx[node * nv..(node + 1) * nv];
            let fys = &mut fy[node * nv..(node + 1) * nv];
            eq.flux_jacobian_apply(ws, ss, fxs, fys).map_err(|source| {
                OperatorError::AtNode { element, i: node / np, j: node % np, source }
            })?;
            if let Some((d, _, etav, _)) = &viscous {
                let mut vx = [0.0; 4];
                let mut vy = [0.0; 4];
                eq.viscous_flux_linearized(
                    ws,
                    &d[node * 6..(node + 1) * 6],
                    ss,
                    &etav[node * 6..(node + 1) * 6],
                    &mut vx,
                    &mut vy,
                )
                .map_err(|source| OperatorError::AtNode {
                    element,
                    i: node / np,
                    j: node % np,
                    source,
                })?;
                for v in 0..nv {
                    fxs[v] -= vx[v];
                    fys[v] -= vy[v];
                }
            }
        }
        out.fill(0.0);
        super::accumulate_volume(&space.basis, &space.mesh, np, nv, &fx, &fy, out);

        let w_traces = self.w_traces.as_slice().unwrap();
        let mut fstar = vec![0.0; np * nv];
        for face in Face::ALL {
            let nb = space.mesh.neighbor(element, face);
            let opp = face.opposite();
            let n = face.normal();
            let self_face = nb == element;
            for k in 0..np {
                let wl = &own_tr[(face as usize * np + k) * nv..(face as usize * np + k + 1) * nv];
                let so = trace_offset(np, nv, element, face as usize, k);
                let sl = &s_traces[so..so + nv];
                let ro = trace_offset(np, nv, nb, opp as usize, k);
                let sr = &s_traces[ro..ro + nv];
                let mut wr_buf = [0.0; 4];
                if self_face {
                    wr_buf[..nv].copy_from_slice(
                        &own_tr[(opp as usize * np + k) * nv..(opp as usize * np + k + 1) * nv],
                    );
                } else {
                    wr_buf[..nv].copy_from_slice(&w_traces[ro..ro + nv]);
                }
                let fs = &mut fstar[k * nv..(k + 1) * nv];
                eq.linearized_lf(wl, &wr_buf[..nv], sl, sr, n, fs).map_err(|source| {
                    OperatorError::AtFace { element, face, k, source }
                })?;
                if let Some((_, d_face, _, eta_face)) = &viscous {
                    let mut vx_l = [0.0; 4];
                    let mut vy_l = [0.0; 4];
                    let off_l = (face as usize * np + k) * 6;
                    eq.viscous_flux_linearized(
                        wl,
                        &d_face[off_l..off_l + 6],
                        sl,
                        &eta_face[off_l..off_l + 6],
                        &mut vx_l,
                        &mut vy_l,
                    )
                    .map_err(|source| OperatorError::AtFace { element, face, k, source })?;
                    let (mut vx_r, mut vy_r) = ([0.0; 4], [0.0; 4]);
                    if self_face {
                        let off_r = (opp as usize * np + k) * 6;
                        eq.viscous_flux_linearized(
                            &wr_buf[..nv],
                            &d_face[off_r..off_r + 6],
                            sr,
                            &eta_face[off_r..off_r + 6],
                            &mut vx_r,
                            &mut vy_r,
                        )
                        .map_err(|source| OperatorError::AtFace { element, face, k, source })?;
                    } else {
                        let (fvx, fvy) = self.fv_lin_face.as_ref().expect("NS r2 context");
                        let o = trace_offset(np, nv, nb, opp as usize, k);
                        vx_r[..nv].copy_from_slice(&fvx.as_slice().unwrap()[o..o + nv]);
                        vy_r[..nv].copy_from_slice(&fvy.as_slice().unwrap()[o..o + nv]);
                    }
                    for v in 0..nv {
                        fs[v] -= 0.5 * ((vx_l[v] + vx_r[v]) * n.0 + (vy_l[v] + vy_r[v]) * n.1);
                    }
                }
            }
            super::accumulate_face(&space.basis, &space.mesh, face, np, nv, &fstar, out);
        }
        let inv_j = 1.0 / space.mesh.jgeo;
        for a in out.iter_mut() {
            *a *= -inv_j;
        }
        Ok(())
    }
}

/// Base-state gradient variables and viscous fluxes at all faces.
fn face_viscous_data(
    space: &DiscreteSpace,
    w_traces: &Array4<f64>,
    lift: &Lifting,
) -> Result<(Array4<f64>, (Array4<f64>, Array4<f64>)), OperatorError> {
    let eq = &space.equation;
    let ne = space.mesh.n_elements();
    let np = space.n_nodes();
    let nv = eq.n_var();
    let mut u = Array4::zeros((ne, 4, np, N_GRAD));
    let mut fvx = Array4::zeros((ne, 4, np, nv));
    let mut fvy = Array4::zeros((ne, 4, np, nv));
    let wtr = w_traces.as_slice().unwrap();
    let dtr = lift.face.as_slice().unwrap();
    let us = u.as_slice_mut().unwrap();
    let fxs = fvx.as_slice_mut().unwrap();
    let fys = fvy.as_slice_mut().unwrap();
    for e in 0..ne {
        for f in 0..4 {
            for k in 0..np {
                let wo = trace_offset(np, nv, e, f, k);
                let ws = &wtr[wo..wo + nv];
                let do_ = trace_offset(np, 6, e, f, k);
                let ds = &dtr[do_..do_ + 6];
                let uo = trace_offset(np, N_GRAD, e, f, k);
                eq.grad_vars(ws, &mut us[uo..uo + N_GRAD]).map_err(|source| {
                    OperatorError::AtFace { element: e, face: Face::ALL[f], k, source }
                })?;
                let mut vx = [0.0; 4];
                let mut vy = [0.0; 4];
                eq.viscous_flux(ws, ds, &mut vx, &mut vy).map_err(|source| {
                    OperatorError::AtFace { element: e, face: Face::ALL[f], k, source }
                })?;
                fxs[wo..wo + nv].copy_from_slice(&vx[..nv]);
                fys[wo..wo + nv].copy_from_slice(&vy[..nv]);
            }
        }
    }
    Ok((u, (fvx, fvy)))
}

/// Base-state linearized gradient variables and linearized viscous fluxes
/// at all faces.
fn face_linearized_viscous_data(
    space: &DiscreteSpace,
    w_traces: &Array4<f64>,
    s_traces: &Array4<f64>,
    lift: &Lifting,
    eta: &Lifting,
) -> Result<(Array4<f64>, (Array4<f64>, Array4<f64>)), OperatorError> {
    let eq = &space.equation;
    let ne = space.mesh.n_elements();
    let np = space.n_nodes();
    let nv = eq.n_var();
    let mut u_lin = Array4::zeros((ne, 4, np, N_GRAD));
    let mut fvx = Array4::zeros((ne, 4, np, nv));
    let mut fvy = Array4::zeros((ne, 4, np, nv));
    let wtr = w_traces.as_slice().unwrap();
    let str_ = s_traces.as_slice().unwrap();
    let dtr = lift.face.as_slice().unwrap();
    let etr = eta.face.as_slice().unwrap();
    let us = u_lin.as_slice_mut().unwrap();
    let fxs = fvx.as_slice_mut().unwrap();
    let fys = fvy.as_slice_mut().unwrap();
    for e in 0..ne {
        for f in 0..4 {
            for k in 0..np {
                let wo = trace_offset(np, nv, e, f, k);
                let ws = &wtr[wo..wo + nv];
                let ss = &str_[wo..wo + nv];
                let go = trace_offset(np, 6, e, f, k);
                let uo = trace_offset(np, N_GRAD, e, f, k);
                eq.grad_vars_jacobian_apply(ws, ss, &mut us[uo..uo + N_GRAD]).map_err(
                    |source| OperatorError::AtFace { element: e, face: Face::ALL[f], k, source },
                )?;
                let mut vx = [0.0; 4];
                let mut vy = [0.0; 4];
                eq.viscous_flux_linearized(
                    ws,
                    &dtr[go..go + 6],
                    ss,
                    &etr[go..go + 6],
                    &mut vx,
                    &mut vy,
                )
                .map_err(|source| OperatorError::AtFace {
                    element: e,
                    face: Face::ALL[f],
                    k,
                    source,
                })?;
                fxs[wo..wo + nv].copy_from_slice(&vx[..nv]);
                fys[wo..wo + nv].copy_from_slice(&vy[..nv]);
            }
        }
    }
    Ok((u_lin, (fvx, fvy)))
}
