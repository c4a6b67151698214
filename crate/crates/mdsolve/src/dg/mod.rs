//! Discrete spatial operators.
//!
//! [`compute_r1`] evaluates the weak-form DGSEM divergence of the physical
//! flux (the discrete first time derivative). [`compute_r2`] evaluates the
//! same stencil with the flux replaced by its linearization in the
//! direction of the auxiliary variable `sigma` (the discrete second time
//! derivative). For Navier-Stokes both operators additionally carry the
//! viscous terms built on BR2-lifted gradients.

mod lifting;
pub(crate) mod local;

pub use lifting::{compute_eta, compute_lifting, Lifting};
pub use local::LocalContext;

use crate::basis::Basis;
use crate::equations::{EquationError, EquationKind, EquationSystem};
use crate::field::NodalField;
use crate::mesh::{CartesianMesh, Face};
use ndarray::Array4;
use rayon::prelude::*;
use thiserror::Error;

/// Mesh, basis and equation system bundled with the discretization
/// parameters.
#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    pub mesh: CartesianMesh,
    pub basis: Basis,
    pub equation: EquationSystem,
    /// BR2 stabilization parameter; at least the number of element faces.
    pub br2_eta: f64,
}

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("element {element}, node ({i},{j}): {source}")]
    AtNode {
        element: usize,
        i: usize,
        j: usize,
        source: EquationError,
    },
    #[error("element {element}, face {face:?}, point {k}: {source}")]
    AtFace {
        element: usize,
        face: Face,
        k: usize,
        source: EquationError,
    },
}

impl DiscreteSpace {
    pub fn new(mesh: CartesianMesh, basis: Basis, equation: EquationSystem) -> Self {
        Self {
            mesh,
            basis,
            equation,
            br2_eta: 4.0,
        }
    }

    pub fn with_br2_eta(mut self, eta: f64) -> Self {
        self.br2_eta = eta;
        self
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.basis.n_nodes()
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.n_elements() * self.n_nodes() * self.n_nodes() * self.equation.n_var()
    }

    /// Block size of one element, `(n+1)^2 n_var`.
    pub fn element_dof(&self) -> usize {
        self.n_nodes() * self.n_nodes() * self.equation.n_var()
    }

    pub fn zero_field(&self) -> NodalField {
        NodalField::zeros(self.mesh.n_elements(), self.n_nodes(), self.equation.n_var())
    }

    /// Physical coordinates of collocation node `(i, j)` of an element.
    pub fn node_coords(&self, element: usize, i: usize, j: usize) -> (f64, f64) {
        self.mesh
            .map_to_physical(element, self.basis.nodes[i], self.basis.nodes[j])
    }

    /// Fill a field by evaluating a pointwise function at the mapped nodes.
    pub fn interpolate(&self, f: impl Fn(f64, f64, &mut [f64])) -> NodalField {
        let mut out = self.zero_field();
        let np = self.n_nodes();
        for e in 0..self.mesh.n_elements() {
            for i in 0..np {
                for j in 0..np {
                    let (x, y) = self.node_coords(e, i, j);
                    let mut el = out.element_mut(e);
                    f(x, y, el.slice_mut(ndarray::s![i, j, ..]).as_slice_mut().unwrap());
                }
            }
        }
        out
    }

    /// Quadrature-weighted integral of each variable over the domain.
    pub fn integral_per_var(&self, f: &NodalField) -> Vec<f64> {
        let np = self.n_nodes();
        let nv = f.n_var();
        let mut out = vec![0.0; nv];
        for e in 0..self.mesh.n_elements() {
            let el = f.element(e);
            for i in 0..np {
                for j in 0..np {
                    let wq = self.basis.weights[i] * self.basis.weights[j] * self.mesh.jgeo;
                    for v in 0..nv {
                        out[v] += wq * el[[i, j, v]];
                    }
                }
            }
        }
        out
    }
}

/// Face traces of a nodal field: `[element, face, point, variable]`, with
/// faces ordered as in [`Face`]. Traces are line-wise evaluations of the
/// solution polynomial at the reference boundary.
pub(crate) fn compute_traces(basis: &Basis, f: &NodalField) -> Array4<f64> {
    let ne = f.n_elements();
    let np = f.n_nodes();
    let nv = f.n_var();
    let esize = np * np * nv;
    let row = np * nv;
    let fsz = np * nv;
    let mut tr = Array4::zeros((ne, 4, np, nv));
    let data = f.as_slice();
    let trs = tr.as_slice_mut().expect("trace array is contiguous");
    let ll = basis.l_left.as_slice().unwrap();
    let lr = basis.l_right.as_slice().unwrap();
    for e in 0..ne {
        let w = &data[e * esize..(e + 1) * esize];
        let t = &mut trs[e * 4 * fsz..(e + 1) * 4 * fsz];
        let (west, rest) = t.split_at_mut(fsz);
        let (east, rest) = rest.split_at_mut(fsz);
        let (south, north) = rest.split_at_mut(fsz);
        for m in 0..np {
            let lm = ll[m];
            let rm = lr[m];
            // west/east faces: line interpolation over i = m, the i-row
            // [j, v] is contiguous
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
    tr
}

/// Add the weak-form volume contraction of transformed fluxes to `acc`.
///
/// `fx`, `fy` hold the physical flux components at the element nodes in
/// `[i, j, v]` layout; the metric scalings produce the transformed fluxes
/// on the fly.
pub(crate) fn accumulate_volume(
    basis: &Basis,
    mesh: &CartesianMesh,
    np: usize,
    nv: usize,
    fx: &[f64],
    fy: &[f64],
    acc: &mut [f64],
) {
    let row = np * nv;
    let dhat = basis.dhat.as_slice().unwrap();
    for i in 0..np {
        let acc_i = &mut acc[i * row..(i + 1) * row];
        for lam in 0..np {
            let d1 = mesh.shat_xi1 * dhat[i * np + lam];
            let fx_l = &fx[lam * row..(lam + 1) * row];
            for (a, f) in acc_i.iter_mut().zip(fx_l) {
                *a += d1 * f;
            }
        }
        let fy_i = &fy[i * row..(i + 1) * row];
        for j in 0..np {
            let aj = &mut acc_i[j * nv..(j + 1) * nv];
            for mu in 0..np {
                let d2 = mesh.shat_xi2 * dhat[j * np + mu];
                let fm = &fy_i[mu * nv..(mu + 1) * nv];
                for v in 0..nv {
                    aj[v] += d2 * fm[v];
                }
            }
        }
    }
}

/// Add one face's surface contribution `[f* shat] lhat` to `acc`. `fstar`
/// holds the numerical flux at the face points (layout `[k, v]`),
/// evaluated with the element's outward normal.
pub(crate) fn accumulate_face(
    basis: &Basis,
    mesh: &CartesianMesh,
    face: Face,
    np: usize,
    nv: usize,
    fstar: &[f64],
    acc: &mut [f64],
) {
    let row = np * nv;
    let s = mesh.surface(face);
    let lhat = match face {
        Face::West | Face::South => basis.lhat_left.as_slice().unwrap(),
        Face::East | Face::North => basis.lhat_right.as_slice().unwrap(),
    };
    match face {
        Face::West | Face::East => {
            for i in 0..np {
                let li = s * lhat[i];
                let acc_i = &mut acc[i * row..(i + 1) * row];
                for (a, f) in acc_i.iter_mut().zip(fstar) {
                    *a += li * f;
                }
            }
        }
        Face::South | Face::North => {
            for i in 0..np {
                let fi = &fstar[i * nv..(i + 1) * nv];
                let acc_i = &mut acc[i * row..(i + 1) * row];
                for j in 0..np {
                    let lj = s * lhat[j];
                    for v in 0..nv {
                        acc_i[j * nv + v] += lj * fi[v];
                    }
                }
            }
        }
    }
}

/// Flat index of a face-trace entry `(element, face, point)`.
#[inline]
pub(crate) fn trace_offset(np: usize, nv: usize, e: usize, face: usize, k: usize) -> usize {
    ((e * 4 + face) * np + k) * nv
}

/// Discrete first time derivative: the weak-form DGSEM divergence of the
/// physical flux with the global Lax-Friedrichs surface flux. For
/// Navier-Stokes the viscous flux built on the lifted gradients is
/// subtracted in both volume and surface terms.
pub fn compute_r1(space: &DiscreteSpace, w: &NodalField) -> Result<NodalField, OperatorError> {
    let lift = if space.equation.kind == EquationKind::NavierStokes {
        Some(compute_lifting(space, w)?)
    } else {
        None
    };
    compute_r1_with_lifting(space, w, lift.as_ref())
}

/// [`compute_r1`] with a caller-supplied lifting (Navier-Stokes only).
pub fn compute_r1_with_lifting(
    space: &DiscreteSpace,
    w: &NodalField,
    lift: Option<&Lifting>,
) -> Result<NodalField, OperatorError> {
    let eq = &space.equation;
    let np = space.n_nodes();
    let nv = eq.n_var();
    let esize = np * np * nv;
    let traces = compute_traces(&space.basis, w);
    let tr = traces.as_slice().unwrap();
    let mut out = space.zero_field();

    let w_flat = w.as_slice();
    let lift_flat = lift.map(|l| (l.volume.as_slice(), l.face.as_slice().unwrap()));
    let inv_j = 1.0 / space.mesh.jgeo;

    out.as_slice_mut()
        .par_chunks_mut(esize)
        .with_min_len(64)
        .enumerate()
        .try_for_each_init(
            || (vec![0.0; esize], vec![0.0; esize], vec![0.0; np * nv]),
            |(fx, fy, fstar), (e, acc)| -> Result<(), OperatorError> {
                let we = &w_flat[e * esize..(e + 1) * esize];
                for (node, ws) in we.chunks_exact(nv).enumerate() {
                    let fxs = &mut fx[node * nv..(node + 1) * nv];
                    let fys = &mut fy[node * nv..(node + 1) * nv];
                    eq.physical_flux(ws, fxs, fys).map_err(|source| OperatorError::AtNode {
                        element: e,
                        i: node / np,
                        j: node % np,
                        source,
                    })?;
                    if let Some((d_vol, _)) = lift_flat {
                        let base = (e * np * np + node) * 6;
                        let ds = &d_vol[base..base + 6];
                        let mut vx = [0.0; 4];
                        let mut vy = [0.0; 4];
                        eq.viscous_flux(ws, ds, &mut vx, &mut vy).map_err(|source| {
                            OperatorError::AtNode { element: e, i: node / np, j: node % np, source }
                        })?;
                        for v in 0..nv {
                            fxs[v] -= vx[v];
                            fys[v] -= vy[v];
                        }
                    }
                }
                acc.fill(0.0);
                accumulate_volume(&space.basis, &space.mesh, np, nv, fx, fy, acc);

                for face in Face::ALL {
                    let nb = space.mesh.neighbor(e, face);
                    let opp = face.opposite();
                    let n = face.normal();
                    for k in 0..np {
                        let lo = trace_offset(np, nv, e, face as usize, k);
                        let ro = trace_offset(np, nv, nb, opp as usize, k);
                        let wl = &tr[lo..lo + nv];
                        let wr = &tr[ro..ro + nv];
                        let fs = &mut fstar[k * nv..(k + 1) * nv];
                        eq.lax_friedrichs(wl, wr, n, fs).map_err(|source| {
                            OperatorError::AtFace { element: e, face, k, source }
                        })?;
                        if let Some((_, d_face)) = lift_flat {
                            let dlo = trace_offset(np, 6, e, face as usize, k);
                            let dro = trace_offset(np, 6, nb, opp as usize, k);
                            let mut vx_l = [0.0; 4];
                            let mut vy_l = [0.0; 4];
                            let mut vx_r = [0.0; 4];
                            let mut vy_r = [0.0; 4];
                            eq.viscous_flux(wl, &d_face[dlo..dlo + 6], &mut vx_l, &mut vy_l)
                                .map_err(|source| OperatorError::AtFace {
                                    element: e,
                                    face,
                                    k,
                                    source,
                                })?;
                            eq.viscous_flux(wr, &d_face[dro..dro + 6], &mut vx_r, &mut vy_r)
                                .map_err(|source| OperatorError::AtFace {
                                    element: e,
                                    face,
                                    k,
                                    source,
                                })?;
                            for v in 0..nv {
                                fs[v] -=
                                    0.5 * ((vx_l[v] + vx_r[v]) * n.0 + (vy_l[v] + vy_r[v]) * n.1);
                            }
                        }
                    }
                    accumulate_face(&space.basis, &space.mesh, face, np, nv, fstar, acc);
                }

                for a in acc.iter_mut() {
                    *a *= -inv_j;
                }
                Ok(())
            },
        )?;
    Ok(out)
}

/// Discrete second time derivative: the same stencil as [`compute_r1`]
/// with the volume flux replaced by `(dF/dw) sigma` and the surface flux by
/// the linearized Lax-Friedrichs flux. For Navier-Stokes the linearized
/// viscous terms in `(w, sigma)` and `(d, eta)` are added.
pub fn compute_r2(
    space: &DiscreteSpace,
    w: &NodalField,
    sigma: &NodalField,
) -> Result<NodalField, OperatorError> {
    if space.equation.kind == EquationKind::NavierStokes {
        let lift = compute_lifting(space, w)?;
        compute_r2_with_lifting(space, w, sigma, Some(&lift))
    } else {
        compute_r2_with_lifting(space, w, sigma, None)
    }
}

/// [`compute_r2`] with a caller-supplied lifting of `w` (Navier-Stokes
/// only); the linearized lifting `eta` is always computed here.
pub fn compute_r2_with_lifting(
    space: &DiscreteSpace,
    w: &NodalField,
    sigma: &NodalField,
    lift: Option<&Lifting>,
) -> Result<NodalField, OperatorError> {
    let eq = &space.equation;
    let np = space.n_nodes();
    let nv = eq.n_var();
    let esize = np * np * nv;
    let w_traces = compute_traces(&space.basis, w);
    let s_traces = compute_traces(&space.basis, sigma);
    let wtr = w_traces.as_slice().unwrap();
    let str_ = s_traces.as_slice().unwrap();
    let eta = if lift.is_some() {
        Some(compute_eta(space, w, sigma)?)
    } else {
        None
    };
    let visc = match (lift, eta.as_ref()) {
        (Some(l), Some(et)) => Some((
            l.volume.as_slice(),
            l.face.as_slice().unwrap(),
            et.volume.as_slice(),
            et.face.as_slice().unwrap(),
        )),
        _ => None,
    };
    let mut out = space.zero_field();

    let w_flat = w.as_slice();
    let s_flat = sigma.as_slice();
    let inv_j = 1.0 / space.mesh.jgeo;

    out.as_slice_mut()
        .par_chunks_mut(esize)
        .with_min_len(64)
        .enumerate()
        .try_for_each_init(
            || (vec![0.0; esize], vec![0.0; esize], vec![0.0; np * nv]),
            |(fx, fy, fstar), (e, acc)| -> Result<(), OperatorError> {
                let we = &w_flat[e * esize..(e + 1) * esize];
                let se = &s_flat[e * esize..(e + 1) * esize];
                for (node, (ws, ss)) in we.chunks_exact(nv).zip(se.chunks_exact(nv)).enumerate() {
                    let fxs = &mut fx[node * nv..(node + 1) * nv];
                    let fys = &mut fy[node * nv..(node + 1) * nv];
                    eq.flux_jacobian_apply(ws, ss, fxs, fys).map_err(|source| {
                        OperatorError::AtNode { element: e, i: node / np, j: node % np, source }
                    })?;
                    if let Some((d_vol, _, eta_vol, _)) = visc {
                        let base = (e * np * np + node) * 6;
                        let mut vx = [0.0; 4];
                        let mut vy = [0.0; 4];
                        eq.viscous_flux_linearized(
                            ws,
                            &d_vol[base..base + 6],
                            ss,
                            &eta_vol[base..base + 6],
                            &mut vx,
                            &mut vy,
                        )
                        .map_err(|source| OperatorError::AtNode {
                            element: e,
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
                acc.fill(0.0);
                accumulate_volume(&space.basis, &space.mesh, np, nv, fx, fy, acc);

                for face in Face::ALL {
                    let nb = space.mesh.neighbor(e, face);
                    let opp = face.opposite();
                    let n = face.normal();
                    for k in 0..np {
                        let lo = trace_offset(np, nv, e, face as usize, k);
                        let ro = trace_offset(np, nv, nb, opp as usize, k);
                        let wl = &wtr[lo..lo + nv];
                        let wr = &wtr[ro..ro + nv];
                        let sl = &str_[lo..lo + nv];
                        let sr = &str_[ro..ro + nv];
                        let fs = &mut fstar[k * nv..(k + 1) * nv];
                        eq.linearized_lf(wl, wr, sl, sr, n, fs).map_err(|source| {
                            OperatorError::AtFace { element: e, face, k, source }
                        })?;
                        if let Some((_, d_face, _, eta_face)) = visc {
                            let dlo = trace_offset(np, 6, e, face as usize, k);
                            let dro = trace_offset(np, 6, nb, opp as usize, k);
                            let mut vx_l = [0.0; 4];
                            let mut vy_l = [0.0; 4];
                            let mut vx_r = [0.0; 4];
                            let mut vy_r = [0.0; 4];
                            eq.viscous_flux_linearized(
                                wl,
                                &d_face[dlo..dlo + 6],
                                sl,
                                &eta_face[dlo..dlo + 6],
                                &mut vx_l,
                                &mut vy_l,
                            )
                            .map_err(|source| OperatorError::AtFace {
                                element: e,
                                face,
                                k,
                                source,
                            })?;
                            eq.viscous_flux_linearized(
                                wr,
                                &d_face[dro..dro + 6],
                                sr,
                                &eta_face[dro..dro + 6],
                                &mut vx_r,
                                &mut vy_r,
                            )
                            .map_err(|source| OperatorError::AtFace {
                                element: e,
                                face,
                                k,
                                source,
                            })?;
                            for v in 0..nv {
                                fs[v] -=
                                    0.5 * ((vx_l[v] + vx_r[v]) * n.0 + (vy_l[v] + vy_r[v]) * n.1);
                            }
                        }
                    }
                    accumulate_face(&space.basis, &space.mesh, face, np, nv, fstar, acc);
                }

                for a in acc.iter_mut() {
                    *a *= -inv_j;
                }
                Ok(())
            },
        )?;
    Ok(out)
}
