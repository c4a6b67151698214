//! BR2 lifting of the gradient variables.
//!
//! The lifted gradient equals the element-interior strong gradient plus,
//! for each face, the lift of half the inter-element jump of the gradient
//! variables; that sum is the weak-form DG gradient with arithmetic-mean
//! surface values. Face traces of the gradients are not plain polynomial
//! evaluations of the global gradient: each face gets its own local lift,
//! scaled by the stabilization parameter, added to the interior gradient
//! and evaluated at that face.

use super::{compute_traces, DiscreteSpace, OperatorError};
use crate::equations::N_GRAD;
use crate::field::NodalField;
use crate::mesh::Face;
use ndarray::Array4;

/// Lifted gradients: nodal values (6 components, x-derivatives of
/// `(v1, v2, T)` then y-derivatives) and the BR2 face traces
/// `[element, face, point, component]`.
#[derive(Debug, Clone)]
pub struct Lifting {
    pub volume: NodalField,
    pub face: Array4<f64>,
}

/// Axis of a face: 0 for xi1 (west/east), 1 for xi2 (south/north).
#[inline]
fn face_axis(face: Face) -> usize {
    match face {
        Face::West | Face::East => 0,
        Face::South | Face::North => 1,
    }
}

/// Signed metric factor `(shat / jgeo) * n` of a face.
#[inline]
fn face_lift_factor(space: &DiscreteSpace, face: Face) -> f64 {
    let n = face.normal();
    let sign = n.0 + n.1;
    space.mesh.surface(face) / space.mesh.jgeo * sign
}

/// Shared stencil: lift a nodal gradient-variable field `u` with face
/// values `u_traces` (shape `[element, face, point, N_GRAD]`).
pub(crate) fn lifting_core(
    space: &DiscreteSpace,
    u: &NodalField,
    u_traces: &Array4<f64>,
) -> Lifting {
    let np = space.n_nodes();
    let ne = space.mesh.n_elements();
    let basis = &space.basis;
    let eta = space.br2_eta;
    let ng = N_GRAD;
    let cdim = 2 * N_GRAD;
    // trace of the own-face lift basis function, sum_i l(+-1)_i^2 / w_i
    let own_lift_trace: f64 = (0..np).map(|i| basis.l_right[i] * basis.lhat_right[i]).sum();

    let mut volume = NodalField::zeros(ne, np, cdim);
    let mut face_tr = Array4::zeros((ne, 4, np, cdim));
    let face_flat = face_tr.as_slice_mut().expect("contiguous");
    let vol_flat = volume.as_slice_mut();
    let u_flat = u.as_slice();
    let utr = u_traces.as_slice().expect("contiguous");
    let diff = basis.diff.as_slice().unwrap();
    let ll = basis.l_left.as_slice().unwrap();
    let lr = basis.l_right.as_slice().unwrap();

    let scale_x = 2.0 / space.mesh.dx;
    let scale_y = 2.0 / space.mesh.dy;
    let u_row = np * ng;
    let g_row = np * cdim;
    let esize_u = np * np * ng;
    let esize_g = np * np * cdim;
    let fsz = np * cdim;

    for e in 0..ne {
        let ue = &u_flat[e * esize_u..(e + 1) * esize_u];
        let grad = &mut vol_flat[e * esize_g..(e + 1) * esize_g];
        // interior strong gradient of the element polynomial; x block in
        // components [0, ng), y block in [ng, 2 ng)
        for i in 0..np {
            let gi = &mut grad[i * g_row..(i + 1) * g_row];
            for m in 0..np {
                let dx_im = scale_x * diff[i * np + m];
                let um = &ue[m * u_row..(m + 1) * u_row];
                for j in 0..np {
                    let gj = &mut gi[j * cdim..j * cdim + ng];
                    let uj = &um[j * ng..(j + 1) * ng];
                    for g in 0..ng {
                        gj[g] += dx_im * uj[g];
                    }
                }
            }
            let ui = &ue[i * u_row..(i + 1) * u_row];
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
        // traces of the interior gradient at all faces
        {
            let ft = &mut face_flat[e * 4 * fsz..(e + 1) * 4 * fsz];
            let (west, rest) = ft.split_at_mut(fsz);
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
            let nb = space.mesh.neighbor(e, face);
            let opp = face.opposite();
            let axis = face_axis(face);
            let factor = face_lift_factor(space, face);
            let lhat = match face {
                Face::West | Face::South => basis.lhat_left.as_slice().unwrap(),
                Face::East | Face::North => basis.lhat_right.as_slice().unwrap(),
            };
            // lift strengths per face point and gradient variable
            let mut lk = [0.0; 64];
            debug_assert!(np * ng <= 64);
            for k in 0..np {
                let own = crate::dg::trace_offset(np, ng, e, face as usize, k);
                let other = crate::dg::trace_offset(np, ng, nb, opp as usize, k);
                for g in 0..ng {
                    lk[k * ng + g] = factor * 0.5 * (utr[other + g] - utr[own + g]);
                }
            }
            let c0 = axis * ng;
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
            // stabilized own-face lift evaluated at the face
            let ft_base = ((e * 4 + face as usize) * np) * cdim;
            for k in 0..np {
                let lkk = &lk[k * ng..(k + 1) * ng];
                let dst = &mut face_flat[ft_base + k * cdim + c0..ft_base + k * cdim + c0 + ng];
                for g in 0..ng {
                    dst[g] += eta * lkk[g] * own_lift_trace;
                }
            }
        }
    }
    Lifting {
        volume,
        face: face_tr,
    }
}

/// Lifted gradients of the gradient variables `(v1, v2, T)` of `w`, with
/// the per-face BR2 traces.
pub fn compute_lifting(space: &DiscreteSpace, w: &NodalField) -> Result<Lifting, OperatorError> {
    let np = space.n_nodes();
    let ne = space.mesh.n_elements();
    let eq = &space.equation;

    let mut u = NodalField::zeros(ne, np, N_GRAD);
    for e in 0..ne {
        let we = w.element(e);
        let mut ue = u.element_mut(e);
        for i in 0..np {
            for j in 0..np {
                let ws = we.slice(ndarray::s![i, j, ..]);
                let mut g = [0.0; N_GRAD];
                eq.grad_vars(ws.as_slice().unwrap(), &mut g)
                    .map_err(|source| OperatorError::AtNode { element: e, i, j, source })?;
                for (gi, gv) in g.iter().enumerate() {
                    ue[[i, j, gi]] = *gv;
                }
            }
        }
    }

    let w_traces = compute_traces(&space.basis, w);
    let mut u_traces = Array4::zeros((ne, 4, np, N_GRAD));
    for e in 0..ne {
        for f in 0..4 {
            for k in 0..np {
                let ws = w_traces.slice(ndarray::s![e, f, k, ..]);
                let mut g = [0.0; N_GRAD];
                eq.grad_vars(ws.as_slice().unwrap(), &mut g).map_err(|source| {
                    OperatorError::AtFace {
                        element: e,
                        face: Face::ALL[f],
                        k,
                        source,
                    }
                })?;
                for (gi, gv) in g.iter().enumerate() {
                    u_traces[[e, f, k, gi]] = *gv;
                }
            }
        }
    }

    Ok(lifting_core(space, &u, &u_traces))
}

/// Linearization of the lifting: the same stencil applied to
/// `(d w_grad / d w) sigma`, including the per-face local lifts.
pub fn compute_eta(
    space: &DiscreteSpace,
    w: &NodalField,
    sigma: &NodalField,
) -> Result<Lifting, OperatorError> {
    let np = space.n_nodes();
    let ne = space.mesh.n_elements();
    let eq = &space.equation;

    let mut u = NodalField::zeros(ne, np, N_GRAD);
    for e in 0..ne {
        let we = w.element(e);
        let se = sigma.element(e);
        let mut ue = u.element_mut(e);
        for i in 0..np {
            for j in 0..np {
                let ws = we.slice(ndarray::s![i, j, ..]);
                let ss = se.slice(ndarray::s![i, j, ..]);
                let mut g = [0.0; N_GRAD];
                eq.grad_vars_jacobian_apply(
                    ws.as_slice().unwrap(),
                    ss.as_slice().unwrap(),
                    &mut g,
                )
                .map_err(|source| OperatorError::AtNode { element: e, i, j, source })?;
                for (gi, gv) in g.iter().enumerate() {
                    ue[[i, j, gi]] = *gv;
                }
            }
        }
    }

    let w_traces = compute_traces(&space.basis, w);
    let s_traces = compute_traces(&space.basis, sigma);
    let mut u_traces = Array4::zeros((ne, 4, np, N_GRAD));
    for e in 0..ne {
        for f in 0..4 {
            for k in 0..np {
                let ws = w_traces.slice(ndarray::s![e, f, k, ..]);
                let ss = s_traces.slice(ndarray::s![e, f, k, ..]);
                let mut g = [0.0; N_GRAD];
                eq.grad_vars_jacobian_apply(
                    ws.as_slice().unwrap(),
                    ss.as_slice().unwrap(),
                    &mut g,
                )
                .map_err(|source| OperatorError::AtFace {
                    element: e,
                    face: Face::ALL[f],
                    k,
                    source,
                })?;
                for (gi, gv) in g.iter().enumerate() {
                    u_traces[[e, f, k, gi]] = *gv;
                }
            }
        }
    }

    Ok(lifting_core(space, &u, &u_traces))
}
