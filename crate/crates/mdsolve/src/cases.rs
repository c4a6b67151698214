//! Manufactured test cases and error norms.
//!
//! All in-scope studies advect a sine wave through the fully periodic
//! square: the scalar wave for linear advection, a density wave riding on
//! a constant velocity and pressure for Euler and Navier-Stokes. The
//! profile is one-dimensional along `x + y`, so the advection and Euler
//! cases have closed-form solutions; the viscous case is measured against
//! an explicitly integrated reference.

use crate::dg::DiscreteSpace;
use crate::equations::EquationKind;
use crate::field::NodalField;
use std::f64::consts::PI;

/// A test case with its initializer and, where available, exact solution.
#[derive(Debug, Clone)]
pub struct TestCase {
    kind: EquationKind,
    velocity: [f64; 2],
    gamma: f64,
    epsilon: f64,
}

impl TestCase {
    /// The sine-wave case matching the space's equation system.
    pub fn sine(space: &DiscreteSpace) -> Self {
        let eq = &space.equation;
        Self {
            kind: eq.kind,
            velocity: eq.a,
            gamma: eq.gamma,
            epsilon: eq.epsilon,
        }
    }

    /// Whether a closed-form solution exists at all times.
    pub fn has_exact_solution(&self) -> bool {
        self.kind != EquationKind::NavierStokes
    }

    fn fill_state(&self, x: f64, y: f64, t: f64, w: &mut [f64]) {
        let a_sum = self.velocity[0] + self.velocity[1];
        let phase = PI * (x + y - a_sum * t);
        match self.kind {
            EquationKind::Advection => w[0] = phase.sin(),
            EquationKind::Euler | EquationKind::NavierStokes => {
                let rho = 1.0 + 0.3 * phase.sin();
                let p = 1.0;
                let v = self.velocity;
                w[0] = rho;
                w[1] = rho * v[0];
                w[2] = rho * v[1];
                w[3] = p / (self.gamma - 1.0)
                    + 0.5 * self.epsilon * self.epsilon * rho * (v[0] * v[0] + v[1] * v[1]);
            }
        }
    }

    /// Nodal interpolation of the initializer (no projection).
    pub fn initial_state(&self, space: &DiscreteSpace) -> NodalField {
        self.state_at(space, 0.0)
    }

    /// Nodal interpolation of the solution profile at time `t`. For
    /// Navier-Stokes this is only meaningful at `t = 0`.
    pub fn state_at(&self, space: &DiscreteSpace, t: f64) -> NodalField {
        space.interpolate(|x, y, w| self.fill_state(x, y, t, w))
    }

    /// Exact solution at time `t`, if the case has one.
    pub fn exact_state(&self, space: &DiscreteSpace, t: f64) -> Option<NodalField> {
        if self.has_exact_solution() {
            Some(self.state_at(space, t))
        } else {
            None
        }
    }
}

/// Quadrature L2 error per variable,
/// `sqrt( sum_e sum_ij w_i w_j J (w_h - w_ref)^2 / |domain| )`,
/// and the sum over variables.
pub fn l2_error(space: &DiscreteSpace, w_h: &NodalField, w_ref: &NodalField) -> (Vec<f64>, f64) {
    let np = space.n_nodes();
    let nv = w_h.n_var();
    let area = space.mesh.area();
    let mut acc = vec![0.0; nv];
    for e in 0..space.mesh.n_elements() {
        let a = w_h.element(e);
        let b = w_ref.element(e);
        for i in 0..np {
            for j in 0..np {
                let wq = space.basis.weights[i] * space.basis.weights[j] * space.mesh.jgeo;
                for v in 0..nv {
                    let d = a[[i, j, v]] - b[[i, j, v]];
                    acc[v] += wq * d * d;
                }
            }
        }
    }
    let per_var: Vec<f64> = acc.iter().map(|s| (s / area).sqrt()).collect();
    let sum = per_var.iter().sum();
    (per_var, sum)
}
