//! Physical models: linear advection, compressible Euler with
//! reference-Mach scaling, and compressible Navier-Stokes.
//!
//! All functions are pure and operate on per-node state slices. Euler and
//! Navier-Stokes use the nondimensional form where the pressure enters the
//! momentum flux as `p / eps^2` with the reference Mach number `eps`, and
//! the global Lax-Friedrichs dissipation is the diagonal
//! `(1/eps, 1, 1, 1/eps)`.

use thiserror::Error;

/// Gradient-variable count for Navier-Stokes: `(v1, v2, T)`.
pub const N_GRAD: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("non-finite state {state:?}")]
    NonFinite { state: Vec<f64> },
    #[error("non-positive density in state {state:?}")]
    NonPositiveDensity { state: Vec<f64> },
    #[error("non-positive pressure {pressure} in state {state:?}")]
    NonPositivePressure { state: Vec<f64>, pressure: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Advection,
    Euler,
    NavierStokes,
}

/// The equation system with its physical parameters.
#[derive(Debug, Clone)]
pub struct EquationSystem {
    pub kind: EquationKind,
    /// Advection velocity (also the background velocity of the sine cases).
    pub a: [f64; 2],
    /// Isentropic coefficient.
    pub gamma: f64,
    /// Reference Mach number.
    pub epsilon: f64,
    /// Dynamic viscosity (Navier-Stokes only).
    pub mu: f64,
    /// Prandtl number (Navier-Stokes only).
    pub prandtl: f64,
}

impl EquationSystem {
    pub fn advection(a: [f64; 2]) -> Self {
        Self {
            kind: EquationKind::Advection,
            a,
            gamma: 1.4,
            epsilon: 1.0,
            mu: 0.0,
            prandtl: 0.72,
        }
    }

    pub fn euler(gamma: f64, epsilon: f64) -> Self {
        assert!(gamma > 1.0 && epsilon > 0.0);
        Self {
            kind: EquationKind::Euler,
            a: [0.0, 0.0],
            gamma,
            epsilon,
            mu: 0.0,
            prandtl: 0.72,
        }
    }

    pub fn navier_stokes(gamma: f64, epsilon: f64, mu: f64, prandtl: f64) -> Self {
        assert!(gamma > 1.0 && epsilon > 0.0 && mu >= 0.0 && prandtl > 0.0);
        Self {
            kind: EquationKind::NavierStokes,
            a: [0.0, 0.0],
            gamma,
            epsilon,
            mu,
            prandtl,
        }
    }

    /// Set the background/advection velocity of the manufactured cases.
    pub fn with_velocity(mut self, a: [f64; 2]) -> Self {
        self.a = a;
        self
    }

    #[inline]
    pub fn n_var(&self) -> usize {
        match self.kind {
            EquationKind::Advection => 1,
            _ => 4,
        }
    }

    #[inline]
    pub fn is_linear(&self) -> bool {
        self.kind == EquationKind::Advection
    }

    #[inline]
    pub fn is_viscous(&self) -> bool {
        self.kind == EquationKind::NavierStokes && self.mu > 0.0
    }

    /// Specific gas constant `R = 1/(gamma eps^2)`.
    #[inline]
    pub fn gas_constant(&self) -> f64 {
        1.0 / (self.gamma * self.epsilon * self.epsilon)
    }

    /// Specific heat capacity `c_p = R gamma / (gamma - 1)`.
    #[inline]
    pub fn c_p(&self) -> f64 {
        self.gas_constant() * self.gamma / (self.gamma - 1.0)
    }

    /// Thermal conductivity `c_p mu / Pr`.
    #[inline]
    pub fn thermal_conductivity(&self) -> f64 {
        self.c_p() * self.mu / self.prandtl
    }

    fn check_admissible(&self, w: &[f64]) -> Result<(), EquationError> {
        if !w.iter().all(|v| v.is_finite()) {
            return Err(EquationError::NonFinite { state: w.to_vec() });
        }
        if self.kind != EquationKind::Advection && w[0] <= 0.0 {
            return Err(EquationError::NonPositiveDensity { state: w.to_vec() });
        }
        Ok(())
    }

    /// Pressure from the perfect-gas equation of state,
    /// `p = (gamma-1)(E - eps^2/2 rho |v|^2)`.
    pub fn pressure(&self, w: &[f64]) -> Result<f64, EquationError> {
        self.check_admissible(w)?;
        let rho = w[0];
        let ke = 0.5 * (w[1] * w[1] + w[2] * w[2]) / rho;
        Ok((self.gamma - 1.0) * (w[3] - self.epsilon * self.epsilon * ke))
    }

    /// Physical flux `(F_x, F_y)` at one state.
    pub fn physical_flux(
        &self,
        w: &[f64],
        fx: &mut [f64],
        fy: &mut [f64],
    ) -> Result<(), EquationError> {
        match self.kind {
            EquationKind::Advection => {
                fx[0] = self.a[0] * w[0];
                fy[0] = self.a[1] * w[0];
                Ok(())
            }
            EquationKind::Euler | EquationKind::NavierStokes => {
                let p = self.pressure(w)?;
                if p <= 0.0 {
                    return Err(EquationError::NonPositivePressure {
                        state: w.to_vec(),
                        pressure: p,
                    });
                }
                let rho = w[0];
                let v1 = w[1] / rho;
                let v2 = w[2] / rho;
                let p_eps = p / (self.epsilon * self.epsilon);
                fx[0] = w[1];
                fx[1] = w[1] * v1 + p_eps;
                fx[2] = w[1] * v2;
                fx[3] = v1 * (w[3] + p);
                fy[0] = w[2];
                fy[1] = w[2] * v1;
                fy[2] = w[2] * v2 + p_eps;
                fy[3] = v2 * (w[3] + p);
                Ok(())
            }
        }
    }

    /// Exact directional derivative of both flux components,
    /// `(dF_x/dw) v` and `(dF_y/dw) v`.
    pub fn flux_jacobian_apply(
        &self,
        w: &[f64],
        v: &[f64],
        out_x: &mut [f64],
        out_y: &mut [f64],
    ) -> Result<(), EquationError> {
        match self.kind {
            EquationKind::Advection => {
                out_x[0] = self.a[0] * v[0];
                out_y[0] = self.a[1] * v[0];
                Ok(())
            }
            EquationKind::Euler | EquationKind::NavierStokes => {
                self.check_admissible(w)?;
                let eps2 = self.epsilon * self.epsilon;
                let rho = w[0];
                let v1 = w[1] / rho;
                let v2 = w[2] / rho;
                let vv = v1 * v1 + v2 * v2;
                let p = (self.gamma - 1.0) * (w[3] - 0.5 * eps2 * rho * vv);
                let dv1 = (v[1] - v1 * v[0]) / rho;
                let dv2 = (v[2] - v2 * v[0]) / rho;
                let dp = (self.gamma - 1.0)
                    * (v[3] - eps2 * (v1 * v[1] + v2 * v[2]) + 0.5 * eps2 * vv * v[0]);
                out_x[0] = v[1];
                out_x[1] = 2.0 * v1 * v[1] - v1 * v1 * v[0] + dp / eps2;
                out_x[2] = v2 * v[1] + v1 * v[2] - v1 * v2 * v[0];
                out_x[3] = dv1 * (w[3] + p) + v1 * (v[3] + dp);
                out_y[0] = v[2];
                out_y[1] = v1 * v[2] + v2 * v[1] - v1 * v2 * v[0];
                out_y[2] = 2.0 * v2 * v[2] - v2 * v2 * v[0] + dp / eps2;
                out_y[3] = dv2 * (w[3] + p) + v2 * (v[3] + dp);
                Ok(())
            }
        }
    }

    /// Componentwise global Lax-Friedrichs dissipation applied to a jump.
    #[inline]
    fn apply_lambda(&self, normal: (f64, f64), jump_in: &[f64], out: &mut [f64]) {
        match self.kind {
            EquationKind::Advection => {
                let lam = (self.a[0] * normal.0 + self.a[1] * normal.1).abs();
                out[0] += lam * jump_in[0];
            }
            EquationKind::Euler | EquationKind::NavierStokes => {
                let inv_eps = 1.0 / self.epsilon;
                out[0] += inv_eps * jump_in[0];
                out[1] += jump_in[1];
                out[2] += jump_in[2];
                out[3] += inv_eps * jump_in[3];
            }
        }
    }

    /// Global Lax-Friedrichs numerical flux
    /// `f* = 1/2 (F(wL) + F(wR)) . n + lambda (wL - wR)`.
    ///
    /// The dissipation term acts on the plain state jump and is not
    /// projected onto the normal.
    pub fn lax_friedrichs(
        &self,
        wl: &[f64],
        wr: &[f64],
        normal: (f64, f64),
        out: &mut [f64],
    ) -> Result<(), EquationError> {
        let nv = self.n_var();
        let mut fxl = [0.0; 4];
        let mut fyl = [0.0; 4];
        let mut fxr = [0.0; 4];
        let mut fyr = [0.0; 4];
        self.physical_flux(wl, &mut fxl[..nv], &mut fyl[..nv])?;
        self.physical_flux(wr, &mut fxr[..nv], &mut fyr[..nv])?;
        let mut jump = [0.0; 4];
        for k in 0..nv {
            out[k] = 0.5 * ((fxl[k] + fxr[k]) * normal.0 + (fyl[k] + fyr[k]) * normal.1);
            jump[k] = wl[k] - wr[k];
        }
        self.apply_lambda(normal, &jump[..nv], out);
        Ok(())
    }

    /// Linearization of the Lax-Friedrichs flux in the state, with the
    /// directions `sigma` traced from both sides:
    /// `1/2 ((dF/dw)(wL) sL + (dF/dw)(wR) sR) . n + lambda (sL - sR)`.
    pub fn linearized_lf(
        &self,
        wl: &[f64],
        wr: &[f64],
        sl: &[f64],
        sr: &[f64],
        normal: (f64, f64),
        out: &mut [f64],
    ) -> Result<(), EquationError> {
        let nv = self.n_var();
        let mut axl = [0.0; 4];
        let mut ayl = [0.0; 4];
        let mut axr = [0.0; 4];
        let mut ayr = [0.0; 4];
        self.flux_jacobian_apply(wl, sl, &mut axl[..nv], &mut ayl[..nv])?;
        self.flux_jacobian_apply(wr, sr, &mut axr[..nv], &mut ayr[..nv])?;
        let mut jump = [0.0; 4];
        for k in 0..nv {
            out[k] = 0.5 * ((axl[k] + axr[k]) * normal.0 + (ayl[k] + ayr[k]) * normal.1);
            jump[k] = sl[k] - sr[k];
        }
        self.apply_lambda(normal, &jump[..nv], out);
        Ok(())
    }

    /// Viscous stress components from a gradient block
    /// `d = (dx v1, dx v2, dx T, dy v1, dy v2, dy T)`.
    #[inline]
    fn stress(&self, d: &[f64]) -> (f64, f64, f64, f64, f64) {
        let tau_xx = self.mu * (4.0 / 3.0 * d[0] - 2.0 / 3.0 * d[4]);
        let tau_yy = self.mu * (4.0 / 3.0 * d[4] - 2.0 / 3.0 * d[0]);
        let tau_xy = self.mu * (d[3] + d[1]);
        let lam = self.thermal_conductivity();
        (tau_xx, tau_yy, tau_xy, lam * d[2], lam * d[5])
    }

    /// Viscous flux `F^v = (0, tau, tau . v + q)` from the state and the
    /// lifted gradients.
    pub fn viscous_flux(
        &self,
        w: &[f64],
        d: &[f64],
        fx: &mut [f64],
        fy: &mut [f64],
    ) -> Result<(), EquationError> {
        self.check_admissible(w)?;
        let v1 = w[1] / w[0];
        let v2 = w[2] / w[0];
        let (tau_xx, tau_yy, tau_xy, qx, qy) = self.stress(d);
        fx[0] = 0.0;
        fx[1] = tau_xx;
        fx[2] = tau_xy;
        fx[3] = tau_xx * v1 + tau_xy * v2 + qx;
        fy[0] = 0.0;
        fy[1] = tau_xy;
        fy[2] = tau_yy;
        fy[3] = tau_xy * v1 + tau_yy * v2 + qy;
        Ok(())
    }

    /// Linearized viscous flux `(dF^v/dw) sigma + (dF^v/dd) eta`, where
    /// `eta` carries the linearized gradients.
    pub fn viscous_flux_linearized(
        &self,
        w: &[f64],
        d: &[f64],
        sigma: &[f64],
        eta: &[f64],
        fx: &mut [f64],
        fy: &mut [f64],
    ) -> Result<(), EquationError> {
        self.check_admissible(w)?;
        let rho = w[0];
        let v1 = w[1] / rho;
        let v2 = w[2] / rho;
        let dv1 = (sigma[1] - v1 * sigma[0]) / rho;
        let dv2 = (sigma[2] - v2 * sigma[0]) / rho;
        let (tau_xx, tau_yy, tau_xy, _, _) = self.stress(d);
        let (dtau_xx, dtau_yy, dtau_xy, dqx, dqy) = self.stress(eta);
        fx[0] = 0.0;
        fx[1] = dtau_xx;
        fx[2] = dtau_xy;
        fx[3] = dtau_xx * v1 + tau_xx * dv1 + dtau_xy * v2 + tau_xy * dv2 + dqx;
        fy[0] = 0.0;
        fy[1] = dtau_xy;
        fy[2] = dtau_yy;
        fy[3] = dtau_xy * v1 + tau_xy * dv1 + dtau_yy * v2 + tau_yy * dv2 + dqy;
        Ok(())
    }

    /// Gradient variables `(v1, v2, T)` with `T = gamma eps^2 p / rho`.
    pub fn grad_vars(&self, w: &[f64], out: &mut [f64]) -> Result<(), EquationError> {
        let p = self.pressure(w)?;
        out[0] = w[1] / w[0];
        out[1] = w[2] / w[0];
        out[2] = self.gamma * self.epsilon * self.epsilon * p / w[0];
        Ok(())
    }

    /// Exact directional derivative `(d w_grad / d w) v`.
    pub fn grad_vars_jacobian_apply(
        &self,
        w: &[f64],
        v: &[f64],
        out: &mut [f64],
    ) -> Result<(), EquationError> {
        self.check_admissible(w)?;
        let eps2 = self.epsilon * self.epsilon;
        let rho = w[0];
        let v1 = w[1] / rho;
        let v2 = w[2] / rho;
        let vv = v1 * v1 + v2 * v2;
        let p = (self.gamma - 1.0) * (w[3] - 0.5 * eps2 * rho * vv);
        let t = self.gamma * eps2 * p / rho;
        let dp = (self.gamma - 1.0)
            * (v[3] - eps2 * (v1 * v[1] + v2 * v[2]) + 0.5 * eps2 * vv * v[0]);
        out[0] = (v[1] - v1 * v[0]) / rho;
        out[1] = (v[2] - v2 * v[0]) / rho;
        out[2] = self.gamma * eps2 * dp / rho - t * v[0] / rho;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_admissible(rng: &mut impl Rng) -> [f64; 4] {
        let rho = 0.5 + rng.random::<f64>();
        let v1 = rng.random::<f64>() - 0.5;
        let v2 = rng.random::<f64>() - 0.5;
        let p = 0.5 + rng.random::<f64>();
        // eps = 1 energy assembly
        [
            rho,
            rho * v1,
            rho * v2,
            p / 0.4 + 0.5 * rho * (v1 * v1 + v2 * v2),
        ]
    }

    #[test]
    fn advection_flux_is_linear() {
        let eq = EquationSystem::advection([0.3, 0.3]);
        let mut fx = [0.0];
        let mut fy = [0.0];
        eq.physical_flux(&[2.0], &mut fx, &mut fy).unwrap();
        assert_eq!(fx[0], 0.6);
        assert_eq!(fy[0], 0.6);
    }

    #[test]
    fn euler_flux_at_rest() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let w = [1.0, 0.0, 0.0, 2.5];
        assert!((eq.pressure(&w).unwrap() - 1.0).abs() < 1e-15);
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        eq.physical_flux(&w, &mut fx, &mut fy).unwrap();
        let expect_x = [0.0, 1.0, 0.0, 0.0];
        let expect_y = [0.0, 0.0, 1.0, 0.0];
        for k in 0..4 {
            assert!((fx[k] - expect_x[k]).abs() < 1e-15);
            assert!((fy[k] - expect_y[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn euler_flux_low_mach_scaling() {
        // same primitive state (rho=1, v=0, p=1) at eps=0.1 has E=2.5 and
        // the momentum flux p/eps^2 = 100
        let eq = EquationSystem::euler(1.4, 0.1);
        let w = [1.0, 0.0, 0.0, 2.5];
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        eq.physical_flux(&w, &mut fx, &mut fy).unwrap();
        assert!((fx[1] - 100.0).abs() < 1e-12);
        assert_eq!(fx[0], 0.0);
        assert_eq!(fx[3], 0.0);
    }

    #[test]
    fn pressure_examples() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let w = [1.0, 0.3, 0.3, 2.545];
        assert!((eq.pressure(&w).unwrap() - 0.982).abs() < 1e-14);
        // zero internal energy
        let w0 = [2.0, 0.6, 0.0, 0.5 * 0.36 / 2.0];
        assert!(eq.pressure(&w0).unwrap().abs() < 1e-15);
        assert!(eq.pressure(&[-1.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn flux_jacobian_matches_finite_differences() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let w = random_admissible(&mut rng);
            let mut dir = [0.0; 4];
            for d in dir.iter_mut() {
                *d = rng.random::<f64>() - 0.5;
            }
            let norm_w = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let h = 1e-6 * (1.0 + norm_w);
            let mut wp = w;
            let mut wm = w;
            for k in 0..4 {
                wp[k] += h * dir[k];
                wm[k] -= h * dir[k];
            }
            let (mut fxp, mut fyp, mut fxm, mut fym) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
            eq.physical_flux(&wp, &mut fxp, &mut fyp).unwrap();
            eq.physical_flux(&wm, &mut fxm, &mut fym).unwrap();
            let mut jx = [0.0; 4];
            let mut jy = [0.0; 4];
            eq.flux_jacobian_apply(&w, &dir, &mut jx, &mut jy).unwrap();
            for k in 0..4 {
                let fdx = (fxp[k] - fxm[k]) / (2.0 * h);
                let fdy = (fyp[k] - fym[k]) / (2.0 * h);
                let sx = 1.0 + jx[k].abs();
                let sy = 1.0 + jy[k].abs();
                assert!((jx[k] - fdx).abs() / sx < 1e-6, "x comp {k}: {} vs {fdx}", jx[k]);
                assert!((jy[k] - fdy).abs() / sy < 1e-6, "y comp {k}: {} vs {fdy}", jy[k]);
            }
        }
    }

    #[test]
    fn flux_jacobian_zero_direction() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let mut jx = [1.0; 4];
        let mut jy = [1.0; 4];
        eq.flux_jacobian_apply(&[1.0, 0.3, 0.3, 2.545], &[0.0; 4], &mut jx, &mut jy)
            .unwrap();
        assert_eq!(jx, [0.0; 4]);
        assert_eq!(jy, [0.0; 4]);
    }

    #[test]
    fn lax_friedrichs_consistency_and_advection_value() {
        let eq = EquationSystem::advection([0.3, 0.3]);
        let mut out = [0.0];
        eq.lax_friedrichs(&[1.0], &[0.0], (1.0, 0.0), &mut out).unwrap();
        assert!((out[0] - 0.45).abs() < 1e-15);

        let eqe = EquationSystem::euler(1.4, 1.0);
        let w = [1.0, 0.3, 0.3, 2.545];
        let mut f = [0.0; 4];
        eqe.lax_friedrichs(&w, &w, (0.0, 1.0), &mut f).unwrap();
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        eqe.physical_flux(&w, &mut fx, &mut fy).unwrap();
        for k in 0..4 {
            assert!((f[k] - fy[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn lax_friedrichs_low_mach_dissipation() {
        // at eps = 0.1 the density/energy jumps are damped 10x stronger
        // than the momentum jumps
        let eq = EquationSystem::euler(1.4, 0.1);
        let wl = [1.0, 0.0, 0.0, 2.5];
        let wr = [1.1, 0.01, -0.01, 2.6];
        let mut f = [0.0; 4];
        let mut favg = [0.0; 4];
        eq.lax_friedrichs(&wl, &wr, (1.0, 0.0), &mut f).unwrap();
        let (mut fxl, mut fyl, mut fxr, mut fyr) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
        eq.physical_flux(&wl, &mut fxl, &mut fyl).unwrap();
        eq.physical_flux(&wr, &mut fxr, &mut fyr).unwrap();
        for k in 0..4 {
            favg[k] = 0.5 * (fxl[k] + fxr[k]);
        }
        assert!((f[0] - favg[0] - 10.0 * (wl[0] - wr[0])).abs() < 1e-12);
        assert!((f[1] - favg[1] - (wl[1] - wr[1])).abs() < 1e-12);
        assert!((f[3] - favg[3] - 10.0 * (wl[3] - wr[3])).abs() < 1e-12);
    }

    #[test]
    fn numerical_flux_is_conservative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eqs = [
            EquationSystem::advection([0.3, -0.4]),
            EquationSystem::euler(1.4, 1.0),
            EquationSystem::euler(1.4, 0.1),
        ];
        for eq in &eqs {
            let nv = eq.n_var();
            for _ in 0..50 {
                let wl = random_admissible(&mut rng);
                let wr = random_admissible(&mut rng);
                for n in [(1.0, 0.0), (0.0, -1.0)] {
                    let mut f_lr = [0.0; 4];
                    let mut f_rl = [0.0; 4];
                    eq.lax_friedrichs(&wl[..nv], &wr[..nv], n, &mut f_lr[..nv]).unwrap();
                    eq.lax_friedrichs(&wr[..nv], &wl[..nv], (-n.0, -n.1), &mut f_rl[..nv])
                        .unwrap();
                    for k in 0..nv {
                        assert!((f_lr[k] + f_rl[k]).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn linearized_lf_matches_finite_differences() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let wl = random_admissible(&mut rng);
            let wr = random_admissible(&mut rng);
            let mut sl = [0.0; 4];
            let mut sr = [0.0; 4];
            for k in 0..4 {
                sl[k] = rng.random::<f64>() - 0.5;
                sr[k] = rng.random::<f64>() - 0.5;
            }
            let n = (0.0, 1.0);
            let h = 1e-7;
            let mut wlp = wl;
            let mut wrp = wr;
            for k in 0..4 {
                wlp[k] += h * sl[k];
                wrp[k] += h * sr[k];
            }
            let mut f0 = [0.0; 4];
            let mut f1 = [0.0; 4];
            let mut lin = [0.0; 4];
            eq.lax_friedrichs(&wl, &wr, n, &mut f0).unwrap();
            eq.lax_friedrichs(&wlp, &wrp, n, &mut f1).unwrap();
            eq.linearized_lf(&wl, &wr, &sl, &sr, n, &mut lin).unwrap();
            for k in 0..4 {
                let fd = (f1[k] - f0[k]) / h;
                assert!((lin[k] - fd).abs() / (1.0 + lin[k].abs()) < 1e-6);
            }
        }
    }

    #[test]
    fn linearized_lf_vanishes_for_zero_sigma() {
        let eq = EquationSystem::euler(1.4, 1.0);
        let w = [1.0, 0.3, 0.3, 2.545];
        let mut out = [0.0; 4];
        eq.linearized_lf(&w, &w, &[0.0; 4], &[0.0; 4], (1.0, 0.0), &mut out)
            .unwrap();
        assert_eq!(out, [0.0; 4]);
    }

    #[test]
    fn viscous_flux_shear_and_dilatation() {
        let eq = EquationSystem::navier_stokes(1.4, 1.0, 0.01, 0.72);
        let w = [1.0, 0.0, 0.0, 2.5];
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        // zero gradients
        eq.viscous_flux(&w, &[0.0; 6], &mut fx, &mut fy).unwrap();
        assert_eq!(fx, [0.0; 4]);
        assert_eq!(fy, [0.0; 4]);
        // pure shear dv1/dy = s
        let s = 2.0;
        let d = [0.0, 0.0, 0.0, s, 0.0, 0.0];
        eq.viscous_flux(&w, &d, &mut fx, &mut fy).unwrap();
        assert!((fx[2] - eq.mu * s).abs() < 1e-15); // tau_xy
        assert!((fy[1] - eq.mu * s).abs() < 1e-15);
        assert_eq!(fx[1], 0.0); // tau_xx
        assert_eq!(fy[2], 0.0); // tau_yy
        // pure dilatation dv1/dx = s
        let d = [s, 0.0, 0.0, 0.0, 0.0, 0.0];
        eq.viscous_flux(&w, &d, &mut fx, &mut fy).unwrap();
        assert!((fx[1] - 4.0 / 3.0 * eq.mu * s).abs() < 1e-15);
        assert!((fy[2] + 2.0 / 3.0 * eq.mu * s).abs() < 1e-15);
    }

    #[test]
    fn viscous_flux_linearization_matches_fd() {
        let eq = EquationSystem::navier_stokes(1.4, 1.0, 1e-2, 0.72);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50 {
            let w = random_admissible(&mut rng);
            let mut d = [0.0; 6];
            let mut sig = [0.0; 4];
            let mut eta = [0.0; 6];
            for x in d.iter_mut().chain(eta.iter_mut()) {
                *x = rng.random::<f64>() - 0.5;
            }
            for x in sig.iter_mut() {
                *x = rng.random::<f64>() - 0.5;
            }
            let h = 1e-7;
            let mut wp = w;
            let mut dp = d;
            for k in 0..4 {
                wp[k] += h * sig[k];
            }
            for k in 0..6 {
                dp[k] += h * eta[k];
            }
            let (mut fx0, mut fy0, mut fx1, mut fy1) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
            eq.viscous_flux(&w, &d, &mut fx0, &mut fy0).unwrap();
            eq.viscous_flux(&wp, &dp, &mut fx1, &mut fy1).unwrap();
            let mut lx = [0.0; 4];
            let mut ly = [0.0; 4];
            eq.viscous_flux_linearized(&w, &d, &sig, &eta, &mut lx, &mut ly).unwrap();
            for k in 0..4 {
                let fdx = (fx1[k] - fx0[k]) / h;
                let fdy = (fy1[k] - fy0[k]) / h;
                assert!((lx[k] - fdx).abs() / (1.0 + lx[k].abs()) < 1e-5);
                assert!((ly[k] - fdy).abs() / (1.0 + ly[k].abs()) < 1e-5);
            }
        }
    }

    #[test]
    fn grad_vars_values_and_jacobian() {
        let eq = EquationSystem::navier_stokes(1.4, 1.0, 1e-3, 0.72);
        let mut g = [0.0; 3];
        eq.grad_vars(&[1.0, 0.0, 0.0, 2.5], &mut g).unwrap();
        assert!((g[0]).abs() < 1e-15);
        assert!((g[1]).abs() < 1e-15);
        assert!((g[2] - 1.4).abs() < 1e-15);

        // velocity is degree-0 homogeneous: (dv/dw) w = 0
        let w = [1.2, 0.4, -0.3, 2.9];
        let mut j = [0.0; 3];
        eq.grad_vars_jacobian_apply(&w, &w, &mut j).unwrap();
        assert!(j[0].abs() < 1e-14);
        assert!(j[1].abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let w = random_admissible(&mut rng);
            let mut v = [0.0; 4];
            for x in v.iter_mut() {
                *x = rng.random::<f64>() - 0.5;
            }
            let h = 1e-7;
            let mut wp = w;
            for k in 0..4 {
                wp[k] += h * v[k];
            }
            let mut g0 = [0.0; 3];
            let mut g1 = [0.0; 3];
            let mut jac = [0.0; 3];
            eq.grad_vars(&w, &mut g0).unwrap();
            eq.grad_vars(&wp, &mut g1).unwrap();
            eq.grad_vars_jacobian_apply(&w, &v, &mut jac).unwrap();
            for k in 0..3 {
                let fd = (g1[k] - g0[k]) / h;
                assert!((jac[k] - fd).abs() / (1.0 + jac[k].abs()) < 1e-6);
            }
        }
    }
}
