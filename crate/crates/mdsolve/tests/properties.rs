//! Property tests for the pointwise physics.

use mdsolve::equations::EquationSystem;
use proptest::prelude::*;

/// Admissible primitive state: positive density and pressure, moderate
/// velocities.
fn primitive() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.3f64..3.0, -1.0f64..1.0, -1.0f64..1.0, 0.3f64..3.0)
}

fn conservative(eq: &EquationSystem, rho: f64, v1: f64, v2: f64, p: f64) -> [f64; 4] {
    let eps2 = eq.epsilon * eq.epsilon;
    [
        rho,
        rho * v1,
        rho * v2,
        p / (eq.gamma - 1.0) + 0.5 * eps2 * rho * (v1 * v1 + v2 * v2),
    ]
}

proptest! {
    #[test]
    fn pressure_inverts_the_energy_assembly(
        (rho, v1, v2, p) in primitive(),
        eps in prop_oneof![Just(1.0), Just(0.1)],
    ) {
        let eq = EquationSystem::euler(1.4, eps);
        let w = conservative(&eq, rho, v1, v2, p);
        let back = eq.pressure(&w).unwrap();
        prop_assert!((back - p).abs() < 1e-12 * (1.0 + p));
    }

    #[test]
    fn numerical_flux_is_conservative_across_the_face(
        (rho_l, v1_l, v2_l, p_l) in primitive(),
        (rho_r, v1_r, v2_r, p_r) in primitive(),
        flip in any::<bool>(),
    ) {
        let eq = EquationSystem::euler(1.4, 1.0);
        let wl = conservative(&eq, rho_l, v1_l, v2_l, p_l);
        let wr = conservative(&eq, rho_r, v1_r, v2_r, p_r);
        let n = if flip { (0.0, 1.0) } else { (1.0, 0.0) };
        let mut f_lr = [0.0; 4];
        let mut f_rl = [0.0; 4];
        eq.lax_friedrichs(&wl, &wr, n, &mut f_lr).unwrap();
        eq.lax_friedrichs(&wr, &wl, (-n.0, -n.1), &mut f_rl).unwrap();
        for k in 0..4 {
            prop_assert!(
                (f_lr[k] + f_rl[k]).abs() < 1e-13 * (1.0 + f_lr[k].abs()),
                "component {k}: {} vs {}", f_lr[k], f_rl[k]
            );
        }
    }

    #[test]
    fn numerical_flux_is_consistent(
        (rho, v1, v2, p) in primitive(),
    ) {
        // equal traces reduce to the physical normal flux
        let eq = EquationSystem::euler(1.4, 1.0);
        let w = conservative(&eq, rho, v1, v2, p);
        let mut f = [0.0; 4];
        eq.lax_friedrichs(&w, &w, (1.0, 0.0), &mut f).unwrap();
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        eq.physical_flux(&w, &mut fx, &mut fy).unwrap();
        for k in 0..4 {
            prop_assert!((f[k] - fx[k]).abs() < 1e-13 * (1.0 + fx[k].abs()));
        }
    }

    #[test]
    fn linearized_flux_is_linear_in_sigma(
        (rho_l, v1_l, v2_l, p_l) in primitive(),
        (rho_r, v1_r, v2_r, p_r) in primitive(),
        scale in 0.1f64..10.0,
    ) {
        let eq = EquationSystem::euler(1.4, 1.0);
        let wl = conservative(&eq, rho_l, v1_l, v2_l, p_l);
        let wr = conservative(&eq, rho_r, v1_r, v2_r, p_r);
        let sl = [0.3, -0.1, 0.2, 0.05];
        let sr = [-0.2, 0.4, 0.0, -0.3];
        let n = (1.0, 0.0);
        let mut base = [0.0; 4];
        eq.linearized_lf(&wl, &wr, &sl, &sr, n, &mut base).unwrap();
        let sl2: Vec<f64> = sl.iter().map(|v| v * scale).collect();
        let sr2: Vec<f64> = sr.iter().map(|v| v * scale).collect();
        let mut scaled = [0.0; 4];
        eq.linearized_lf(&wl, &wr, &sl2, &sr2, n, &mut scaled).unwrap();
        for k in 0..4 {
            prop_assert!(
                (scaled[k] - scale * base[k]).abs() < 1e-11 * (1.0 + scaled[k].abs())
            );
        }
    }
}
