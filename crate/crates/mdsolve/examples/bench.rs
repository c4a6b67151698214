use mdsolve::basis::build_basis;
use mdsolve::cases::TestCase;
use mdsolve::dg::{self, DiscreteSpace};
use mdsolve::equations::EquationSystem;
use mdsolve::field::ExtendedState;
use mdsolve::mesh::build_cartesian_mesh;
use mdsolve::solver::{self, SolveSpec};

fn main() {
    for (nx, n) in [(4usize, 3usize), (8, 4), (8, 3), (16, 5)] {
        let mesh = build_cartesian_mesh(nx, nx, (-1.0, 1.0, -1.0, 1.0)).unwrap();
        let space = DiscreteSpace::new(mesh, build_basis(n), EquationSystem::advection([0.3, 0.3]));
        let case = TestCase::sine(&space);
        let w = case.initial_state(&space);
        let r1 = dg::compute_r1(&space, &w).unwrap();
        let r2 = dg::compute_r2(&space, &w, &r1).unwrap();
        let mut b = w.clone();
        b.axpy(0.05, &r1);
        let spec = SolveSpec { alpha1: 0.5, alpha2: 1.0 / 6.0, dt: 0.2, b };
        let x = ExtendedState::new(w.clone(), r1.clone());
        let eval = solver::ResidualEval {
            g: ExtendedState::zeros_like(&x),
            r1,
            r2,
            lift: None,
        };
        let mut max_rel: f64 = 0.0;
        for seed in 0..5u64 {
            // deterministic pseudo-random nodal noise
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(12345);
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let mut dw = space.zero_field();
            let mut ds = space.zero_field();
            for v in dw.as_slice_mut() { *v = next(); }
            for v in ds.as_slice_mut() { *v = next(); }
            let dx = ExtendedState::new(dw, ds);
            let exact = solver::jvp(&space, &spec, &x, &eval, &dx, false).unwrap();
            let fd = solver::jvp(&space, &spec, &x, &eval, &dx, true).unwrap();
            let num = (exact.w.sub(&fd.w).norm_l2().powi(2)
                + exact.sigma.sub(&fd.sigma).norm_l2().powi(2)).sqrt();
            max_rel = max_rel.max(num / exact.norm_l2());
        }
        println!("{nx}x{nx} N={n}: max relative difference {max_rel:.3e}");
    }
}
