use proptest::prelude::*;
use qcv_core::spin::{
    build_collective_ops, mode_ops, y_polarized, Backend, Propagator, QuasiCv, Space, SpinState, SpinSystem, C64,
};

fn system(n: u64) -> SpinSystem {
    SpinSystem::new(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_the_norm(
        n in 1u64..40,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        c in -1.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let sys = system(n);
        let ops = build_collective_ops(sys);
        let h = (&(&ops.x.scale_real(a) + &(&ops.z * &ops.z).scale_real(b))
            + &(&(&ops.y * &ops.z) + &(&ops.z * &ops.y)).scale_real(c))
            .into_hermitian()
            .unwrap();
        // scale so that |H| t reaches up to 1e3
        let t = t * 1e3 / h.max_norm().max(1e-12);
        let psi = SpinState::coherent(sys, 0.7, 0.3);
        let out = Propagator::new(&h).unwrap().apply(&psi, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn z_rotation_mixes_x_into_y(n in 1u64..30, theta in -3.0f64..3.0, polar in 0.1f64..3.0, azimuth in -3.0f64..3.0) {
        let sys = system(n);
        let ops = build_collective_ops(sys);
        let psi = SpinState::coherent(sys, polar, azimuth);
        let rotated = psi.rotate([0.0, 0.0, 1.0], theta).unwrap();
        let (x0, _) = psi.moments(&ops.x).unwrap();
        let (y0, _) = psi.moments(&ops.y).unwrap();
        let (x1, _) = rotated.moments(&ops.x).unwrap();
        prop_assert!((x1 - (x0 * theta.cos() - y0 * theta.sin())).abs() < 1e-10 * (1.0 + n as f64));
    }
}

#[test]
fn conjugation_by_z_at_one_atom() {
    let sys = system(1);
    let ops = build_collective_ops(sys);
    let theta = 0.4;
    let u = Propagator::new(&ops.z).unwrap().unitary(-theta);
    let lhs = &u * ops.x.to_dense() * u.adjoint();
    let rhs = ops.x.to_dense() * C64::new(theta.cos(), 0.0) - ops.y.to_dense() * C64::new(theta.sin(), 0.0);
    assert!((lhs - rhs).camax() < 1e-12);
}

#[test]
fn krylov_and_eigen_backends_agree() {
    let space = Space::from_atoms(&[6, 8]).unwrap();
    let a = mode_ops(&space, 0).unwrap();
    let b = mode_ops(&space, 1).unwrap();
    let h = (&(&a.z * &b.z) + &(&a.x + &b.y.scale_real(0.5))).into_hermitian().unwrap();
    let psi = SpinState::random(space.clone(), &mut qcv_core::numerics::seeded_rng(7));
    let e = Propagator::with_backend(&h, Backend::Eigen).unwrap().apply(&psi, 2.5).unwrap();
    let k = Propagator::with_backend(&h, Backend::Krylov).unwrap().apply(&psi, 2.5).unwrap();
    assert!((e.vector() - k.vector()).camax() < 1e-9);
}

#[test]
fn quasi_cv_commutator_near_the_y_pole() {
    for n in [10u64, 100, 400] {
        let sys = system(n);
        let cv = QuasiCv::new(sys);
        let psi = y_polarized(sys);
        let c = cv.commutator_expectation(&psi).unwrap();
        let (y, _) = psi.moments(&build_collective_ops(sys).y).unwrap();
        assert!((c - C64::new(0.0, 2.0 * y / n as f64)).norm() < 1e-12);
        assert!((c - C64::new(0.0, 1.0)).norm() <= 3.0 / (n as f64).sqrt());
    }
}
