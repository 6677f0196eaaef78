use heisenfft_core::field::sample;
use heisenfft_core::operators::{
    apply, magnetic_composed, pde_residual, sub_laplacian_composed, OperatorKind, OperatorSpec, SecondDerivative,
    StencilOrder,
};
use heisenfft_core::propagator::propagate_slice_factored;
use heisenfft_core::{AnalyticField, CentralAxis, GridFunction, HeisenbergSample, Slice2N, SpatialGrid, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[test]
fn sub_laplacian_of_radial_gaussian() {
    // Δ e^{−r²/4} = (r²/4 − 1) e^{−r²/4} in two dimensions; t plays no role.
    let grid = SpatialGrid::new(1, 12.0, 128).unwrap();
    let axis = CentralAxis::new(4.0, 8).unwrap();
    let f = HeisenbergSample::from_fn(grid, axis, |z, _| C64::new((-(z[0] * z[0] + z[1] * z[1]) / 4.0).exp(), 0.0));
    let out = apply(&OperatorSpec::new(OperatorKind::SubLaplacian), &f).unwrap();
    let m = axis.points();
    let mut z = [0.0; 2];
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        grid.point(k, &mut z);
        let r2 = z[0] * z[0] + z[1] * z[1];
        let want = (r2 / 4.0 - 1.0) * (-r2 / 4.0).exp();
        for j in 0..m {
            worst = worst.max((out.values()[k * m + j] - want).norm());
        }
    }
    assert!(worst < 1e-4, "{worst}");
    let origin = grid.ravel(&[64, 64]);
    assert!((out.values()[origin * m].re + 1.0).abs() < 1e-4);
}

#[test]
fn constants_are_annihilated() {
    let grid = SpatialGrid::new(1, 4.0, 16).unwrap();
    let axis = CentralAxis::new(2.0, 8).unwrap();
    let one = HeisenbergSample::from_fn(grid, axis, |_, _| C64::new(2.5, -1.0));
    for second in [SecondDerivative::Compact, SecondDerivative::Composed] {
        let out = apply(&OperatorSpec::new(OperatorKind::SubLaplacian).with_second(second), &one).unwrap();
        assert!(out.values().iter().all(|v| v.norm() < 1e-12));
    }
}

#[test]
fn sub_laplacian_is_self_adjoint_on_the_periodic_grid() {
    let grid = SpatialGrid::new(1, 3.0, 12).unwrap();
    let axis = CentralAxis::new(2.0, 8).unwrap();
    let mut rng = StdRng::seed_from_u64(31);
    let mut random = || HeisenbergSample::from_fn(grid, axis, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let (f, g) = (random(), random());
    for order in [StencilOrder::Two, StencilOrder::Four] {
        let spec = OperatorSpec::new(OperatorKind::SubLaplacian).with_order(order);
        let lf = apply(&spec, &f).unwrap();
        let lg = apply(&spec, &g).unwrap();
        let (a, b) = (inner(lf.values(), g.values()), inner(f.values(), lg.values()));
        assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "{a} {b}");
    }
}

#[test]
fn composed_and_expanded_sub_laplacian_agree() {
    let grid = SpatialGrid::new(1, 6.0, 24).unwrap();
    let axis = CentralAxis::new(4.0, 16).unwrap();
    let f = HeisenbergSample::from_fn(grid, axis, |z, t| {
        C64::from_polar((-0.4 * (z[0] * z[0] + z[1] * z[1])).exp(), 0.3 * z[0] + (std::f64::consts::PI * t / 4.0).sin())
    });
    for order in [StencilOrder::Two, StencilOrder::Four] {
        let spec = OperatorSpec::new(OperatorKind::SubLaplacian).with_order(order).with_second(SecondDerivative::Composed);
        let a = apply(&spec, &f).unwrap();
        let b = sub_laplacian_composed(&f, order).unwrap();
        assert!(a.relative_distance(&b).unwrap() < 1e-10);
    }
}

#[test]
fn sub_laplacian_restricts_to_the_twisted_operator() {
    let grid = SpatialGrid::new(1, 6.0, 32).unwrap();
    let axis = CentralAxis::new(4.0, 16).unwrap();
    let g = sample(&AnalyticField::gaussian_at(&[0.4, -0.2], 0.5).unwrap().mul_chirp(0.2), &grid).unwrap();
    for k in [9, 11, 5] {
        let lambda = axis.lambda(k);
        let wave: Vec<C64> = (0..axis.points()).map(|j| C64::from_polar(1.0, -lambda * axis.time(j))).collect();
        let f = HeisenbergSample::separable(&g, &wave, axis).unwrap();
        for second in [SecondDerivative::Compact, SecondDerivative::Composed] {
            let full = apply(&OperatorSpec::new(OperatorKind::SubLaplacian).with_second(second), &f).unwrap();
            let slice = apply(&OperatorSpec::new(OperatorKind::Twisted { lambda }).with_second(second), &g).unwrap();
            let expect = HeisenbergSample::separable(&slice, &wave, axis).unwrap();
            assert!(full.relative_distance(&expect).unwrap() < 1e-8, "lambda {lambda}");
        }
    }
}

#[test]
fn magnetic_and_twisted_forms_coincide() {
    let grid = SpatialGrid::new(1, 6.0, 32).unwrap();
    let g = sample(&AnalyticField::gaussian_at(&[-0.3, 0.6], 0.6).unwrap(), &grid).unwrap();
    let spec = |kind| OperatorSpec::new(kind).with_second(SecondDerivative::Composed);
    let m = apply(&spec(OperatorKind::Magnetic { lambda: -0.7 }), &g).unwrap();
    let t = apply(&spec(OperatorKind::Twisted { lambda: -0.7 }), &g).unwrap();
    assert!(m.relative_distance(&t).unwrap() < 1e-12);
    assert!(m.relative_distance(&magnetic_composed(&g, -0.7, StencilOrder::Four)).unwrap() < 1e-12);
}

#[test]
fn euclidean_plane_wave_residual() {
    let grid = SpatialGrid::new(1, std::f64::consts::PI, 64).unwrap();
    let xi = [1.0, 2.0];
    let dt = 1e-3;
    let path: Vec<Slice2N> = (0..3)
        .map(|k| {
            let s = k as f64 * dt;
            Slice2N::from_fn(grid, |z| C64::from_polar(1.0, xi[0] * z[0] + xi[1] * z[1] - 5.0 * s))
        })
        .collect();
    let r = pde_residual(&path, &OperatorSpec::new(OperatorKind::Euclidean), None, dt).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn zero_path_has_zero_residual() {
    let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
    let path = vec![Slice2N::zeros(grid); 3];
    let r = pde_residual(&path, &OperatorSpec::new(OperatorKind::Twisted { lambda: 1.0 }), None, 1e-3).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn propagated_slices_solve_the_twisted_equation() {
    let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
    let u0 = sample(&AnalyticField::gaussian_at(&[0.5, 0.0], 0.5).unwrap(), &grid).unwrap();
    let (lambda, s, dt) = (1.0, 0.5, 1e-3);
    let path: Vec<Slice2N> =
        [s - dt, s, s + dt].iter().map(|&t| propagate_slice_factored(&u0, lambda, t).unwrap()).collect();
    let r = pde_residual(&path, &OperatorSpec::new(OperatorKind::Twisted { lambda }), None, dt).unwrap();
    assert!(r < 5e-3, "{r}");
}

#[test]
fn second_order_stencils_are_exact_on_quadratics() {
    let grid = SpatialGrid::new(1, 4.0, 16).unwrap();
    let f = Slice2N::from_fn(grid, |z| C64::new(z[0] * z[0] - 3.0 * z[0] * z[1] + 0.5 * z[1] * z[1], 0.0));
    let out = apply(&OperatorSpec::new(OperatorKind::Euclidean).with_order(StencilOrder::Two), &f).unwrap();
    let mut idx = [0; 2];
    for k in 0..grid.len() {
        grid.unravel(k, &mut idx);
        if idx.iter().all(|&i| (1..15).contains(&i)) {
            assert!((out.values()[k] - C64::new(3.0, 0.0)).norm() < 1e-11);
        }
    }
}
