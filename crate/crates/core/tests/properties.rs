use heisenfft_core::annihilation::estimate_constant;
use heisenfft_core::central::{forward_central, inverse_central};
use heisenfft_core::counterexample::BumpProfile;
use heisenfft_core::field::sample;
use heisenfft_core::linalg::RealMatrix;
use heisenfft_core::propagator::KernelParams;
use heisenfft_core::reduction::{euclidean_time, hermite_time, lens_transform, rotate_frame, ChainConfig, Direction};
use heisenfft_core::splitstep::HarmonicPropagator;
use heisenfft_core::{
    AnalyticField, CentralAxis, GridFunction, HeisenbergSample, IndicatorSet, Region, Slice2N, SpatialGrid, C64,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn random_sample(seed: u64, grid: SpatialGrid, axis: CentralAxis) -> HeisenbergSample {
    let mut rng = StdRng::seed_from_u64(seed);
    HeisenbergSample::from_fn(grid, axis, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_slice(rng: &mut StdRng, grid: SpatialGrid) -> Slice2N {
    Slice2N::from_fn(grid, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn nonsingular() -> impl Strategy<Value = (f64, f64)> {
    (-3.0f64..3.0, 0.05f64..3.0).prop_filter("singular", |&(l, s)| {
        let q = (l * s / PI).abs();
        l.abs() > 1e-3 && (q - q.round()).abs() > 0.02
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn central_round_trip_and_plancherel(seed in any::<u64>(), t in 1.0f64..10.0, m in prop::sample::select(vec![8usize, 16])) {
        let grid = SpatialGrid::new(1, 2.0, 8).unwrap();
        let axis = CentralAxis::new(t, m).unwrap();
        let f = random_sample(seed, grid, axis);
        let stack = forward_central(&f);
        let back = inverse_central(&stack);
        prop_assert!(back.relative_distance(&f).unwrap() < 1e-12);
        let lhs = f.norm_sq(None).unwrap();
        prop_assert!((stack.norm_sq() / lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_transform_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = SpatialGrid::new(1, 2.0, 8).unwrap();
        let axis = CentralAxis::new(3.0, 8).unwrap();
        let (f, g) = (random_sample(seed, grid, axis), random_sample(seed ^ 0x5a5a, grid, axis));
        let c = C64::new(a, b);
        let combo = HeisenbergSample::new(grid, axis, f.values().iter().zip(g.values()).map(|(x, y)| x * c + y).collect()).unwrap();
        let (sf, sg, sc) = (forward_central(&f), forward_central(&g), forward_central(&combo));
        for k in 0..axis.points() {
            let vals = sf.slice(k).values().iter().zip(sg.slice(k).values()).map(|(x, y)| x * c + y).collect();
            let want = Slice2N::new(grid, vals).unwrap();
            prop_assert!((sc.slice(k).sub(&want).unwrap().norm_sq(None).unwrap()).sqrt() <= 1e-12 * (1.0 + want.norm_sq(None).unwrap().sqrt()));
        }
    }

    #[test]
    fn norm_is_additive_over_a_partition(seed in any::<u64>(), r in 0.2f64..2.5) {
        let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_slice(&mut rng, grid);
        let a = IndicatorSet::from_region(grid, &Region::centered_ball(2, r));
        let total = f.norm_sq(None).unwrap();
        let split = f.norm_sq(Some(&a)).unwrap() + f.norm_sq(Some(&a.complement())).unwrap();
        prop_assert!((split - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn pushforward_evaluates_at_the_image(seed in any::<u64>(), a in 0.2f64..1.0, chirp in -0.5f64..0.5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let centre = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = AnalyticField::gaussian_at(&centre, a).unwrap().mul_chirp(chirp);
        let m = RealMatrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.3..0.3));
        let b = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let g = f.affine_pushforward(&m, &b).unwrap();
        let w = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let image = [m[(0, 0)] * w[0] + m[(0, 1)] * w[1] + b[0], m[(1, 0)] * w[0] + m[(1, 1)] * w[1] + b[1]];
        let (x, y) = (g.eval(&w), f.eval(&image));
        prop_assert!((x - y).norm() <= 1e-12 * y.norm() + 1e-300);
    }

    #[test]
    fn j_map_determinant_and_unimodular_chirp((lambda, s) in nonsingular(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let map = KernelParams::new(lambda, s, 1).unwrap().j_map();
        let cot = 1.0 / (lambda * s).tan();
        let expect = (lambda / 2.0).powi(2) * (1.0 + cot * cot);
        prop_assert!((map.det() / expect - 1.0).abs() < 1e-10);
        prop_assert!((map.chirp(&[x, y]).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn observability_constant_is_time_reversal_symmetric(r1 in 0.6f64..1.8, r2 in 0.6f64..1.8, lambda in 0.3f64..1.5, s in 0.2f64..1.2) {
        let grid = SpatialGrid::new(1, 2.0, 8).unwrap();
        let a = IndicatorSet::from_region(grid, &Region::cube(2, r1));
        let b = IndicatorSet::from_region(grid, &Region::centered_ball(2, r2));
        let fwd = estimate_constant(&a, &b, lambda, s).unwrap();
        let back = estimate_constant(&b, &a, lambda, -s).unwrap();
        prop_assume!(!fwd.degenerate && !back.degenerate);
        prop_assert!((fwd.constant / back.constant - 1.0).abs() < 1e-6, "{} {}", fwd.constant, back.constant);
    }

    #[test]
    fn observability_constant_dominates(seed in any::<u64>(), r in 0.6f64..1.5, lambda in 0.3f64..1.5) {
        let grid = SpatialGrid::new(1, 2.0, 8).unwrap();
        let set = IndicatorSet::from_region(grid, &Region::cube(2, r));
        let est = estimate_constant(&set, &set, lambda, 1.0).unwrap();
        prop_assume!(!est.degenerate);
        let u = HarmonicPropagator::new(grid, lambda, 1.0).unwrap();
        let out = set.complement();
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_slice(&mut rng, grid);
        let lhs = f.norm_sq(None).unwrap();
        let rhs = f.norm_sq(Some(&out)).unwrap() + u.apply(&f).unwrap().norm_sq(Some(&out)).unwrap();
        prop_assert!(lhs <= est.constant * rhs * (1.0 + 1e-8));
    }

    #[test]
    fn bump_solution_shift_law_and_decay(alpha in 0.5f64..4.0, x in -3.0f64..3.0, y in -3.0f64..3.0, t in -5.0f64..5.0, s in 0.0f64..2.0, d in -1.0f64..1.0) {
        let profile = BumpProfile::new(alpha).unwrap();
        let z = [x, y];
        let base = profile.eval_u(&z, t, s);
        let shifted = profile.eval_u(&z, t + d, s + d);
        prop_assert!((base - shifted).norm() <= 1e-12 * (1.0 + base.norm()));
        let peak = profile.eval_u(&[0.0, 0.0], 0.0, 0.0).norm();
        let envelope = (-0.25 * alpha * (x * x + y * y)).exp() * peak;
        prop_assert!(base.norm() <= envelope * (1.0 + 1e-12));
    }

    #[test]
    fn rotation_round_trip_and_norm(seed in any::<u64>(), lambda in -1.5f64..1.5, s in 0.0f64..1.0, a in 0.5f64..1.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let centre = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = AnalyticField::gaussian_at(&centre, a).unwrap().mul_chirp(0.1);
        let there = rotate_frame(&f, lambda, s, Direction::Forward).unwrap();
        let back = rotate_frame(&there, lambda, s, Direction::Inverse).unwrap();
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        prop_assert!((back.eval(&p) - f.eval(&p)).norm() < 1e-12);
        let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
        let (n0, n1) = (sample(&f, &grid).unwrap().norm_sq(None).unwrap(), sample(&there, &grid).unwrap().norm_sq(None).unwrap());
        prop_assert!((n1 / n0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lens_round_trip_and_norm(seed in any::<u64>(), lambda in 0.1f64..1.0, frac in 0.0f64..1.0, a in 0.5f64..1.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let centre = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let f = AnalyticField::gaussian_at(&centre, a).unwrap();
        let s = frac * lambda.tan() / lambda;
        let there = lens_transform(&f, lambda, s, Direction::Forward).unwrap();
        let back = lens_transform(&there, lambda, s, Direction::Inverse).unwrap();
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        prop_assert!((back.eval(&p) - f.eval(&p)).norm() < 1e-12);
        let grid = SpatialGrid::new(1, 10.0, 64).unwrap();
        let (n0, n1) = (sample(&f, &grid).unwrap().norm_sq(None).unwrap(), sample(&there, &grid).unwrap().norm_sq(None).unwrap());
        prop_assert!((n1 / n0 - 1.0).abs() < 1e-6, "{}", n1 / n0);
    }

    #[test]
    fn time_maps_are_inverse(lambda in 0.05f64..1.5, s in 0.0f64..50.0) {
        let sigma = hermite_time(lambda, s);
        prop_assert!(sigma >= 0.0 && sigma < PI / (2.0 * lambda));
        prop_assert!((euclidean_time(lambda, sigma) - s).abs() <= 1e-9 * (1.0 + s));
        prop_assert!((hermite_time(-lambda, s) - sigma).abs() < 1e-15);
    }

    #[test]
    fn lens_strip_widens_by_secant(lambda in -1.5f64..1.5, a1 in 0.1f64..5.0) {
        prop_assume!(lambda.abs() > 1e-3);
        let cfg = ChainConfig::new(lambda, 1.0, a1, 1.0).unwrap();
        prop_assert!((cfg.a4() * lambda.abs().cos() - cfg.a3()).abs() < 1e-12 * cfg.a4());
        prop_assert!((cfg.a3() - 2f64.sqrt() * a1).abs() < 1e-12 * a1);
    }
}
