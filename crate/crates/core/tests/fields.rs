use heisenfft_core::field::sample;
use heisenfft_core::linalg::RealMatrix;
use heisenfft_core::{AnalyticField, Error, GridFunction, IndicatorSet, Region, Slice2N, SpatialGrid, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn constant_field_samples_to_ones() {
    let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
    let s = sample(&AnalyticField::constant(2, one()), &grid).unwrap();
    assert!(s.values().iter().all(|v| *v == one()));
}

#[test]
fn gaussian_sample_peak_and_corner() {
    let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
    let g = sample(&AnalyticField::gaussian(2, 0.25).unwrap(), &grid).unwrap();
    let centre = grid.ravel(&[32, 32]);
    assert_eq!(g.values()[centre], one());
    let corner = grid.ravel(&[63, 63]);
    assert!(g.values()[corner].norm() < 1e-10);
}

#[test]
fn chirp_has_unit_modulus() {
    let grid = SpatialGrid::new(1, 4.0, 16).unwrap();
    let c = sample(&AnalyticField::chirp(2, 1.0), &grid).unwrap();
    assert!(c.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
}

#[test]
fn norm_of_ones_on_unit_box() {
    let grid = SpatialGrid::new(1, 1.0, 4).unwrap();
    let s = Slice2N::from_fn(grid, |_| one());
    assert!((s.norm_sq(None).unwrap() - 4.0).abs() < 1e-15);
    assert_eq!(s.norm_sq(Some(&IndicatorSet::empty(grid))).unwrap(), 0.0);
}

#[test]
fn gaussian_norm_is_two_pi() {
    // ∫_{R²} e^{−|z|²/2} dz = 2π.
    let grid = SpatialGrid::new(1, 12.0, 128).unwrap();
    let g = sample(&AnalyticField::gaussian(2, 0.25).unwrap(), &grid).unwrap();
    assert!((g.norm_sq(None).unwrap() / (2.0 * PI) - 1.0).abs() < 1e-6);
}

#[test]
fn norm_is_additive_over_disjoint_regions() {
    let grid = SpatialGrid::new(1, 4.0, 32).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    let f = Slice2N::from_fn(grid, |_| C64::new(rng.random(), rng.random()));
    let ball = IndicatorSet::from_region(grid, &Region::centered_ball(2, 2.0));
    let rest = ball.complement();
    let total = f.norm_sq(None).unwrap();
    let split = f.norm_sq(Some(&ball)).unwrap() + f.norm_sq(Some(&rest)).unwrap();
    assert!((total - split).abs() <= 1e-12 * total);
}

#[test]
fn identity_pushforward_is_identity() {
    let f = AnalyticField::gaussian_at(&[0.3, -1.0], 0.7).unwrap().mul_chirp(0.4);
    let g = f.affine_pushforward(&RealMatrix::identity(2, 2), &[0.0, 0.0]).unwrap();
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..10 {
        let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        assert!((f.eval(&p) - g.eval(&p)).norm() < 1e-15);
    }
}

#[test]
fn rotated_gaussian_is_unchanged() {
    let f = AnalyticField::gaussian(2, 0.25).unwrap();
    let (s, c) = 0.9f64.sin_cos();
    let rot = RealMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let g = f.affine_pushforward(&rot, &[0.0, 0.0]).unwrap();
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..10 {
        let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        assert!((f.eval(&p) - g.eval(&p)).norm() < 1e-14);
    }
}

#[test]
fn dilated_gaussian_matches_closed_form() {
    let f = AnalyticField::gaussian(2, 0.25).unwrap();
    let g = f.affine_pushforward(&(RealMatrix::identity(2, 2) * 2.0), &[0.0, 0.0]).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..10 {
        let p: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let want = (-(p[0] * p[0] + p[1] * p[1])).exp();
        assert!((g.eval(&p).re - want).abs() < 1e-14 && g.eval(&p).im.abs() < 1e-14);
    }
}

#[test]
fn general_affine_pushforward_evaluates_at_image() {
    let f = AnalyticField::gaussian_at(&[0.5, 0.1, -0.3, 0.8], 0.4).unwrap().mul_chirp(-0.3);
    let mut rng = StdRng::seed_from_u64(4);
    let a = RealMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.4..0.4));
    let b: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let g = f.affine_pushforward(&a, &b).unwrap();
    for _ in 0..10 {
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let image: Vec<f64> = (0..4).map(|i| (0..4).map(|j| a[(i, j)] * w[j]).sum::<f64>() + b[i]).collect();
        let (x, y) = (g.eval(&w), f.eval(&image));
        assert!((x - y).norm() <= 1e-12 * y.norm().max(1e-300) + 1e-300, "{x} {y}");
    }
}

#[test]
fn singular_pushforward_rejected() {
    let f = AnalyticField::gaussian(2, 1.0).unwrap();
    let a = RealMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(f.affine_pushforward(&a, &[0.0, 0.0]), Err(Error::SingularMatrix { .. })));
}

#[test]
fn degenerate_grids_rejected() {
    assert!(SpatialGrid::new(1, 1.0, 2).is_err());
    assert!(SpatialGrid::new(1, 1.0, 7).is_err());
    assert!(heisenfft_core::CentralAxis::new(1.0, 2).is_err());
}
