use heisenfft_core::field::sample;
use heisenfft_core::operators::StencilOrder;
use heisenfft_core::reduction::{
    chain_refinement, chain_verify, euclidean_end, hermite_time, lens_transform, map_potential, rotate_frame,
    rotate_frame_slice, support_transport, ChainConfig, ChainRequest, Direction, PotentialSpec, PotentialStage,
    Reference, TimeProfile,
};
use heisenfft_core::{AnalyticField, Error, GridFunction, SpatialGrid};
use std::f64::consts::FRAC_PI_4;

fn request(tau: f64, times: Vec<f64>) -> ChainRequest {
    ChainRequest {
        initial: AnalyticField::gaussian_at(&[1.0, 0.0], 0.25).unwrap(),
        grid: SpatialGrid::new(1, 10.0, 64).unwrap(),
        lambda: 1.0,
        tau,
        times,
        dt: 1e-3,
        order: StencilOrder::Four,
        potential: None,
    }
}

#[test]
fn free_chain_residuals_and_end_to_end() {
    let rep = chain_verify(&request(0.5, vec![0.5, 0.9])).unwrap();
    println!("{rep:?}");
    assert_eq!(rep.reference, Reference::Factored);
    assert!(rep.r1 < 5e-3 && rep.r2 < 5e-3 && rep.r3 < 5e-3, "{rep:?}");
    assert!(rep.end_to_end.unwrap() < 1e-3, "{rep:?}");
}

#[test]
fn refinement_at_least_halves_residuals() {
    let rep = chain_refinement(&request(0.5, vec![0.5])).unwrap();
    println!("{:?} {:?}", rep.ratios, [rep.coarse.r1, rep.coarse.r2, rep.coarse.r3]);
    assert!(rep.ratios.iter().all(|&r| r <= 0.6), "{:?}", rep.ratios);
}

#[test]
fn potential_chain_uses_split_step_reference() {
    let profile = AnalyticField::gaussian_at(&[0.5, 0.0], 1.0).unwrap().scale(heisenfft_core::C64::new(0.8, 0.0));
    let v = PotentialSpec::new(profile, TimeProfile::Cosine { omega: 2.0 }, None).unwrap();
    let req = ChainRequest { potential: Some(v), ..request(0.5, vec![0.5]) };
    let rep = chain_verify(&req).unwrap();
    println!("{rep:?}");
    assert_eq!(rep.reference, Reference::SplitStep);
    assert!(rep.end_to_end.is_none());
    assert!(rep.r1 < 1e-2 && rep.r2 < 1e-2 && rep.r3 < 1e-2, "{rep:?}");
}

fn pts(seed: u64, count: usize, dim: usize, reach: f64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.random_range(-reach..reach)).collect()).collect()
}

fn off_centre() -> AnalyticField {
    AnalyticField::gaussian_at(&[0.7, -0.4], 0.6).unwrap().mul_chirp(0.2)
}

#[test]
fn rotation_at_zero_time_is_identity() {
    let f = off_centre();
    let g = rotate_frame(&f, 1.0, 0.0, Direction::Forward).unwrap();
    for p in pts(1, 10, 2, 3.0) {
        assert!((f.eval(&p) - g.eval(&p)).norm() < 1e-15);
    }
}

#[test]
fn rotation_point_map_matches_block_matrix() {
    let f = off_centre();
    let s = FRAC_PI_4;
    let g = rotate_frame(&f, 1.0, s, Direction::Forward).unwrap();
    // e^{−sλJ}(1, 0) = (cos sλ, sin sλ).
    let image = [s.cos(), s.sin()];
    assert!((g.eval(&[1.0, 0.0]) - f.eval(&image)).norm() < 1e-14);
}

#[test]
fn rotation_preserves_norm_and_inverts() {
    let grid = SpatialGrid::new(1, 8.0, 96).unwrap();
    let f = off_centre();
    let g = rotate_frame(&f, 1.3, 0.8, Direction::Forward).unwrap();
    let nf = sample(&f, &grid).unwrap().norm_sq(None).unwrap();
    let ng = sample(&g, &grid).unwrap().norm_sq(None).unwrap();
    assert!((nf / ng - 1.0).abs() < 1e-10, "{nf} {ng}");
    let back = rotate_frame(&g, 1.3, 0.8, Direction::Inverse).unwrap();
    for p in pts(2, 20, 2, 4.0) {
        assert!((back.eval(&p) - f.eval(&p)).norm() < 1e-10);
    }
}

#[test]
fn sampled_rotation_reports_error_and_gates_boundary() {
    let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
    let f = off_centre();
    let exact = sample(&rotate_frame(&f, 1.0, 0.6, Direction::Forward).unwrap(), &grid).unwrap();
    let got = rotate_frame_slice(&sample(&f, &grid).unwrap(), 1.0, 0.6, Direction::Forward).unwrap();
    let err = got.slice.sub(&exact).unwrap().values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(err < 1e-2, "{err}");
    assert!(got.interpolation_error > 0.1 * err && got.interpolation_error < 10.0 * err, "{} {err}", got.interpolation_error);
    let wide = sample(&AnalyticField::gaussian(2, 0.01).unwrap(), &grid).unwrap();
    assert!(matches!(rotate_frame_slice(&wide, 1.0, 0.6, Direction::Forward), Err(Error::UnderResolved(_))));
}

#[test]
fn lens_is_identity_at_zero_and_preserves_norm() {
    let grid = SpatialGrid::new(1, 10.0, 128).unwrap();
    let v = off_centre();
    let w0 = lens_transform(&v, 1.0, 0.0, Direction::Forward).unwrap();
    for p in pts(3, 10, 2, 3.0) {
        assert!((w0.eval(&p) - v.eval(&p)).norm() < 1e-15);
    }
    let end = euclidean_end(1.0);
    assert!((hermite_time(1.0, end) - 1.0).abs() < 1e-15);
    let w = lens_transform(&v, 1.0, end, Direction::Forward).unwrap();
    let nv = sample(&v, &grid).unwrap().norm_sq(None).unwrap();
    let nw = sample(&w, &grid).unwrap().norm_sq(None).unwrap();
    assert!((nv / nw - 1.0).abs() < 1e-10, "{nv} {nw}");
    let back = lens_transform(&w, 1.0, end, Direction::Inverse).unwrap();
    for p in pts(4, 20, 2, 4.0) {
        assert!((back.eval(&p) - v.eval(&p)).norm() < 1e-10);
    }
}

#[test]
fn rotation_and_lens_on_two_dimensional_heisenberg() {
    let f = AnalyticField::gaussian_at(&[0.3, 0.0, -0.2, 0.5], 0.5).unwrap();
    let g = rotate_frame(&f, -0.7, 0.9, Direction::Forward).unwrap();
    let w = lens_transform(&g, -0.7, 0.4, Direction::Forward).unwrap();
    let back = rotate_frame(&lens_transform(&w, -0.7, 0.4, Direction::Inverse).unwrap(), -0.7, 0.9, Direction::Inverse)
        .unwrap();
    for p in pts(5, 20, 4, 2.0) {
        assert!((back.eval(&p) - f.eval(&p)).norm() < 1e-10);
    }
}

#[test]
fn potential_maps_keep_bounds() {
    let radial = PotentialSpec::new(AnalyticField::gaussian(2, 1.0).unwrap(), TimeProfile::Constant, None).unwrap();
    let tilde = map_potential(&radial, 1.2, PotentialStage::Tilde).unwrap();
    for p in pts(6, 20, 2, 3.0) {
        assert!((tilde.eval(&p, 0.7) - radial.eval(&p, 0.7)).abs() < 1e-15);
    }
    let skew = AnalyticField::gaussian_at(&[1.0, 0.5], 0.8).unwrap();
    let v = PotentialSpec::new(skew, TimeProfile::Cosine { omega: 1.5 }, None).unwrap();
    assert!((v.sup_bound() - 1.0).abs() < 1e-3, "{}", v.sup_bound());
    let w = map_potential(&v, 1.2, PotentialStage::W).unwrap();
    assert_eq!(w.sup_bound(), v.sup_bound());
    let grid = SpatialGrid::new(1, 6.0, 48).unwrap();
    for s in [0.0, 0.5, euclidean_end(1.2)] {
        let m = w.sample(&grid, s).unwrap().values().iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(m <= w.sup_bound() * (1.0 + 1e-9), "{m}");
    }
    assert!(map_potential(&v, 1.7, PotentialStage::W).is_err());
    assert!(map_potential(&w, 1.2, PotentialStage::Tilde).is_err());
}

#[test]
fn compact_potential_tail_vanishes_beyond_secant_radius() {
    let lambda = 1.0;
    let radius = 1.5;
    let v = PotentialSpec::new(AnalyticField::constant(2, heisenfft_core::C64::new(1.0, 0.0)), TimeProfile::Constant, Some(radius))
        .unwrap();
    let w = map_potential(&v, lambda, PotentialStage::W).unwrap();
    let end = euclidean_end(lambda);
    let edge = radius / lambda.cos();
    assert_eq!(w.tail_integral(edge * 1.001, end, 16), 0.0);
    assert!(w.tail_integral(edge * 0.95, end, 16) > 0.0);
    // Direct evaluation: W(z, s) = c² on |z| ≤ R/c.
    let inside = w.eval(&[edge * 0.99, 0.0], end);
    assert!((inside - lambda.cos().powi(2)).abs() < 1e-12);
    assert_eq!(w.eval(&[edge * 1.01, 0.0], end), 0.0);
}

#[test]
fn support_transport_on_masks() {
    let cfg = ChainConfig::new(1.0, 0.5, 1.0, 2.0).unwrap();
    assert_eq!(cfg.a4(), cfg.a3() / 1.0f64.cos());
    let grid = SpatialGrid::new(1, 8.0, 96).unwrap();
    let rep = support_transport(&cfg, &grid).unwrap();
    assert!(rep.rotation_holds && rep.lens_holds, "{rep:?}");
    // The inclusions are tight up to a cell.
    assert!(rep.rotated_extent >= rep.a3 - 2.0 * rep.cell, "{rep:?}");
    assert!(rep.lensed_extent >= rep.a4 - 2.0 * rep.cell, "{rep:?}");
    assert!(ChainConfig::new(1.6, 0.5, 1.0, 2.0).is_err());
    assert!(ChainConfig::new(0.0, 0.5, 1.0, 2.0).is_err());
}

#[test]
fn chain_at_zero_time_is_exact() {
    let rep = chain_verify(&request(0.0, vec![])).unwrap();
    assert!(rep.end_to_end.unwrap() < 1e-14, "{rep:?}");
    assert_eq!((rep.r1, rep.r2, rep.r3), (0.0, 0.0, 0.0));
    assert!((rep.norms.lensed / rep.norms.initial - 1.0).abs() < 1e-14);
}

#[test]
fn chain_rejects_bad_configurations() {
    assert!(chain_verify(&ChainRequest { lambda: 1.6, ..request(0.5, vec![0.5]) }).is_err());
    assert!(chain_verify(&ChainRequest { lambda: 0.0, ..request(0.5, vec![0.5]) }).is_err());
    assert!(chain_verify(&request(0.5, vec![5e-4])).is_err());
    assert!(chain_verify(&request(1.5, vec![0.5])).is_err());
}
