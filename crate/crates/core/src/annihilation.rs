//! Restricted-norm inequalities for the pair `(u_0, u(·, s_0))` and their
//! empirical constants.
//!
//! The discrete constant of a pair `(S, Σ)` is `C = 1/σ_min²` where `σ_min` is
//! the smallest singular value of `f ↦ (1_{S^c} f, 1_{Σ^c} U f)`, `U` an exactly
//! unitary grid propagator ([`HarmonicPropagator`]). By construction
//! `‖f‖² ≤ C (‖f‖²_{S^c} + ‖U f‖²_{Σ^c})` for every grid function `f`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::central::forward_central;
use crate::error::{Error, Result};
use crate::field::{GridFunction, HeisenbergSample, Slice2N};
use crate::grid::SpatialGrid;
use crate::linalg::{lanczos_smallest, RealMatrix};
use crate::propagator::{is_singular, mehler_coefficients, propagate};
use crate::sets::IndicatorSet;
use crate::splitstep::HarmonicPropagator;
use crate::C64;

/// Largest points-per-axis for dense assembly.
pub const DENSE_MAX_POINTS: usize = 48;
/// Below this `σ_min` the pair is treated as numerically annihilating-degenerate.
pub const DEGENERATE_SIGMA: f64 = 1e-12;
/// Gram eigenvalues below this are re-derived from an SVD of the stacked map.
const GRAM_REFINE: f64 = 1e-10;
/// Relative slice mass below which a λ counts as outside the band.
const BAND_EPS: f64 = 1e-20;

/// `2ⁿ a^{2n} / sin^{2n}(s_0 a)`, the κ-free factor of κ′. Requires
/// `0 ≤ a`, `0 < s_0` and `s_0 a < π`.
pub fn kappa_prime(n: usize, a: f64, s0: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) || !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::Domain(alloc::format!("need a >= 0 and s0 > 0, got a = {a}, s0 = {s0}")));
    }
    let x = s0 * a;
    if x >= PI {
        return Err(Error::Domain(alloc::format!("s0*a = {x} must be below pi")));
    }
    // a / sin(s_0 a) = (x / sin x) / s_0.
    let ratio = if x < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0
    } else {
        x / libm::sin(x)
    };
    let base = ratio / s0;
    Ok(libm::pow(2.0, n as f64) * libm::pow(base, 2.0 * n as f64))
}

/// `(λ/2)^{2n} (cot²(λs) + 1)^n = det J_λ`, the factor with `|J_λ Σ| = det J_λ · |Σ|`.
pub fn j_determinant(n: usize, lambda: f64, s: f64) -> Result<f64> {
    if is_singular(lambda, s) || s == 0.0 {
        return Err(Error::SingularLambda { lambda, s });
    }
    let (a, _) = mehler_coefficients(lambda, s);
    Ok(libm::pow(0.5 * a, 2.0 * n as f64))
}

/// `κ e^{κ K |S||Σ|}` with `K = kappa_prime(n, a, s_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Envelope {
    pub kappa: f64,
    pub kappa_prime_factor: f64,
}

impl Envelope {
    pub fn new(kappa: f64, n: usize, a: f64, s0: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(alloc::format!("kappa = {kappa} must be positive")));
        }
        Ok(Self { kappa, kappa_prime_factor: kappa_prime(n, a, s0)? })
    }

    pub fn value(&self, s_measure: f64, sigma_measure: f64) -> f64 {
        envelope(self.kappa, self.kappa_prime_factor * s_measure * sigma_measure)
    }
}

/// `κ e^{κ w}`.
pub fn envelope(kappa: f64, weight: f64) -> f64 {
    kappa * libm::exp(kappa * weight)
}

/// Smallest κ with `κ e^{κ w_i} ≥ C_i` for every sample `(C_i, w_i)`, `w_i ≥ 0`.
/// The map `κ ↦ κ e^{κ w}` is increasing, so each sample is solved by
/// bisection and the maximum returned.
pub fn calibrate_kappa(samples: &[(f64, f64)]) -> Result<f64> {
    let mut kappa: f64 = 0.0;
    for &(c, w) in samples {
        if !(c.is_finite() && c > 0.0) || !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Domain(alloc::format!("cannot calibrate against C = {c}, weight = {w}")));
        }
        // κ e^{κw} at κ = C is ≥ C, so the root lies in (0, C].
        let (mut lo, mut hi) = (0.0, c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if envelope(mid, w) >= c {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        kappa = kappa.max(hi);
    }
    Ok(kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EstimateMethod {
    /// Hermitian eigensolve of the assembled Gram matrix, SVD-refined near 0.
    Dense,
    /// Matrix-free Lanczos on the Gram operator.
    Lanczos,
}

/// Empirical constant of a restricted-norm inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantEstimate {
    pub sigma_min: f64,
    /// `1/σ_min²`; `+∞` when degenerate.
    pub constant: f64,
    pub method: EstimateMethod,
    /// `‖G v − σ²v‖` for the reported unit vector `v`.
    pub residual: f64,
    /// `σ_min < DEGENERATE_SIGMA`: no finite constant.
    pub degenerate: bool,
}

impl ConstantEstimate {
    fn from_sigma(sigma: f64, method: EstimateMethod, residual: f64) -> Self {
        let degenerate = sigma < DEGENERATE_SIGMA;
        let constant = if degenerate { f64::INFINITY } else { 1.0 / (sigma * sigma) };
        Self { sigma_min: sigma, constant, method, residual, degenerate }
    }
}

/// Options for [`estimate_constant_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// `None` picks dense up to [`DENSE_MAX_POINTS`], Lanczos above.
    pub method: Option<EstimateMethod>,
    pub lanczos_iterations: usize,
    pub lanczos_tol: f64,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { method: None, lanczos_iterations: 400, lanczos_tol: 1e-10, seed: 0x5eed }
    }
}

/// One observation `‖U f‖²_{outside}`; `evolution = None` is the identity.
struct Branch<'a> {
    outside: &'a IndicatorSet,
    evolution: Option<&'a HarmonicPropagator>,
}

/// Constant for the pair `(S, Σ)` at `(λ, s)`: `f ↦ (1_{S^c} f, 1_{Σ^c} U_{λ,s} f)`.
/// Negative `s` gives the time-reversed pair.
pub fn estimate_constant(s_set: &IndicatorSet, sigma_set: &IndicatorSet, lambda: f64, s: f64) -> Result<ConstantEstimate> {
    estimate_constant_with(s_set, sigma_set, lambda, s, &EstimateOptions::default())
}

pub fn estimate_constant_with(
    s_set: &IndicatorSet,
    sigma_set: &IndicatorSet,
    lambda: f64,
    s: f64,
    options: &EstimateOptions,
) -> Result<ConstantEstimate> {
    let grid = shared_grid(s_set, sigma_set)?;
    if is_singular(lambda, s) {
        return Err(Error::SingularLambda { lambda, s });
    }
    let u = HarmonicPropagator::new(grid, lambda, s)?;
    let (s_out, sigma_out) = (s_set.complement(), sigma_set.complement());
    stacked_estimate(
        &grid,
        &[Branch { outside: &s_out, evolution: None }, Branch { outside: &sigma_out, evolution: Some(&u) }],
        options,
    )
}

fn shared_grid(a: &IndicatorSet, b: &IndicatorSet) -> Result<SpatialGrid> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("S and Sigma live on different grids"));
    }
    Ok(*a.grid())
}

fn stacked_estimate(grid: &SpatialGrid, branches: &[Branch<'_>], options: &EstimateOptions) -> Result<ConstantEstimate> {
    let method = options.method.unwrap_or(if grid.points() <= DENSE_MAX_POINTS {
        EstimateMethod::Dense
    } else {
        EstimateMethod::Lanczos
    });
    match method {
        EstimateMethod::Dense => {
            if grid.points() > DENSE_MAX_POINTS {
                return Err(Error::TooLarge { max: DENSE_MAX_POINTS, got: grid.points() });
            }
            Ok(dense_estimate(grid, branches))
        }
        EstimateMethod::Lanczos => Ok(lanczos_estimate(grid, branches, options)),
    }
}

/// Rows of the stacked map contributed by one branch.
fn branch_rows(grid: &SpatialGrid, b: &Branch<'_>) -> DMatrix<C64> {
    let len = grid.len();
    let rows: Vec<usize> = (0..len).filter(|&k| b.outside.mask()[k]).collect();
    let mut out = DMatrix::<C64>::zeros(rows.len(), len);
    match b.evolution {
        None => {
            for (r, &k) in rows.iter().enumerate() {
                out[(r, k)] = C64::new(1.0, 0.0);
            }
        }
        Some(u) => {
            let m = u.matrix();
            for (r, &k) in rows.iter().enumerate() {
                out.row_mut(r).copy_from(&m.row(k));
            }
        }
    }
    out
}

fn dense_estimate(grid: &SpatialGrid, branches: &[Branch<'_>]) -> ConstantEstimate {
    let len = grid.len();
    let blocks: Vec<DMatrix<C64>> = branches.iter().map(|b| branch_rows(grid, b)).collect();
    let mut gram = DMatrix::<C64>::zeros(len, len);
    for block in &blocks {
        gram += block.adjoint() * block;
    }
    let eig = gram.clone().symmetric_eigen();
    let (imin, &mu) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let v = eig.eigenvectors.column(imin).into_owned();
    let residual = (&gram * &v - v.map(|x| x * mu)).norm();
    if mu >= GRAM_REFINE {
        return ConstantEstimate::from_sigma(libm::sqrt(mu), EstimateMethod::Dense, residual);
    }
    // Squaring loses half the digits near zero; go back to the stacked map.
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::<C64>::zeros(rows.max(len), len);
    let mut r0 = 0;
    for block in &blocks {
        stacked.view_mut((r0, 0), (block.nrows(), len)).copy_from(block);
        r0 += block.nrows();
    }
    let sigma = stacked.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    ConstantEstimate::from_sigma(sigma, EstimateMethod::Dense, residual)
}

fn lanczos_estimate(grid: &SpatialGrid, branches: &[Branch<'_>], options: &EstimateOptions) -> ConstantEstimate {
    let len = grid.len();
    let adjoints: Vec<Option<HarmonicPropagator>> =
        branches.iter().map(|b| b.evolution.map(|u| u.inverse())).collect();
    let mut tmp = alloc::vec![C64::new(0.0, 0.0); len];
    let upper = branches.len() as f64;
    let est = lanczos_smallest(len, upper, options.lanczos_iterations, options.lanczos_tol, options.seed, |x, y| {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (b, adj) in branches.iter().zip(&adjoints) {
            tmp.copy_from_slice(x);
            if let Some(u) = b.evolution {
                u.apply_in_place(&mut tmp);
            }
            for (t, &m) in tmp.iter_mut().zip(b.outside.mask()) {
                if !m {
                    *t = C64::new(0.0, 0.0);
                }
            }
            if let Some(ua) = adj {
                ua.apply_in_place(&mut tmp);
            }
            for (yi, ti) in y.iter_mut().zip(&tmp) {
                *yi += ti;
            }
        }
    });
    ConstantEstimate::from_sigma(libm::sqrt(est.value), EstimateMethod::Lanczos, est.residual)
}

/// Per-λ line of a [`PairReport`]; norms carry the `Δλ/2π` weight.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaRow {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs_outside_s: f64,
    pub rhs_outside_sigma: f64,
    pub ratio: f64,
    /// `det J_λ`; `None` at singular λ.
    pub j_determinant: Option<f64>,
    pub excluded: bool,
}

/// Measured sides of a restricted-norm inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairReport {
    pub lhs: f64,
    pub rhs_outside_s: f64,
    pub rhs_outside_sigma: f64,
    /// `lhs / (rhs_outside_s + rhs_outside_sigma)`; `+∞` when the sum is 0.
    pub ratio: f64,
    /// Envelope value, when supplied and applicable.
    pub bound: Option<f64>,
    /// `lhs ≤ bound · rhs`, when a bound is present.
    pub bound_holds: Option<bool>,
    /// Empirical best constant, when computed.
    pub constant: Option<ConstantEstimate>,
    pub s_measure: f64,
    pub sigma_measure: f64,
    /// One-cell-layer measure uncertainty of each mask.
    pub s_measure_uncertainty: f64,
    pub sigma_measure_uncertainty: f64,
    /// Smallest `a` with the data supported in `|λ| ≤ a`, when measured.
    pub band_limit: Option<f64>,
    pub excluded_mass_fraction: f64,
    pub per_lambda: Vec<LambdaRow>,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

/// Evolves `u_0` to `s_0` and measures `‖u_0‖²` against
/// `‖u_0‖²_{S^c×R} + ‖u(s_0)‖²_{Σ^c×R}`, aggregated and per λ. With an
/// envelope, `bound = κ e^{κ′|S||Σ|}` is reported when the data is
/// band-limited in `|λ| ≤ a` with `s_0 a < π` (`a` the measured band).
pub fn dynamical_pair_report(
    u0: &HeisenbergSample,
    s_set: &IndicatorSet,
    sigma_set: &IndicatorSet,
    s0: f64,
    kappa: Option<f64>,
) -> Result<PairReport> {
    let grid = shared_grid(s_set, sigma_set)?;
    if u0.grid() != &grid {
        return Err(Error::GridMismatch("field and sets live on different grids"));
    }
    let lhs = u0.norm_sq(None)?;
    if lhs == 0.0 {
        return Err(Error::ZeroInput);
    }
    let (s_out, sigma_out) = (s_set.complement(), sigma_set.complement());
    let evolved = propagate(u0, s0)?;
    let rhs_s = u0.norm_sq(Some(&s_out))?;
    let rhs_sigma = evolved.field.norm_sq(Some(&sigma_out))?;

    let before = forward_central(u0);
    let after = forward_central(&evolved.field);
    let weight = before.axis().lambda_spacing() / (2.0 * PI);
    let n = grid.n();
    let mut per_lambda = Vec::with_capacity(before.axis().points());
    let mut band: f64 = 0.0;
    for k in 0..before.axis().points() {
        let lambda = before.lambda(k);
        let l = weight * before.slice(k).norm_sq_total();
        let rs = weight * before.slice(k).norm_sq(Some(&s_out))?;
        let rg = weight * after.slice(k).norm_sq(Some(&sigma_out))?;
        if l > BAND_EPS * lhs {
            band = band.max(lambda.abs());
        }
        per_lambda.push(LambdaRow {
            lambda,
            lhs: l,
            rhs_outside_s: rs,
            rhs_outside_sigma: rg,
            ratio: ratio(l, rs + rg),
            j_determinant: if s0 > 0.0 { j_determinant(n, lambda, s0).ok() } else { None },
            excluded: evolved.excluded.contains(&k),
        });
    }

    let (sm, gm) = (s_set.measure(), sigma_set.measure());
    let bound = match kappa {
        Some(kappa) if s0 > 0.0 && s0 * band < PI => Some(Envelope::new(kappa, n, band, s0)?.value(sm, gm)),
        _ => None,
    };
    let rhs = rhs_s + rhs_sigma;
    Ok(PairReport {
        lhs,
        rhs_outside_s: rhs_s,
        rhs_outside_sigma: rhs_sigma,
        ratio: ratio(lhs, rhs),
        bound,
        bound_holds: bound.map(|b| lhs <= b * rhs),
        constant: None,
        s_measure: sm,
        sigma_measure: gm,
        s_measure_uncertainty: s_set.boundary_layer_measure(),
        sigma_measure_uncertainty: sigma_set.boundary_layer_measure(),
        band_limit: Some(band),
        excluded_mass_fraction: evolved.excluded_mass_fraction,
        per_lambda,
    })
}

/// Two-time observability at fixed λ: `‖u_0‖²` against
/// `‖U_{s_1} u_0‖²_{S^c} + ‖U_{s_2} u_0‖²_{Σ^c}`, with the best constant of the
/// stacked map `f ↦ (1_{S^c} U_{s_1} f, 1_{Σ^c} U_{s_2} f)`.
pub fn observability_report(
    u0: &Slice2N,
    s_set: &IndicatorSet,
    sigma_set: &IndicatorSet,
    lambda: f64,
    s1: f64,
    s2: f64,
) -> Result<PairReport> {
    let grid = shared_grid(s_set, sigma_set)?;
    if u0.grid() != &grid {
        return Err(Error::GridMismatch("field and sets live on different grids"));
    }
    if !(s1 >= 0.0 && s2 > s1) {
        return Err(Error::Domain(alloc::format!("need s2 > s1 >= 0, got s1 = {s1}, s2 = {s2}")));
    }
    if is_singular(lambda, s2 - s1) {
        return Err(Error::SingularLambda { lambda, s: s2 - s1 });
    }
    let lhs = u0.norm_sq(None)?;
    if lhs == 0.0 {
        return Err(Error::ZeroInput);
    }
    let u1 = if s1 > 0.0 { Some(HarmonicPropagator::new(grid, lambda, s1)?) } else { None };
    let u2 = HarmonicPropagator::new(grid, lambda, s2)?;
    let (s_out, sigma_out) = (s_set.complement(), sigma_set.complement());
    let at_s1 = match &u1 {
        Some(u) => u.apply(u0)?,
        None => u0.clone(),
    };
    let at_s2 = u2.apply(u0)?;
    let rhs_s = at_s1.norm_sq(Some(&s_out))?;
    let rhs_sigma = at_s2.norm_sq(Some(&sigma_out))?;
    let constant = stacked_estimate(
        &grid,
        &[Branch { outside: &s_out, evolution: u1.as_ref() }, Branch { outside: &sigma_out, evolution: Some(&u2) }],
        &EstimateOptions::default(),
    )?;
    let rhs = rhs_s + rhs_sigma;
    Ok(PairReport {
        lhs,
        rhs_outside_s: rhs_s,
        rhs_outside_sigma: rhs_sigma,
        ratio: ratio(lhs, rhs),
        bound: Some(constant.constant),
        bound_holds: Some(lhs <= constant.constant * rhs * (1.0 + 1e-10)),
        constant: Some(constant),
        s_measure: s_set.measure(),
        sigma_measure: sigma_set.measure(),
        s_measure_uncertainty: s_set.boundary_layer_measure(),
        sigma_measure_uncertainty: sigma_set.boundary_layer_measure(),
        band_limit: None,
        excluded_mass_fraction: 0.0,
        per_lambda: Vec::new(),
    })
}

/// Mask measure of `J_λ Σ` against `det J_λ · |Σ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageMeasure {
    pub mask_measure: f64,
    pub predicted: f64,
    /// Combined one-cell-layer uncertainty of both masks.
    pub tolerance: f64,
}

impl ImageMeasure {
    pub fn within_tolerance(&self) -> bool {
        (self.mask_measure - self.predicted).abs() <= self.tolerance
    }
}

/// Builds the mask of `J_λ Σ` on `Σ`'s grid (a point `ξ` is inside when
/// `J_λ^{-1} ξ` rounds to a cell of `Σ`) and compares measures.
pub fn j_image_measure(sigma_set: &IndicatorSet, lambda: f64, s: f64) -> Result<ImageMeasure> {
    let grid = *sigma_set.grid();
    let det = j_determinant(grid.n(), lambda, s)?;
    let map = crate::propagator::KernelParams::new(lambda, s, grid.n())?.j_map();
    let inv: RealMatrix = crate::linalg::checked_inverse(&map.matrix())?;
    let dim = grid.dim();
    let (h, l, np) = (grid.spacing(), grid.extent(), grid.points());
    let mut xi = [0.0; 4];
    let mut idx = [0usize; 4];
    let mask: Vec<bool> = (0..grid.len())
        .map(|k| {
            grid.point(k, &mut xi[..dim]);
            for i in 0..dim {
                let z: f64 = (0..dim).map(|j| inv[(i, j)] * xi[j]).sum();
                let r = libm::round((z + l) / h);
                if r < 0.0 || r >= np as f64 {
                    return false;
                }
                idx[i] = r as usize;
            }
            sigma_set.mask()[grid.ravel(&idx[..dim])]
        })
        .collect();
    let image = IndicatorSet::from_mask(grid, mask)?;
    if (0..grid.len()).any(|k| image.mask()[k] && grid.on_boundary(k)) {
        return Err(Error::UnderResolved("J_lambda Sigma reaches the grid boundary".into()));
    }
    Ok(ImageMeasure {
        mask_measure: image.measure(),
        predicted: det * sigma_set.measure(),
        tolerance: image.boundary_layer_measure() + det * sigma_set.boundary_layer_measure(),
    })
}

/// One configuration of a constant sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub s_measure: f64,
    pub sigma_measure: f64,
    pub lambda: f64,
    pub s: f64,
    pub sigma_min: f64,
    pub constant: f64,
    pub envelope: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Region;

    #[test]
    fn kappa_prime_values() {
        let v = kappa_prime(1, 1.0, 1.0).unwrap();
        let s = libm::sin(1.0);
        assert!((v - 2.0 / (s * s)).abs() < 1e-14);
        assert!((kappa_prime(1, 1e-4, 1.0).unwrap() - 2.0).abs() < 1e-7);
        assert!((kappa_prime(1, 0.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(kappa_prime(1, PI - 1e-9, 1.0).unwrap().is_finite());
        assert!(kappa_prime(1, PI, 1.0).is_err());
        assert!(kappa_prime(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn calibration_inverts_envelope() {
        let k = calibrate_kappa(&[(5.0, 2.0), (0.5, 0.0)]).unwrap();
        assert!((envelope(k, 2.0) - 5.0).abs() < 1e-12);
        assert!(envelope(k, 0.0) >= 0.5);
        assert_eq!(calibrate_kappa(&[(3.0, 0.0)]).unwrap(), 3.0);
        assert!(calibrate_kappa(&[(f64::INFINITY, 1.0)]).is_err());
    }

    #[test]
    fn empty_sets_give_one_half() {
        let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
        let e = IndicatorSet::empty(grid);
        let c = estimate_constant(&e, &e, 1.0, 1.0).unwrap();
        assert!((c.constant - 0.5).abs() < 1e-12);
        let opts = EstimateOptions { method: Some(EstimateMethod::Lanczos), ..Default::default() };
        let c = estimate_constant_with(&e, &e, 1.0, 1.0, &opts).unwrap();
        assert!((c.constant - 0.5).abs() < 1e-8);
    }

    #[test]
    fn lanczos_matches_dense() {
        let grid = SpatialGrid::new(1, 3.0, 12).unwrap();
        let s = IndicatorSet::from_region(grid, &Region::cube(2, 1.0));
        let dense = estimate_constant(&s, &s, 1.0, 1.0).unwrap();
        let opts = EstimateOptions { method: Some(EstimateMethod::Lanczos), ..Default::default() };
        let lz = estimate_constant_with(&s, &s, 1.0, 1.0, &opts).unwrap();
        assert!((dense.sigma_min - lz.sigma_min).abs() < 1e-6, "{dense:?} {lz:?}");
    }

    #[test]
    fn singular_time_rejected() {
        let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
        let e = IndicatorSet::empty(grid);
        assert!(matches!(estimate_constant(&e, &e, 1.0, PI), Err(Error::SingularLambda { .. })));
        let u = Slice2N::from_fn(grid, |z| C64::new(libm::exp(-z[0] * z[0] - z[1] * z[1]), 0.0));
        assert!(observability_report(&u, &e, &e, 2.0, 0.1, 0.1 + PI / 2.0).is_err());
    }

    #[test]
    fn image_measure_scales_by_determinant() {
        let grid = SpatialGrid::new(1, 4.0, 64).unwrap();
        let sigma = IndicatorSet::from_region(grid, &Region::centered_ball(2, 2.0));
        let m = j_image_measure(&sigma, 1.0, 1.0).unwrap();
        assert!(m.within_tolerance(), "{m:?}");
    }
}
