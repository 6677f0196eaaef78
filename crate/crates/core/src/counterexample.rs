//! Explicit solutions `u(z, t, s) = ∫ e^{|λ|(i(t − ns) − |z|²/4)} φ(λ) dλ` of
//! `i∂_s u + 𝓛u = 0` built from a bump `φ` supported in `[α, α + 1]`.
//!
//! Each λ contributes `e^{−|λ||z|²/4} e^{i|λ|t}`, an eigenfunction of `𝓛` with
//! `𝓛 = in∂_t` on it, so the flow is the translation `t ↦ t − ns`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{GridFunction, HeisenbergSample};
use crate::grid::{CentralAxis, SpatialGrid};
use crate::operators::{apply, pde_residual, OperatorKind, OperatorSpec, StencilOrder};
use crate::quadrature::GaussLegendre;
use crate::{cis, C64};

/// Default number of Gauss–Legendre nodes on `[α, α + 1]`.
pub const DEFAULT_NODES: usize = 256;
/// Spatial decay and band pre-estimates must fall below this.
pub const RESOLUTION_TOL: f64 = 1e-8;

/// `φ(λ) = A·exp(−1/(1 − u²))`, `u = 2(λ − α) − 1`, on `(α, α + 1)`; 0 outside.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    alpha: f64,
    amplitude: f64,
    rule: GaussLegendre,
}

impl BumpProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_nodes(alpha, 1.0, DEFAULT_NODES)
    }

    pub fn with_nodes(alpha: f64, amplitude: f64, nodes: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(alloc::format!("alpha = {alpha} must be positive")));
        }
        if !amplitude.is_finite() || nodes == 0 {
            return Err(Error::Domain("amplitude must be finite and the rule non-empty".into()));
        }
        Ok(Self { alpha, amplitude, rule: GaussLegendre::new(nodes, alpha, alpha + 1.0) })
    }

    /// Same profile with twice the quadrature nodes.
    pub fn doubled(&self) -> Self {
        Self {
            alpha: self.alpha,
            amplitude: self.amplitude,
            rule: GaussLegendre::new(2 * self.rule.len(), self.alpha, self.alpha + 1.0),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn nodes(&self) -> usize {
        self.rule.len()
    }

    /// `φ^{(k)}(λ)` for `k ≤ 2`, from `φ = e^{g(u)}`, `g = −1/(1 − u²)`:
    /// `φ′ = 2g′φ`, `φ″ = 4(g″ + g′²)φ`.
    pub fn derivative(&self, lambda: f64, k: u32) -> f64 {
        let u = 2.0 * (lambda - self.alpha) - 1.0;
        if u.abs() >= 1.0 || self.amplitude == 0.0 {
            return 0.0;
        }
        let q = 1.0 - u * u;
        let phi = self.amplitude * libm::exp(-1.0 / q);
        let g1 = -2.0 * u / (q * q);
        match k {
            0 => phi,
            1 => 2.0 * g1 * phi,
            2 => {
                let g2 = -(2.0 + 6.0 * u * u) / (q * q * q);
                4.0 * (g2 + g1 * g1) * phi
            }
            _ => panic!("derivatives above order 2 are not provided"),
        }
    }

    pub fn phi(&self, lambda: f64) -> f64 {
        self.derivative(lambda, 0)
    }

    /// `‖φ^{(k)}‖_{L¹}`: the rule's node count on each interval where
    /// `φ^{(k)}` keeps its sign. `φ′` changes sign at `u = 0`, `φ″` at
    /// `u⁴ = 1/3`.
    pub fn l1_norm(&self, k: u32) -> f64 {
        let cuts: &[f64] = match k {
            0 => &[],
            1 => &[0.0],
            _ => &[-0.759_835_685_651_593_2, 0.759_835_685_651_593_2],
        };
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(self.alpha);
        edges.extend(cuts.iter().map(|u| self.alpha + 0.5 * (u + 1.0)));
        edges.push(self.alpha + 1.0);
        edges
            .windows(2)
            .map(|w| GaussLegendre::new(self.rule.len(), w[0], w[1]).integrate(|l| self.derivative(l, k).abs()))
            .sum()
    }

    /// `∫ φ(λ)² λ^{−p} dλ`.
    pub fn weighted_l2(&self, p: i32) -> f64 {
        self.rule.integrate(|l| {
            let f = self.phi(l);
            f * f * libm::pow(l, -p as f64)
        })
    }

    /// `(node, weight · φ(node))` pairs of the stored rule.
    fn weighted_nodes(&self) -> Vec<(f64, f64)> {
        self.rule.nodes.iter().zip(&self.rule.weights).map(|(&l, &w)| (l, w * self.phi(l))).collect()
    }

    /// `u(z, t, s)` with `n = z.len() / 2`.
    pub fn eval_u(&self, z: &[f64], t: f64, s: f64) -> C64 {
        let n = z.len() / 2;
        let r2: f64 = z.iter().map(|x| x * x).sum();
        let tau = t - n as f64 * s;
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&l, &w)| cis(l * tau) * (w * self.phi(l) * libm::exp(-0.25 * l * r2)))
            .sum()
    }

    /// Rejects grids on which `u` is not resolved: spatial decay
    /// `e^{−αL²/4}`, the spectral tail `e^{−π²/(h²(α+1))}` and the central
    /// band `α + 1 < λ_max`.
    pub fn check_resolution(&self, grid: &SpatialGrid, axis: &CentralAxis) -> Result<()> {
        let decay = libm::exp(-0.25 * self.alpha * grid.extent() * grid.extent());
        if decay > RESOLUTION_TOL {
            return Err(Error::UnderResolved(alloc::format!(
                "boundary decay e^(-alpha L^2/4) = {decay:e} exceeds {RESOLUTION_TOL:e}; enlarge L"
            )));
        }
        let h = grid.spacing();
        let spectral = libm::exp(-PI * PI / (h * h * (self.alpha + 1.0)));
        if spectral > RESOLUTION_TOL {
            return Err(Error::UnderResolved(alloc::format!(
                "spatial spectrum at the grid Nyquist is {spectral:e}; refine h"
            )));
        }
        let top = axis.points() as f64 * PI / (2.0 * axis.extent());
        if self.alpha + 1.0 >= top {
            return Err(Error::UnderResolved(alloc::format!(
                "support edge {} reaches the central band limit {top}",
                self.alpha + 1.0
            )));
        }
        Ok(())
    }

    /// Samples `u(·, ·, s)` on `grid × axis`.
    pub fn sample(&self, grid: &SpatialGrid, axis: &CentralAxis, s: f64, mode: Sampling) -> Result<HeisenbergSample> {
        let nodes = match mode {
            Sampling::Quadrature => self.weighted_nodes(),
            Sampling::Periodic => self.lattice_nodes(axis)?,
        };
        Ok(sample_nodes(grid, axis, s, &nodes))
    }

    /// Rectangle rule on the dual lattice `πk/T`: the `2T`-periodization of
    /// `u` in `t` (Poisson summation), itself an exact solution.
    fn lattice_nodes(&self, axis: &CentralAxis) -> Result<Vec<(f64, f64)>> {
        let step = PI / axis.extent();
        let top = axis.points() as f64 * PI / (2.0 * axis.extent());
        let first = libm::ceil(self.alpha / step) as i64;
        let nodes: Vec<(f64, f64)> = (first..)
            .map(|k| k as f64 * step)
            .take_while(|&l| l < self.alpha + 1.0)
            .map(|l| (l, step * self.phi(l)))
            .collect();
        if nodes.iter().any(|&(l, _)| l >= top) {
            return Err(Error::UnderResolved("periodic nodes reach the central Nyquist".into()));
        }
        if self.amplitude != 0.0 && nodes.iter().all(|&(_, w)| w == 0.0) {
            return Err(Error::UnderResolved("no dual-lattice node inside the support; enlarge T".into()));
        }
        Ok(nodes)
    }
}

/// How the λ-integral is discretized when sampling on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sampling {
    /// The profile's Gauss–Legendre rule: the field itself, truncated in t.
    Quadrature,
    /// The t-periodized field, smooth across the axis wrap.
    Periodic,
}

/// `Σ_q c_q e^{−μ_q|z|²/4} e^{iμ_q(t − ns)}` as a product of a `(grid × q)`
/// and a `(q × t)` matrix.
fn sample_nodes(grid: &SpatialGrid, axis: &CentralAxis, s: f64, nodes: &[(f64, f64)]) -> HeisenbergSample {
    let (len, m, q) = (grid.len(), axis.points(), nodes.len());
    let dim = grid.dim();
    let shift = grid.n() as f64 * s;
    let mut spatial = DMatrix::<C64>::zeros(len, q);
    let mut z = [0.0; 4];
    for k in 0..len {
        grid.point(k, &mut z[..dim]);
        let r2: f64 = z[..dim].iter().map(|x| x * x).sum();
        for (c, &(l, w)) in nodes.iter().enumerate() {
            spatial[(k, c)] = C64::new(w * libm::exp(-0.25 * l * r2), 0.0);
        }
    }
    let temporal = DMatrix::<C64>::from_fn(q, m, |c, j| cis(nodes[c].0 * (axis.time(j) - shift)));
    let prod = spatial * temporal;
    let values = (0..len * m).map(|i| prod[(i / m, i % m)]).collect();
    HeisenbergSample::new(*grid, *axis, values).expect("layout matches")
}

/// Outcome of [`residual_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub residual: f64,
    /// The same residual with the second-order stencil.
    pub residual_coarse_stencil: f64,
    /// `residual / residual_coarse_stencil` (0 when both vanish).
    pub refinement_ratio: f64,
}

/// Relative residual of `i∂_s u + 𝓛u = 0` along the periodized family at
/// the uniformly spaced `s_values`, with the fourth- and second-order stencils.
pub fn residual_check(profile: &BumpProfile, grid: &SpatialGrid, axis: &CentralAxis, s_values: &[f64]) -> Result<ResidualReport> {
    profile.check_resolution(grid, axis)?;
    let dt = uniform_step(s_values)?;
    let path = s_values
        .iter()
        .map(|&s| profile.sample(grid, axis, s, Sampling::Periodic))
        .collect::<Result<Vec<_>>>()?;
    let spec = OperatorSpec::new(OperatorKind::SubLaplacian);
    let fine = pde_residual(&path, &spec.with_order(StencilOrder::Four), None, dt)?;
    let coarse = pde_residual(&path, &spec.with_order(StencilOrder::Two), None, dt)?;
    let ratio = if coarse == 0.0 { 0.0 } else { fine / coarse };
    Ok(ResidualReport { residual: fine, residual_coarse_stencil: coarse, refinement_ratio: ratio })
}

fn uniform_step(s_values: &[f64]) -> Result<f64> {
    if s_values.len() < 3 {
        return Err(Error::TooFewSamples(s_values.len()));
    }
    let dt = s_values[1] - s_values[0];
    let uniform = s_values.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));
    if !(dt > 0.0) || !uniform {
        return Err(Error::NonUniformTimes);
    }
    Ok(dt)
}

/// `‖𝓛u_0 − in∂_t u_0‖ / ‖in∂_t u_0‖` on the periodized family at `s = 0`.
pub fn static_identity_error(profile: &BumpProfile, grid: &SpatialGrid, axis: &CentralAxis) -> Result<f64> {
    profile.check_resolution(grid, axis)?;
    let u0 = profile.sample(grid, axis, 0.0, Sampling::Periodic)?;
    let lhs = apply(&OperatorSpec::new(OperatorKind::SubLaplacian), &u0)?;
    let dt = apply(&OperatorSpec::new(OperatorKind::Central), &u0)?;
    let scale = C64::new(0.0, grid.n() as f64);
    let rhs = HeisenbergSample::new(*grid, *axis, dt.values().iter().map(|v| v * scale).collect())?;
    if rhs.norm_sq(None)? == 0.0 {
        return Ok(if lhs.norm_sq(None)? == 0.0 { 0.0 } else { f64::INFINITY });
    }
    lhs.relative_distance(&rhs)
}

/// Evaluation point `(z, t, s)` for [`decay_bound_check`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayPoint {
    pub z: Vec<f64>,
    pub t: f64,
    pub s: f64,
}

/// Outcome of [`decay_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayReport {
    pub k: u32,
    /// `max |u| / bound` over points with a finite bound.
    pub max_ratio: f64,
    /// Points where the bound is `+∞` (`z = 0`, `t = ns`).
    pub degenerate_points: usize,
    pub holds: bool,
}

/// Pointwise slack allowed in [`decay_bound_check`].
pub const DECAY_SLACK: f64 = 1e-6;

/// Checks `|u| ≤ ‖φ^{(k)}‖_{L¹} e^{−α|z|²/4} / ((t − ns)² + |z|⁴/16)^{k/2}`.
pub fn decay_bound_check(profile: &BumpProfile, k: u32, points: &[DecayPoint]) -> Result<DecayReport> {
    if k > 2 {
        return Err(Error::Domain(alloc::format!("decay order k = {k} must be 0, 1 or 2")));
    }
    let norm = profile.l1_norm(k);
    let mut max_ratio: f64 = 0.0;
    let mut degenerate = 0;
    for p in points {
        let n = p.z.len() / 2;
        let r2: f64 = p.z.iter().map(|x| x * x).sum();
        let tau = p.t - n as f64 * p.s;
        let den = libm::pow(tau * tau + r2 * r2 / 16.0, 0.5 * k as f64);
        let value = profile.eval_u(&p.z, p.t, p.s).norm();
        if den == 0.0 {
            degenerate += 1;
            continue;
        }
        let bound = norm * libm::exp(-0.25 * profile.alpha * r2) / den;
        let ratio = if bound == 0.0 {
            if value == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            value / bound
        };
        max_ratio = max_ratio.max(ratio);
    }
    Ok(DecayReport { k, max_ratio, degenerate_points: degenerate, holds: max_ratio <= 1.0 + DECAY_SLACK })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ParsevalForm {
    /// `(2π)^{n+1} ∫_0^∞ |φ(λ) + φ(−λ)|² λ^{−n} dλ`.
    A,
    /// `2^{n+1} π^{n−1} ∫_0^∞ (|φ(λ)|² + |φ(−λ)|²) λ^{−n} dλ`.
    B,
}

/// Outcome of [`parseval_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParsevalReport {
    pub lhs: f64,
    pub rhs_a: f64,
    pub rhs_b: f64,
    pub rel_err_a: f64,
    pub rel_err_b: f64,
    /// The form within `tol` of `lhs`, when exactly one is.
    pub matches: Option<ParsevalForm>,
}

/// Discrete `∫|u_0|² dz dt` against both candidate closed forms. With `φ`
/// supported in `[α, α + 1]`, `α > 0`, the cross term vanishes and both
/// integrals reduce to `∫ φ² λ^{−n}`.
pub fn parseval_check(profile: &BumpProfile, grid: &SpatialGrid, axis: &CentralAxis, tol: f64) -> Result<ParsevalReport> {
    profile.check_resolution(grid, axis)?;
    let n = grid.n() as i32;
    let u0 = profile.sample(grid, axis, 0.0, Sampling::Quadrature)?;
    let lhs = u0.norm_sq(None)?;
    let moment = profile.weighted_l2(n);
    let rhs_a = libm::pow(2.0 * PI, (n + 1) as f64) * moment;
    let rhs_b = libm::pow(2.0, (n + 1) as f64) * libm::pow(PI, (n - 1) as f64) * moment;
    let rel = |r: f64| if r == 0.0 { if lhs == 0.0 { 0.0 } else { f64::INFINITY } } else { (lhs - r).abs() / r };
    let (rel_err_a, rel_err_b) = (rel(rhs_a), rel(rhs_b));
    let matches = match (rel_err_a <= tol, rel_err_b <= tol) {
        _ if lhs == 0.0 => None,
        (true, false) => Some(ParsevalForm::A),
        (false, true) => Some(ParsevalForm::B),
        _ => None,
    };
    Ok(ParsevalReport { lhs, rhs_a, rhs_b, rel_err_a, rel_err_b, matches })
}

/// Outcome of [`tail_mass_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailReport {
    pub alpha: f64,
    pub r: f64,
    /// `∫_{(R^{2n} ∖ [−r, r]^{2n}) × R} |u|² dz dt`.
    pub tail_mass: f64,
    /// `2^{2(n+1)} π e^{−nαr²} ‖φ′‖²_{L¹} / (α^{2n} r^{2(n+1)})`.
    pub bound: f64,
    /// `∫_{H^n} |u|²`.
    pub total_mass: f64,
    /// `tail_mass ≤ bound · (1 + TAIL_SLACK)`.
    pub holds: bool,
}

/// Integral slack allowed in [`tail_mass_check`].
pub const TAIL_SLACK: f64 = 0.05;

/// Tail mass outside the cube `[−r, r]^{2n}` against the closed-form bound.
/// Plancherel in t gives `∫|u|² dt = 2π ∫ φ(μ)² e^{−μ|z|²/2} dμ` for every s,
/// and the z-integral over the cube complement is
/// `(2π/μ)^n (1 − erf(r√(μ/2))^{2n})`.
pub fn tail_mass_check(profile: &BumpProfile, r: f64, n: usize) -> Result<TailReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(alloc::format!("cube half-width r = {r} must be positive")));
    }
    let nf = n as f64;
    let tail = 2.0
        * PI
        * profile.rule.integrate(|mu| {
            let f = profile.phi(mu);
            let outside = libm::erfc(r * libm::sqrt(0.5 * mu));
            // 1 − (1 − e)^{2n}, stable for small e.
            let frac = -libm::expm1(2.0 * nf * libm::log1p(-outside));
            f * f * libm::pow(2.0 * PI / mu, nf) * frac
        });
    let total = libm::pow(2.0 * PI, nf + 1.0) * profile.weighted_l2(n as i32);
    let alpha = profile.alpha;
    let d1 = profile.l1_norm(1);
    let bound = libm::pow(2.0, 2.0 * (nf + 1.0)) * PI * libm::exp(-nf * alpha * r * r) * d1 * d1
        / (libm::pow(alpha, 2.0 * nf) * libm::pow(r, 2.0 * (nf + 1.0)));
    Ok(TailReport { alpha, r, tail_mass: tail, bound, total_mass: total, holds: tail <= bound * (1.0 + TAIL_SLACK) })
}

/// [`tail_mass_check`] over several α with the default profile shape.
pub fn alpha_sweep(alphas: &[f64], r: f64, n: usize, nodes: usize) -> Result<Vec<TailReport>> {
    alphas
        .iter()
        .map(|&a| tail_mass_check(&BumpProfile::with_nodes(a, 1.0, nodes)?, r, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let p = BumpProfile::new(2.0).unwrap();
        let h = 1e-5;
        for &l in &[2.2, 2.5, 2.71, 2.9] {
            let d1 = (p.phi(l + h) - p.phi(l - h)) / (2.0 * h);
            let d2 = (p.derivative(l + h, 1) - p.derivative(l - h, 1)) / (2.0 * h);
            assert!((d1 - p.derivative(l, 1)).abs() < 1e-6 * (1.0 + d1.abs()));
            assert!((d2 - p.derivative(l, 2)).abs() < 1e-5 * (1.0 + d2.abs()));
        }
        assert_eq!(p.phi(1.99), 0.0);
        assert_eq!(p.phi(3.0), 0.0);
    }

    #[test]
    fn derivative_l1_norms_match_antiderivatives() {
        // On each sign interval ∫|φ^{(k)}| = |φ^{(k−1)}(b) − φ^{(k−1)}(a)|.
        let p = BumpProfile::new(1.0).unwrap();
        assert!((p.l1_norm(1) - 2.0 / core::f64::consts::E).abs() < 1e-12);
        let c = libm::pow(1.0 / 3.0, 0.25);
        let (a, b) = (1.0 + 0.5 * (1.0 - c), 1.0 + 0.5 * (1.0 + c));
        let exact = 2.0 * p.derivative(a, 1).abs() + (p.derivative(b, 1) - p.derivative(a, 1)).abs();
        assert!((p.l1_norm(2) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn value_at_origin_is_l1_norm() {
        let p = BumpProfile::new(2.0).unwrap();
        let v = p.eval_u(&[0.0, 0.0], 0.7, 0.7);
        assert!((v.re - p.l1_norm(0)).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn shift_law_is_exact_in_quadrature() {
        let p = BumpProfile::new(2.0).unwrap();
        let z = [0.4, -1.1];
        assert_eq!(p.eval_u(&z, 1.3, 0.5), p.eval_u(&z, 1.3 - 0.5, 0.0));
    }

    #[test]
    fn separable_sampling_matches_pointwise() {
        let p = BumpProfile::with_nodes(2.0, 1.0, 32).unwrap();
        let grid = SpatialGrid::new(1, 3.0, 8).unwrap();
        let axis = CentralAxis::new(4.0, 8).unwrap();
        let f = p.sample(&grid, &axis, 0.3, Sampling::Quadrature).unwrap();
        let direct = HeisenbergSample::from_fn(grid, axis, |z, t| p.eval_u(z, t, 0.3));
        assert!(f.relative_distance(&direct).unwrap() < 1e-13);
    }

    #[test]
    fn zero_profile_is_silent() {
        let p = BumpProfile::with_nodes(2.0, 0.0, 16).unwrap();
        let t = tail_mass_check(&p, 1.0, 1).unwrap();
        assert_eq!((t.tail_mass, t.total_mass), (0.0, 0.0));
    }
}
