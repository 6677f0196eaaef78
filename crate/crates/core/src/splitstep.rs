//! Discretely unitary split-step integrator for
//! `i∂_s u + L_λ u + V(z, s) u = 0` on the periodic box.
//!
//! `L_λ = H_λ + iλR` with `H_λ = Δ − (λ²/4)|z|²` and the rotation generator
//! `R = Σ_j (x_j ∂_{y_j} − y_j ∂_{x_j})`, `e^{θR} f = f ∘ Q_θ`,
//! `Q_θ = [[cos θ, −sin θ], [sin θ, cos θ]]` on each `(x_j, y_j)` pair.
//! Rotations are three exact Fourier shears; `H_λ + V` is Strang-split into
//! a multiplication phase and the FFT multiplier `e^{−i dt |ξ|²}`. Every
//! factor is unitary and the step sequence is palindromic, so `U(−s) = U(s)^*`
//! up to rounding.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fft::{transform_all, Direction, FftPlan};
use crate::field::{GridFunction, Slice2N};
use crate::grid::SpatialGrid;
use crate::linalg::RealMatrix;
use crate::{cis, C64};

/// Real potential `V(z, s)`.
pub type PotentialFn<'a> = Box<dyn Fn(&[f64], f64) -> f64 + 'a>;

pub struct SplitStep<'a> {
    grid: SpatialGrid,
    lambda: f64,
    max_dt: f64,
    potential: Option<PotentialFn<'a>>,
    plan: FftPlan,
    freqs: Vec<f64>,
}

impl core::fmt::Debug for SplitStep<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SplitStep")
            .field("grid", &self.grid)
            .field("lambda", &self.lambda)
            .field("max_dt", &self.max_dt)
            .field("has_potential", &self.potential.is_some())
            .finish()
    }
}

impl<'a> SplitStep<'a> {
    pub fn new(grid: SpatialGrid, lambda: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0 && max_dt.is_finite()) {
            return Err(Error::Domain(alloc::format!("time step {max_dt} must be positive")));
        }
        let np = grid.points();
        Ok(Self {
            grid,
            lambda,
            max_dt,
            potential: None,
            plan: FftPlan::new(np),
            freqs: (0..np).map(|k| grid.frequency(k)).collect(),
        })
    }

    pub fn with_potential(mut self, potential: PotentialFn<'a>) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// `u(s_1)` from `u(s_0)`; `s_1 < s_0` runs backwards.
    pub fn evolve(&self, u: &Slice2N, s0: f64, s1: f64) -> Result<Slice2N> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch("split-step grid differs from data grid"));
        }
        let mut data = u.values().to_vec();
        self.evolve_in_place(&mut data, s0, s1);
        Slice2N::new(self.grid, data)
    }

    /// In-place variant on raw samples.
    pub fn evolve_in_place(&self, data: &mut [C64], s0: f64, s1: f64) {
        let span = s1 - s0;
        if span == 0.0 {
            return;
        }
        let steps = libm::ceil(span.abs() / self.max_dt).max(1.0) as usize;
        let dt = span / steps as f64;
        match &self.potential {
            None => {
                // H_λ is radial, so the rotation factors out of the whole span.
                let theta = -self.lambda * span;
                self.rotate(data, 0.5 * theta);
                for k in 0..steps {
                    self.strang(data, dt, s0 + (k as f64 + 0.5) * dt);
                }
                self.rotate(data, 0.5 * theta);
            }
            Some(_) => {
                let theta = -self.lambda * dt;
                for k in 0..steps {
                    self.rotate(data, 0.5 * theta);
                    self.strang(data, dt, s0 + (k as f64 + 0.5) * dt);
                    self.rotate(data, 0.5 * theta);
                }
            }
        }
    }

    /// `P(dt/2) K(dt) P(dt/2)` with the potential frozen at `s_mid`.
    fn strang(&self, data: &mut [C64], dt: f64, s_mid: f64) {
        self.potential_phase(data, 0.5 * dt, s_mid);
        self.kinetic(data, dt);
        self.potential_phase(data, 0.5 * dt, s_mid);
    }

    /// Multiplies by `e^{i dt (V − (λ²/4)|z|²)}`.
    fn potential_phase(&self, data: &mut [C64], dt: f64, s: f64) {
        let dim = self.grid.dim();
        let q = 0.25 * self.lambda * self.lambda;
        let mut z = [0.0; 4];
        for (k, v) in data.iter_mut().enumerate() {
            self.grid.point(k, &mut z[..dim]);
            let r2: f64 = z[..dim].iter().map(|x| x * x).sum();
            let mut w = -q * r2;
            if let Some(p) = &self.potential {
                w += p(&z[..dim], s);
            }
            *v *= cis(dt * w);
        }
    }

    /// `e^{i dt Δ}`: multiplier `e^{−i dt |ξ|²}`.
    fn kinetic(&self, data: &mut [C64], dt: f64) {
        let dim = self.grid.dim();
        transform_all(&self.plan, data, dim, Direction::Forward);
        let norm = 1.0 / self.grid.len() as f64;
        let mut idx = [0usize; 4];
        for (k, v) in data.iter_mut().enumerate() {
            self.grid.unravel(k, &mut idx[..dim]);
            let xi2: f64 = idx[..dim].iter().map(|&i| self.freqs[i] * self.freqs[i]).sum();
            *v *= cis(-dt * xi2) * norm;
        }
        transform_all(&self.plan, data, dim, Direction::Inverse);
    }

    /// `f ↦ f ∘ Q_θ` on each `(x_j, y_j)` pair as three shears:
    /// `Q_θ = A B A`, `A: x ↦ x + a y`, `B: y ↦ y + b x`,
    /// `a = −tan(θ/2)`, `b = sin θ`.
    pub fn rotate(&self, data: &mut [C64], theta: f64) {
        if theta == 0.0 {
            return;
        }
        let a = -libm::tan(0.5 * theta);
        let b = libm::sin(theta);
        let n = self.grid.n();
        for j in 0..n {
            self.shear(data, j, n + j, a);
            self.shear(data, n + j, j, b);
            self.shear(data, j, n + j, a);
        }
    }

    /// `g(z) = f(z + c · z_src · e_dst)`: translation along axis `dst` by
    /// `c` times coordinate `src`, exact for trigonometric interpolants.
    fn shear(&self, data: &mut [C64], dst: usize, src: usize, c: f64) {
        let grid = self.grid;
        let np = grid.points();
        let dim = grid.dim();
        let stride = grid.stride(dst);
        let mut line = alloc::vec![C64::new(0.0, 0.0); np];
        let mut scratch = Vec::new();
        let mut idx = [0usize; 4];
        let norm = 1.0 / np as f64;
        for start in 0..grid.len() {
            grid.unravel(start, &mut idx[..dim]);
            if idx[dst] != 0 {
                continue;
            }
            let shift = c * grid.coord(idx[src]);
            for (p, v) in line.iter_mut().enumerate() {
                *v = data[start + p * stride];
            }
            self.plan.process_with_scratch(&mut line, Direction::Forward, &mut scratch);
            for (k, v) in line.iter_mut().enumerate() {
                let xi = if k == np / 2 { 0.0 } else { self.freqs[k] };
                *v *= cis(xi * shift) * norm;
            }
            // The Nyquist mode has no unambiguous shift; it is kept unshifted,
            // which preserves unitarity.
            self.plan.process_with_scratch(&mut line, Direction::Inverse, &mut scratch);
            for (p, v) in line.iter().enumerate() {
                data[start + p * stride] = *v;
            }
        }
    }
}

/// Exactly unitary grid propagator for `i∂_s u + L_λ u = 0` without time
/// stepping: `U = Rot(θ/2) (⊗_axes e^{is h}) Rot(θ/2)`, `θ = −λs`, where `h` is
/// the 1-D spectral `d²/dx² − (λ²/4) x²`, real symmetric and diagonalised once.
/// `U(−s) = U(s)^*` to rounding.
pub struct HarmonicPropagator {
    lambda: f64,
    s: f64,
    factor: DMatrix<C64>,
    rotor: SplitStep<'static>,
}

impl core::fmt::Debug for HarmonicPropagator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HarmonicPropagator")
            .field("grid", &self.rotor.grid)
            .field("lambda", &self.lambda)
            .field("s", &self.s)
            .finish()
    }
}

impl HarmonicPropagator {
    pub fn new(grid: SpatialGrid, lambda: f64, s: f64) -> Result<Self> {
        if !(lambda.is_finite() && s.is_finite()) {
            return Err(Error::Domain(alloc::format!("non-finite lambda {lambda} or time {s}")));
        }
        let np = grid.points();
        let h = grid.spacing();
        let freqs: Vec<f64> = (0..np).map(|k| grid.frequency(k)).collect();
        // Spectral second derivative: D²[p][q] = −(1/N) Σ_k ξ_k² cos(ξ_k h (p − q)).
        let q = 0.25 * lambda * lambda;
        let mut ham = RealMatrix::zeros(np, np);
        for p in 0..np {
            for r in 0..np {
                let d = (p as f64 - r as f64) * h;
                let sum: f64 = freqs.iter().map(|xi| xi * xi * libm::cos(xi * d)).sum();
                ham[(p, r)] = -sum / np as f64;
            }
            let x = grid.coord(p);
            ham[(p, p)] -= q * x * x;
        }
        let eig = ham.symmetric_eigen();
        let vecs = eig.eigenvectors.map(|v| C64::new(v, 0.0));
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|mu| cis(s * mu)));
        let factor = &vecs * phases * vecs.transpose();
        Ok(Self { lambda, s, factor, rotor: SplitStep::new(grid, lambda, 1.0)? })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.rotor.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn time(&self) -> f64 {
        self.s
    }

    /// `U(−s)`, the adjoint and inverse.
    pub fn inverse(&self) -> Self {
        Self {
            lambda: self.lambda,
            s: -self.s,
            factor: self.factor.adjoint(),
            rotor: SplitStep::new(self.rotor.grid, self.lambda, 1.0).expect("valid step"),
        }
    }

    pub fn apply_in_place(&self, data: &mut [C64]) {
        let theta = -self.lambda * self.s;
        self.rotor.rotate(data, 0.5 * theta);
        let grid = self.rotor.grid;
        let np = grid.points();
        let dim = grid.dim();
        let mut line = DVector::<C64>::zeros(np);
        let mut idx = [0usize; 4];
        for axis in 0..dim {
            let stride = grid.stride(axis);
            for start in 0..grid.len() {
                grid.unravel(start, &mut idx[..dim]);
                if idx[axis] != 0 {
                    continue;
                }
                for p in 0..np {
                    line[p] = data[start + p * stride];
                }
                let out = &self.factor * &line;
                for p in 0..np {
                    data[start + p * stride] = out[p];
                }
            }
        }
        self.rotor.rotate(data, 0.5 * theta);
    }

    pub fn apply(&self, u: &Slice2N) -> Result<Slice2N> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch("propagator grid differs from data grid"));
        }
        let mut data = u.values().to_vec();
        self.apply_in_place(&mut data);
        Slice2N::new(*self.grid(), data)
    }

    /// Dense matrix of `U` in the flat grid basis.
    pub fn matrix(&self) -> DMatrix<C64> {
        let len = self.grid().len();
        let mut m = DMatrix::<C64>::zeros(len, len);
        let mut col = alloc::vec![C64::new(0.0, 0.0); len];
        for j in 0..len {
            col.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col);
            m.column_mut(j).copy_from_slice(&col);
        }
        m
    }
}

/// Discrete L² norm drift `|‖U u‖ − ‖u‖| / ‖u‖`.
pub fn norm_drift(stepper: &SplitStep<'_>, u: &Slice2N, s: f64) -> Result<f64> {
    let out = stepper.evolve(u, 0.0, s)?;
    let (a, b) = (out.norm_sq_total(), u.norm_sq_total());
    Ok((libm::sqrt(a) - libm::sqrt(b)).abs() / libm::sqrt(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, AnalyticField};
    use crate::propagator::propagate_slice_factored;

    #[test]
    fn unitary_and_reversible() {
        let grid = SpatialGrid::new(1, 5.0, 24).unwrap();
        let u = sample(&AnalyticField::gaussian_at(&[0.7, -0.2], 0.6).unwrap().mul_chirp(0.2), &grid).unwrap();
        let ss = SplitStep::new(grid, 1.0, 0.05).unwrap();
        assert!(norm_drift(&ss, &u, 1.0).unwrap() < 1e-13);
        let fwd = ss.evolve(&u, 0.0, 1.0).unwrap();
        let back = ss.evolve(&fwd, 1.0, 0.0).unwrap();
        assert!(back.relative_distance(&u).unwrap() < 1e-12);
    }

    #[test]
    fn rotation_matches_exact_composition() {
        let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
        let f = AnalyticField::gaussian_at(&[1.0, 0.5], 0.5).unwrap();
        let theta: f64 = 0.7;
        let mut data = sample(&f, &grid).unwrap().into_values();
        SplitStep::new(grid, 0.0, 1.0).unwrap().rotate(&mut data, theta);
        let (s, c) = libm::sincos(theta);
        let expected = Slice2N::from_fn(grid, |z| f.eval(&[c * z[0] - s * z[1], s * z[0] + c * z[1]]));
        let got = Slice2N::new(grid, data).unwrap();
        let err = got.relative_distance(&expected).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn agrees_with_factored_propagator() {
        let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
        let u = sample(&AnalyticField::gaussian_at(&[0.5, 0.0], 0.5).unwrap(), &grid).unwrap();
        let ss = SplitStep::new(grid, 1.0, 2e-3).unwrap();
        let a = ss.evolve(&u, 0.0, 0.5).unwrap();
        let b = propagate_slice_factored(&u, 1.0, 0.5).unwrap();
        let err = a.relative_distance(&b).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn harmonic_propagator_is_unitary_and_accurate() {
        let grid = SpatialGrid::new(1, 8.0, 64).unwrap();
        let u = sample(&AnalyticField::gaussian_at(&[0.5, 0.0], 0.5).unwrap(), &grid).unwrap();
        let prop = HarmonicPropagator::new(grid, 1.0, 0.5).unwrap();
        let a = prop.apply(&u).unwrap();
        assert!((a.norm_sq_total() / u.norm_sq_total() - 1.0).abs() < 1e-13);
        let b = propagate_slice_factored(&u, 1.0, 0.5).unwrap();
        let err = a.relative_distance(&b).unwrap();
        assert!(err < 1e-6, "{err}");
        let back = prop.inverse().apply(&a).unwrap();
        assert!(back.relative_distance(&u).unwrap() < 1e-12);
    }
}
