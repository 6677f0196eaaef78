//! Partial Fourier transform in the central variable.
//!
//! Forward: `F_λ(z) = Δt Σ_j f(z, t_j) e^{iλ t_j}`.
//! Inverse: `f(z, t) = (Δλ / 2π) Σ_k F_{λ_k}(z) e^{−iλ_k t}`.
//!
//! With `t_j = −T + jΔt` and `λ_k = (k − M/2)π/T`,
//! `e^{iλ_k t_j} = (−1)^{k − M/2} (−1)^j e^{2πi jk/M}`, so both directions
//! are a length-`M` DFT with sign pre/post factors.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::{Direction, FftPlan};
use crate::field::{GridFunction, HeisenbergSample, Slice2N};
use crate::grid::{CentralAxis, SpatialGrid};
use crate::C64;

/// The λ-spectrum of a [`HeisenbergSample`]: one slice per discrete λ.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStack {
    grid: SpatialGrid,
    axis: CentralAxis,
    slices: Vec<Slice2N>,
    excluded: Vec<bool>,
}

impl LambdaStack {
    pub fn new(grid: SpatialGrid, axis: CentralAxis, slices: Vec<Slice2N>) -> Result<Self> {
        if slices.len() != axis.points() {
            return Err(Error::LengthMismatch { expected: axis.points(), got: slices.len() });
        }
        if slices.iter().any(|s| s.grid() != &grid) {
            return Err(Error::GridMismatch("stack slices must share the grid"));
        }
        let excluded = vec![false; slices.len()];
        Ok(Self { grid, axis, slices, excluded })
    }

    pub fn zeros(grid: SpatialGrid, axis: CentralAxis) -> Self {
        let slices = (0..axis.points()).map(|_| Slice2N::zeros(grid)).collect();
        Self { grid, axis, slices, excluded: vec![false; axis.points()] }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn axis(&self) -> &CentralAxis {
        &self.axis
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.axis.lambda(k)
    }

    pub fn slices(&self) -> &[Slice2N] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &Slice2N {
        &self.slices[k]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut Slice2N {
        &mut self.slices[k]
    }

    pub fn set_slice(&mut self, k: usize, slice: Slice2N) -> Result<()> {
        if slice.grid() != &self.grid {
            return Err(Error::GridMismatch("slice grid differs from stack grid"));
        }
        self.slices[k] = slice;
        Ok(())
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn set_excluded(&mut self, k: usize, excluded: bool) {
        self.excluded[k] = excluded;
    }

    /// `(1/2π) Σ_k Δλ ‖F_k‖²`: equals the (z, t) norm of the inverse.
    pub fn norm_sq(&self) -> f64 {
        let w = self.axis.lambda_spacing() / (2.0 * PI);
        w * self.slices.iter().map(|s| s.norm_sq_total()).sum::<f64>()
    }

    /// Same as [`norm_sq`](Self::norm_sq) restricted to excluded λ.
    pub fn excluded_norm_sq(&self) -> f64 {
        let w = self.axis.lambda_spacing() / (2.0 * PI);
        w * self
            .slices
            .iter()
            .zip(&self.excluded)
            .filter(|(_, &e)| e)
            .map(|(s, _)| s.norm_sq_total())
            .sum::<f64>()
    }
}

/// `(−1)^m` as a float.
#[inline]
fn parity(m: isize) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_central(f: &HeisenbergSample) -> LambdaStack {
    let grid = *f.grid();
    let axis = *f.axis();
    let m = axis.points();
    let half = (m / 2) as isize;
    let plan = FftPlan::new(m);
    let dt = axis.spacing();
    let mut slices: Vec<Vec<C64>> = (0..m).map(|_| Vec::with_capacity(grid.len())).collect();
    let mut col = vec![C64::new(0.0, 0.0); m];
    let mut scratch = Vec::new();
    for column in f.values().chunks_exact(m) {
        for (j, (c, v)) in col.iter_mut().zip(column).enumerate() {
            *c = v * parity(j as isize);
        }
        plan.process_with_scratch(&mut col, Direction::Inverse, &mut scratch);
        for (k, c) in col.iter().enumerate() {
            slices[k].push(c * (dt * parity(k as isize - half)));
        }
    }
    let slices = slices
        .into_iter()
        .map(|v| Slice2N::new(grid, v).expect("length matches grid"))
        .collect();
    LambdaStack { grid, axis, slices, excluded: vec![false; m] }
}

pub fn inverse_central(stack: &LambdaStack) -> HeisenbergSample {
    let grid = stack.grid;
    let axis = stack.axis;
    let m = axis.points();
    let half = (m / 2) as isize;
    let plan = FftPlan::new(m);
    let scale = axis.lambda_spacing() / (2.0 * PI);
    let mut values = Vec::with_capacity(grid.len() * m);
    let mut col = vec![C64::new(0.0, 0.0); m];
    let mut scratch = Vec::new();
    for z in 0..grid.len() {
        for (k, c) in col.iter_mut().enumerate() {
            *c = stack.slices[k].values()[z] * parity(k as isize - half);
        }
        plan.process_with_scratch(&mut col, Direction::Forward, &mut scratch);
        values.extend(col.iter().enumerate().map(|(j, c)| c * (scale * parity(j as isize))));
    }
    HeisenbergSample::new(grid, axis, values).expect("length matches grid")
}

/// Zero-pads `f` in `t` onto `axis.oversampled(factor)` (same Δt, centred),
/// refining the λ spacing by `factor`.
pub fn zero_pad(f: &HeisenbergSample, factor: usize) -> Result<HeisenbergSample> {
    let axis = *f.axis();
    let padded = axis.oversampled(factor)?;
    let (m, mp) = (axis.points(), padded.points());
    let offset = (mp - m) / 2;
    let mut values = vec![C64::new(0.0, 0.0); f.grid().len() * mp];
    for (z, column) in f.values().chunks_exact(m).enumerate() {
        values[z * mp + offset..z * mp + offset + m].copy_from_slice(column);
    }
    HeisenbergSample::new(*f.grid(), padded, values)
}

/// Forward transform with λ oversampling `factor ∈ {1, 2, 4}`.
pub fn forward_central_oversampled(f: &HeisenbergSample, factor: usize) -> Result<LambdaStack> {
    Ok(forward_central(&zero_pad(f, factor)?))
}

/// Spectral `∂_t^order` (periodic in t). The unpaired Nyquist bin is dropped
/// at every order, so `∂_t^2 = ∂_t ∘ ∂_t` exactly.
pub fn dt_spectral(f: &HeisenbergSample, order: u32) -> HeisenbergSample {
    let mut stack = forward_central(f);
    for k in 0..stack.axis.points() {
        let lambda = stack.axis.lambda(k);
        // ∂_t e^{−iλt} = −iλ e^{−iλt}.
        let mult = if k == 0 && order > 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, -lambda).powu(order)
        };
        for v in stack.slices[k].values_mut() {
            *v *= mult;
        }
    }
    inverse_central(&stack)
}
