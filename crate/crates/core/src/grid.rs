//! Uniform periodic boxes for the spatial variable `z = (x, y) ∈ R^{2n}` and
//! for the central variable `t`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported Heisenberg dimension parameter `n`.
pub const MAX_N: usize = 2;

/// Uniform grid on `[-L, L)^{2n}` with `N` points per axis.
///
/// Flat indices are row-major over `(x_1, .., x_n, y_1, .., y_n)`: the last
/// axis (`y_n`) varies fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpatialGrid {
    n: usize,
    extent: f64,
    points: usize,
}

impl SpatialGrid {
    pub fn new(n: usize, extent: f64, points: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidGrid(format!("n = {n} (supported: 1..={MAX_N})")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent L = {extent} must be positive")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis N = {points} must be even and >= 4"
            )));
        }
        Ok(Self { n, extent, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of spatial axes, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    /// Total number of grid points, `N^{2n}`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^{2n}`.
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim() as f64)
    }

    /// Volume of the whole box, `(2L)^{2n}`.
    pub fn box_volume(&self) -> f64 {
        libm::pow(2.0 * self.extent, self.dim() as f64)
    }

    /// `x_k = -L + k h`.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.spacing()
    }

    /// All axis coordinates.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.coord(k)).collect()
    }

    /// Stride of `axis` in the flat layout.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim() - 1 - axis) as u32)
    }

    /// Per-axis indices of a flat index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        let dim = self.dim();
        for axis in (0..dim).rev() {
            out[axis] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.points + k)
    }

    /// Coordinates of grid point `flat` written into `out` (length `2n`).
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for axis in (0..self.dim()).rev() {
            out[axis] = self.coord(rest % self.points);
            rest /= self.points;
        }
    }

    /// Maximal Fourier frequency resolved by the grid, `π / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Discrete angular frequency of FFT bin `k` along one axis.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.points as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        PI * signed as f64 / self.extent
    }

    /// True when some axis index of `flat` sits on the outermost layer.
    pub fn on_boundary(&self, flat: usize) -> bool {
        let mut rest = flat;
        for _ in 0..self.dim() {
            let k = rest % self.points;
            if k == 0 || k == self.points - 1 {
                return true;
            }
            rest /= self.points;
        }
        false
    }

    /// Grid with the same box and `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n, self.extent, self.points * factor)
    }
}

/// Uniform periodic axis `t ∈ [-T, T)` with `M` points and its discrete dual
/// `λ_k = (k - M/2) π / T`, `k = 0..M` (ascending).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CentralAxis {
    extent: f64,
    points: usize,
}

impl CentralAxis {
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("central extent T = {extent} must be positive")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "central points M = {points} must be even and >= 4"
            )));
        }
        Ok(Self { extent, points })
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `Δt = 2T / M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    /// `Δλ = π / T`.
    pub fn lambda_spacing(&self) -> f64 {
        PI / self.extent
    }

    #[inline]
    pub fn lambda(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.lambda_spacing()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.lambda(k)).collect()
    }

    /// Index of the discrete λ closest to `lambda`.
    pub fn nearest_lambda_index(&self, lambda: f64) -> Option<usize> {
        let k = libm::round(lambda / self.lambda_spacing()) as isize + (self.points / 2) as isize;
        (k >= 0 && (k as usize) < self.points).then_some(k as usize)
    }

    /// Axis with `factor` times the extent and points (same Δt): zero padding
    /// in t, i.e. λ oversampling by `factor`.
    pub fn oversampled(&self, factor: usize) -> Result<Self> {
        if !matches!(factor, 1 | 2 | 4) {
            return Err(Error::Domain(format!("oversampling factor {factor} (allowed: 1, 2, 4)")));
        }
        Self::new(self.extent * factor as f64, self.points * factor)
    }
}
