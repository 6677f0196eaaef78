//! Numerical core for the Schrödinger equation of the sub-Laplacian on the
//! Heisenberg group `H^n`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: grids, sampled fields, analytic fields, the
//! central (t ↔ λ) transform, the per-λ propagators, discrete differential
//! operators, the annihilating-pair estimators, the explicit counterexample
//! family and the magnetic → Hermite → free reduction chain.
//!
//! File formats, configuration and the command line live in the `heisenfft`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod annihilation;
pub mod central;
pub mod counterexample;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod propagator;
pub mod quadrature;
pub mod reduction;
pub mod sets;
pub mod splitstep;

pub use error::{Error, Result};
pub use field::{AnalyticField, GridFunction, HeisenbergSample, Slice2N};
pub use grid::{CentralAxis, SpatialGrid};
pub use sets::{IndicatorSet, Region};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    let (s, c) = libm::sincos(theta);
    C64::new(c, s)
}

/// Relative discrete L² distance `‖a − b‖ / ‖b‖` (0 when both vanish).
pub fn relative_l2(a: &[C64], b: &[C64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        libm::sqrt(num / den)
    }
}
