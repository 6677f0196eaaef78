//! Complex FFT of arbitrary length: iterative radix-2 for powers of two,
//! Bluestein's chirp-z convolution otherwise. Transforms are unnormalized:
//! `X_k = Σ_j x_j e^{sign·2πi jk/n}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{cis, C64};

/// Sign of the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e^{-2πi jk/n}`
    Forward,
    /// `e^{+2πi jk/n}`
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    /// `e^{-2πi k/len}` for `k < len/2`.
    twiddles: Vec<C64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|k| cis(-2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    fn process(&self, data: &mut [C64], dir: Direction) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if dir == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    len: usize,
    inner: Radix2,
    /// `e^{-iπ k²/len}`, `k < len`.
    chirp: Vec<C64>,
    /// Forward transform of the zero-padded conjugate chirp (forward sign).
    kernel_fwd: Vec<C64>,
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k² mod 2len keeps the phase argument small.
        let chirp: Vec<C64> = (0..len)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * len as u128)) as f64;
                cis(-PI * k2 / len as f64)
            })
            .collect();
        let mut kernel = vec![C64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, Direction::Forward);
        Self { len, inner, chirp, kernel_fwd: kernel }
    }

    fn process(&self, data: &mut [C64], dir: Direction, scratch: &mut Vec<C64>) {
        let m = self.inner.len;
        scratch.clear();
        scratch.resize(m, C64::new(0.0, 0.0));
        // Inverse transform = conj(Forward(conj x)).
        let inv = dir == Direction::Inverse;
        for k in 0..self.len {
            let x = if inv { data[k].conj() } else { data[k] };
            scratch[k] = x * self.chirp[k];
        }
        self.inner.process(scratch, Direction::Forward);
        for (a, b) in scratch.iter_mut().zip(&self.kernel_fwd) {
            *a *= b;
        }
        self.inner.process(scratch, Direction::Inverse);
        let scale = 1.0 / m as f64;
        for k in 0..self.len {
            let y = scratch[k] * self.chirp[k] * scale;
            data[k] = if inv { y.conj() } else { y };
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Precomputed FFT of a fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        let kind = if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len.max(1)))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized transform of `data` (length `len`).
    pub fn process(&self, data: &mut [C64], dir: Direction) {
        let mut scratch = Vec::new();
        self.process_with_scratch(data, dir, &mut scratch);
    }

    pub fn process_with_scratch(&self, data: &mut [C64], dir: Direction, scratch: &mut Vec<C64>) {
        assert_eq!(data.len(), self.len, "FFT length mismatch");
        match &self.kind {
            Kind::Radix2(p) => p.process(data, dir),
            Kind::Bluestein(p) => p.process(data, dir, scratch),
        }
    }

    /// Transforms every 1-d line along `axis` of a row-major array of
    /// `shape` (last axis fastest). `shape[axis]` must equal `len`.
    pub fn transform_axis(&self, data: &mut [C64], shape: &[usize], axis: usize, dir: Direction) {
        assert_eq!(shape[axis], self.len);
        let total: usize = shape.iter().product();
        assert_eq!(data.len(), total);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (stride * self.len);
        let mut line = vec![C64::new(0.0, 0.0); self.len];
        let mut scratch = Vec::new();
        for o in 0..outer {
            let base = o * stride * self.len;
            for i in 0..stride {
                let start = base + i;
                if stride == 1 {
                    self.process_with_scratch(&mut data[start..start + self.len], dir, &mut scratch);
                    continue;
                }
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                self.process_with_scratch(&mut line, dir, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

/// Unnormalized transform over every axis of a hypercubic row-major array with
/// `dim` axes of `plan.len()` points.
pub fn transform_all(plan: &FftPlan, data: &mut [C64], dim: usize, dir: Direction) {
    let shape = vec![plan.len(); dim];
    for axis in 0..dim {
        plan.transform_axis(data, &shape, axis, dir);
    }
}

/// Reference `O(n²)` DFT.
pub fn dft_naive(data: &[C64], dir: Direction) -> Vec<C64> {
    let n = data.len();
    let s = dir.sign();
    (0..n)
        .map(|k| {
            data.iter()
                .enumerate()
                .map(|(j, x)| {
                    let jk = (j * k) % n;
                    x * cis(s * 2.0 * PI * jk as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}
