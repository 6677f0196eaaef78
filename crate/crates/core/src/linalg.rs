//! Dense linear algebra helpers on top of `nalgebra`, plus a matrix-free
//! Lanczos estimate of the bottom of a Hermitian spectrum.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

pub type RealMatrix = DMatrix<f64>;

/// Determinant of a square real matrix.
pub fn det(m: &RealMatrix) -> f64 {
    m.determinant()
}

/// Inverse of `m`, rejecting matrices with `|det| < 1e-12 · max row norm`.
pub fn checked_inverse(m: &RealMatrix) -> Result<RealMatrix> {
    let d = m.determinant();
    let scale = (0..m.nrows())
        .map(|r| m.row(r).norm())
        .fold(0.0_f64, f64::max);
    if !(d.abs() >= 1e-12 * scale) || scale == 0.0 {
        return Err(Error::SingularMatrix { det: d });
    }
    m.clone().try_inverse().ok_or(Error::SingularMatrix { det: d })
}

/// Smallest singular value of a dense complex matrix (full SVD).
pub fn smallest_singular_value(a: DMatrix<C64>) -> f64 {
    let sv = a.singular_values();
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Result of a Lanczos bottom-eigenvalue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosEstimate {
    /// Smallest Ritz value.
    pub value: f64,
    /// `‖G v − value·v‖` for the unit Ritz vector `v`: `value` is within this
    /// distance of an eigenvalue of `G`.
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of the Hermitian positive semidefinite operator `G`
/// with spectrum in `[0, upper]`, by Lanczos with full reorthogonalization on
/// `upper·I − G`. The start vector is drawn from a ChaCha stream seeded with
/// `seed`.
pub fn lanczos_smallest(
    dim: usize,
    upper: f64,
    max_iter: usize,
    tol: f64,
    seed: u64,
    mut apply: impl FnMut(&[C64], &mut [C64]),
) -> LanczosEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut best = LanczosEstimate { value: upper, residual: f64::INFINITY, iterations: 0 };
    let steps = max_iter.min(dim).max(1);
    for it in 0..steps {
        apply(&q, &mut w);
        // Shifted operator B = upper·I − G.
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi = qi * upper - *wi;
        }
        let alpha = dot(&q, &w).re;
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= bi * c;
                }
            }
        }
        let beta = norm(&w);
        let k = alphas.len();
        let mut t = RealMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty tridiagonal");
        let last = eig.eigenvectors[(k - 1, imax)];
        let residual = (beta * last).abs();
        best = LanczosEstimate { value: (upper - theta).max(0.0), residual, iterations: it + 1 };
        if residual < tol || beta < 1e-300 {
            break;
        }
        betas.push(beta);
        q = w.iter().map(|x| x / beta).collect();
    }
    best
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x.norm_sqr()).sum())
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    for x in a {
        *x /= n;
    }
}

/// Column vector helper for tests and small solves.
pub fn to_dvector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}
