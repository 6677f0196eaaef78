//! The free Schrödinger group `e^{is𝓛}` on `H^n`, realized per λ-slice.
//!
//! For fixed λ the slice equation is `i∂_s u + L_λ u = 0` and its solution is
//! the λ-twisted convolution of the data with the Mehler-type kernel
//! `h(z) = (4π)^{−n} (λ / (i sin λs))^n e^{i(λ/4)cot(λs)|z|²}`.
//! Expanding `|z − w|²` and the twisting phase gives the factorization
//! `u(z) = c · γ(z) · 𝓕[γ u_0](J_λ z)` with `γ(z) = e^{i(λ/4)cot(λs)|z|²}` and
//! `J_λ = (λ/2)(J + cot(λs) I)`, `J(x, y) = (y, −x)`.
//!
//! All λ-dependence goes through `a = λ / sin(λs)` and `b = λ cot(λs)`, both
//! analytic at `λ = 0` with value `1/s`; the λ = 0 slice is the Euclidean
//! free propagator on `R^{2n}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::central::{forward_central, inverse_central, LambdaStack};
use crate::error::{Error, Result};
use crate::fft::{transform_all, Direction, FftPlan};
use crate::field::{AnalyticField, GridFunction, HeisenbergSample, Slice2N};
use crate::grid::SpatialGrid;
use crate::linalg::RealMatrix;
use crate::{cis, C64};

/// λ is excluded when `λ ≠ 0` and `dist(λs, πZ∖{0}) < SING_TOL`.
pub const SING_TOL: f64 = 1e-3;

/// True when `(λ, s)` sits on (or within [`SING_TOL`] of) a caustic.
pub fn is_singular(lambda: f64, s: f64) -> bool {
    let x = lambda * s;
    if lambda == 0.0 || x.abs() < 0.5 * PI {
        return false;
    }
    let m = libm::round(x / PI);
    m != 0.0 && (x - m * PI).abs() < SING_TOL
}

/// `(a, b) = (λ / sin(λs), λ cot(λs))`, continued analytically through
/// `λs = 0`.
pub fn mehler_coefficients(lambda: f64, s: f64) -> (f64, f64) {
    let x = lambda * s;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        let a = (1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0) / s;
        let b = (1.0 - x2 / 3.0 - x2 * x2 / 45.0) / s;
        (a, b)
    } else {
        let (sn, cs) = libm::sincos(x);
        (lambda / sn, lambda * cs / sn)
    }
}

/// `(λ, s, n)` for which the kernel formula is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    lambda: f64,
    s: f64,
    n: usize,
}

impl KernelParams {
    pub fn new(lambda: f64, s: f64, n: usize) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(alloc::format!("propagation time s = {s} must be positive")));
        }
        if !lambda.is_finite() {
            return Err(Error::Domain(alloc::format!("lambda = {lambda} is not finite")));
        }
        if n == 0 || n > crate::grid::MAX_N {
            return Err(Error::Domain(alloc::format!("n = {n} unsupported")));
        }
        Self::signed(lambda, s, n)
    }

    /// Allows negative `s` (backward propagation).
    fn signed(lambda: f64, s: f64, n: usize) -> Result<Self> {
        if s == 0.0 || is_singular(lambda, s) {
            return Err(Error::SingularLambda { lambda, s });
        }
        Ok(Self { lambda, s, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c = (4π)^{−n} (λ / (i sin λs))^n`.
    pub fn normalization(&self) -> C64 {
        let (a, _) = mehler_coefficients(self.lambda, self.s);
        C64::new(0.0, -a / (4.0 * PI)).powu(self.n as u32)
    }

    /// Kernel as a symbolic chirp: `c · e^{i(b/4)|z|²}`.
    pub fn kernel_field(&self) -> AnalyticField {
        let (_, b) = mehler_coefficients(self.lambda, self.s);
        AnalyticField::chirp(2 * self.n, 0.25 * b).scale(self.normalization())
    }

    pub fn j_map(&self) -> JLambdaMap {
        JLambdaMap::from_params(self)
    }
}

/// `h^λ_{is}(z)`.
pub fn kernel_eval(p: &KernelParams, z: &[f64]) -> C64 {
    let (_, b) = mehler_coefficients(p.lambda, p.s);
    let r2: f64 = z.iter().map(|v| v * v).sum();
    p.normalization() * cis(0.25 * b * r2)
}

/// The linear map `J_λ = (λ/2)(J + cot(λs) I)` and the chirp
/// `γ(z) = e^{i(λ/4)cot(λs)|z|²}`.
///
/// Coordinates are `(x_1..x_n, y_1..y_n)`;
/// `(J_λ z)_{x_j} = (b/2) x_j + (λ/2) y_j`, `(J_λ z)_{y_j} = (b/2) y_j − (λ/2) x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JLambdaMap {
    lambda: f64,
    s: f64,
    n: usize,
    /// `b / 2`.
    diag: f64,
    /// `λ / 2`.
    skew: f64,
    /// `a / 2`.
    half_a: f64,
}

impl JLambdaMap {
    fn from_params(p: &KernelParams) -> Self {
        let (a, b) = mehler_coefficients(p.lambda, p.s);
        Self { lambda: p.lambda, s: p.s, n: p.n, diag: 0.5 * b, skew: 0.5 * p.lambda, half_a: 0.5 * a }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `J_λ z`.
    #[inline]
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let (x, y) = (z[j], z[n + j]);
            out[j] = self.diag * x + self.skew * y;
            out[n + j] = self.diag * y - self.skew * x;
        }
    }

    /// `J_λᵀ w`.
    #[inline]
    pub fn apply_transpose(&self, w: &[f64], out: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let (u, v) = (w[j], w[n + j]);
            out[j] = self.diag * u - self.skew * v;
            out[n + j] = self.diag * v + self.skew * u;
        }
    }

    /// Assembled `2n × 2n` matrix.
    pub fn matrix(&self) -> RealMatrix {
        let n = self.n;
        let mut m = RealMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            m[(j, j)] = self.diag;
            m[(j, n + j)] = self.skew;
            m[(n + j, n + j)] = self.diag;
            m[(n + j, j)] = -self.skew;
        }
        m
    }

    /// `(λ/2)^{2n} (cot²(λs) + 1)^n = (λ / (2 sin λs))^{2n}`.
    pub fn det(&self) -> f64 {
        libm::pow(self.half_a * self.half_a, self.n as f64)
    }

    /// `γ(z)`.
    pub fn chirp(&self, z: &[f64]) -> C64 {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        cis(0.5 * self.diag * r2)
    }
}

/// Second operand of a twisted convolution.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    /// Sampled on the same grid; periodic wrap-around.
    Slice(&'a Slice2N),
    /// Evaluated exactly at `z − w` (no wrap), e.g. a non-decaying kernel.
    Field(&'a AnalyticField),
}

/// `Im(z · w̄) = Σ_j (y_j u_j − x_j v_j)` for `z = (x, y)`, `w = (u, v)`.
#[inline]
fn symplectic(z: &[f64], w: &[f64]) -> f64 {
    let n = z.len() / 2;
    (0..n).map(|j| z[n + j] * w[j] - z[j] * w[n + j]).sum()
}

/// `(f ∗_λ g)(z) = h^{2n} Σ_w f(z − w) g(w) e^{i(λ/2) Im(z·w̄)}`.
///
/// Direct `O(N^{4n})` summation. With a sampled `g` the difference `z − w` is
/// wrapped periodically onto the box; with a symbolic `g` the sum runs over
/// the grid samples `w'` of `f` with `g` evaluated at `z − w'`.
pub fn twisted_convolve(f: &Slice2N, g: Operand<'_>, lambda: f64) -> Result<Slice2N> {
    let grid = *f.grid();
    let dim = grid.dim();
    let len = grid.len();
    let np = grid.points();
    let vol = grid.cell_volume();
    let mut out = vec![C64::new(0.0, 0.0); len];
    let mut z = [0.0; 4];
    let mut w = [0.0; 4];
    let mut zi = [0usize; 4];
    let mut wi = [0usize; 4];
    let mut diff = [0usize; 4];
    match g {
        Operand::Slice(gs) => {
            f.check_same_grid(gs)?;
            for (k, o) in out.iter_mut().enumerate() {
                grid.point(k, &mut z[..dim]);
                grid.unravel(k, &mut zi[..dim]);
                let mut acc = C64::new(0.0, 0.0);
                for (m, gv) in gs.values().iter().enumerate() {
                    if *gv == C64::new(0.0, 0.0) {
                        continue;
                    }
                    grid.unravel(m, &mut wi[..dim]);
                    grid.point(m, &mut w[..dim]);
                    // Index of z − w: coordinates −L + (i − j + N/2) h, periodic.
                    for a in 0..dim {
                        diff[a] = (zi[a] + np + np / 2 - wi[a]) % np;
                    }
                    let fv = f.values()[grid.ravel(&diff[..dim])];
                    acc += fv * gv * cis(0.5 * lambda * symplectic(&z[..dim], &w[..dim]));
                }
                *o = acc * vol;
            }
        }
        Operand::Field(gf) => {
            if gf.dim() != dim {
                return Err(Error::GridMismatch("field dimension differs from grid dimension"));
            }
            let mut d = [0.0; 4];
            for (k, o) in out.iter_mut().enumerate() {
                grid.point(k, &mut z[..dim]);
                let mut acc = C64::new(0.0, 0.0);
                for (m, fv) in f.values().iter().enumerate() {
                    if *fv == C64::new(0.0, 0.0) {
                        continue;
                    }
                    grid.point(m, &mut w[..dim]);
                    for a in 0..dim {
                        d[a] = z[a] - w[a];
                    }
                    // Phase uses the second argument of the convolution, z − w'.
                    acc += fv * gf.eval(&d[..dim]) * cis(0.5 * lambda * symplectic(&z[..dim], &d[..dim]));
                }
                *o = acc * vol;
            }
        }
    }
    Slice2N::new(grid, out)
}

/// `u^λ(·, s) = u_0 ∗_λ h^λ_{is}` by direct summation (reference path).
pub fn propagate_slice_direct(u0: &Slice2N, lambda: f64, s: f64) -> Result<Slice2N> {
    let p = KernelParams::new(lambda, s, u0.grid().n())?;
    twisted_convolve(u0, Operand::Field(&p.kernel_field()), lambda)
}

/// Precomputed `h^{2n} γ(w) u_0(w)` for fast evaluation of
/// `c γ(z) Σ_w γ(w) u_0(w) e^{−i⟨J_λ z, w⟩} h^{2n}` at arbitrary points.
#[derive(Debug, Clone)]
pub struct FactoredSlice {
    grid: SpatialGrid,
    params: KernelParams,
    map: JLambdaMap,
    weighted: Vec<C64>,
    nyquist: f64,
}

impl FactoredSlice {
    fn new(u0: &Slice2N, params: KernelParams) -> Self {
        let grid = *u0.grid();
        let map = params.j_map();
        let vol = grid.cell_volume();
        let dim = grid.dim();
        let mut w = [0.0; 4];
        let weighted = u0
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                grid.point(k, &mut w[..dim]);
                v * map.chirp(&w[..dim]) * vol
            })
            .collect();
        Self { grid, params, map, weighted, nyquist: grid.nyquist() }
    }

    /// `u^λ(z, s)`; zero where `J_λ z` leaves the band `|ξ_i| ≤ π/h`.
    pub fn eval(&self, z: &[f64], work: &mut ContractionWork) -> C64 {
        let dim = self.grid.dim();
        let mut xi = [0.0; 4];
        self.map.apply(z, &mut xi[..dim]);
        if xi[..dim].iter().any(|v| v.abs() > self.nyquist) {
            return C64::new(0.0, 0.0);
        }
        let sum = contract(&self.grid, &self.weighted, &xi[..dim], -1.0, work);
        self.params.normalization() * self.map.chirp(z) * sum
    }
}

/// Scratch buffers for [`contract`].
#[derive(Debug, Clone, Default)]
pub struct ContractionWork {
    tables: Vec<C64>,
    buf_a: Vec<C64>,
    buf_b: Vec<C64>,
}

/// `Σ_w data(w) e^{sign·i⟨ξ, w⟩}` over the grid, contracting one axis at a
/// time (last axis first). Cost `O(N^{dim})`.
pub fn contract(grid: &SpatialGrid, data: &[C64], xi: &[f64], sign: f64, work: &mut ContractionWork) -> C64 {
    let dim = grid.dim();
    let np = grid.points();
    let h = grid.spacing();
    let l = grid.extent();
    work.tables.resize(dim * np, C64::new(0.0, 0.0));
    for (a, &x) in xi.iter().enumerate() {
        let table = &mut work.tables[a * np..(a + 1) * np];
        let step = cis(sign * x * h);
        let mut cur = C64::new(0.0, 0.0);
        for (p, e) in table.iter_mut().enumerate() {
            // Recurrence, re-anchored every 16 steps.
            cur = if p % 16 == 0 { cis(sign * x * (-l + p as f64 * h)) } else { cur * step };
            *e = cur;
        }
    }
    // Contract the last axis of `data` first.
    let mut len = data.len();
    work.buf_a.clear();
    work.buf_a.extend_from_slice(data);
    for a in (0..dim).rev() {
        let table = &work.tables[a * np..(a + 1) * np];
        let outer = len / np;
        work.buf_b.clear();
        for o in 0..outer {
            let line = &work.buf_a[o * np..(o + 1) * np];
            let mut acc = C64::new(0.0, 0.0);
            for (v, e) in line.iter().zip(table) {
                acc += v * e;
            }
            work.buf_b.push(acc);
        }
        core::mem::swap(&mut work.buf_a, &mut work.buf_b);
        len = outer;
    }
    work.buf_a[0]
}

/// `u^λ(·, s)` by the chirp × Fourier × `J_λ` factorization, evaluated on the
/// grid with a direct non-uniform sum. Output vanishes where `J_λ z` lies
/// outside the resolved band `|ξ_i| ≤ π/h`.
pub fn propagate_slice_factored(u0: &Slice2N, lambda: f64, s: f64) -> Result<Slice2N> {
    let p = KernelParams::new(lambda, s, u0.grid().n())?;
    Ok(factored_on_grid(u0, p))
}

/// Same as [`propagate_slice_factored`] for symbolic data, sampled first.
pub fn propagate_field_factored(u0: &AnalyticField, grid: &SpatialGrid, lambda: f64, s: f64) -> Result<Slice2N> {
    let sampled = crate::field::sample(u0, grid)?;
    propagate_slice_factored(&sampled, lambda, s)
}

fn factored_on_grid(u0: &Slice2N, p: KernelParams) -> Slice2N {
    let grid = *u0.grid();
    let fs = FactoredSlice::new(u0, p);
    let mut work = ContractionWork::default();
    Slice2N::from_fn(grid, |z| fs.eval(z, &mut work))
}

/// `u^λ(z, s)` at arbitrary points `z` (flattened, `2n` coordinates each).
pub fn propagate_slice_at_points(u0: &Slice2N, lambda: f64, s: f64, points: &[f64]) -> Result<Vec<C64>> {
    let p = KernelParams::new(lambda, s, u0.grid().n())?;
    let dim = u0.grid().dim();
    let fs = FactoredSlice::new(u0, p);
    let mut work = ContractionWork::default();
    Ok(points.chunks_exact(dim).map(|z| fs.eval(z, &mut work)).collect())
}

/// Recovers `u_0` from `u = e^{isL_λ} u_0` by inverting the factorization:
/// `u_0(w) = (det J_λ / c) (2π)^{−2n} γ̄(w) Σ_z e^{i⟨J_λ z, w⟩} γ̄(z) u(z) h^{2n}`.
pub fn invert_factored(u: &Slice2N, lambda: f64, s: f64) -> Result<Slice2N> {
    let grid = *u.grid();
    let p = KernelParams::new(lambda, s, grid.n())?;
    let map = p.j_map();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let scale = map.det() / (p.normalization() * libm::pow(2.0 * PI, dim as f64));
    let mut z = [0.0; 4];
    let weighted: Vec<C64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            grid.point(k, &mut z[..dim]);
            v * map.chirp(&z[..dim]).conj() * vol
        })
        .collect();
    let nyquist = grid.nyquist();
    let mut work = ContractionWork::default();
    let mut eta = [0.0; 4];
    Ok(Slice2N::from_fn(grid, |w| {
        // ⟨J z, w⟩ = ⟨z, Jᵀ w⟩.
        map.apply_transpose(w, &mut eta[..dim]);
        if eta[..dim].iter().any(|v| v.abs() > nyquist) {
            return C64::new(0.0, 0.0);
        }
        scale * map.chirp(w).conj() * contract(&grid, &weighted, &eta[..dim], 1.0, &mut work)
    }))
}

/// Outcome of [`propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub field: HeisenbergSample,
    /// Indices of λ zeroed as singular for this `s`.
    pub excluded: Vec<usize>,
    /// Fraction of `‖u_0‖²` carried by the excluded λ.
    pub excluded_mass_fraction: f64,
}

/// Propagates every λ-slice of a stack in place (singular λ zeroed and
/// marked). Slices that are identically zero are skipped.
pub fn propagate_stack(stack: &mut LambdaStack, s: f64) -> Result<()> {
    let n = stack.grid().n();
    for k in 0..stack.axis().points() {
        let lambda = stack.lambda(k);
        if is_singular(lambda, s) {
            stack.set_excluded(k, true);
            continue;
        }
        stack.set_excluded(k, false);
        if stack.slice(k).values().iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let p = KernelParams::signed(lambda, s, n)?;
        let out = factored_on_grid(stack.slice(k), p);
        stack.set_slice(k, out)?;
    }
    Ok(())
}

/// `e^{is𝓛} u_0`: central transform, per-λ factored propagation, inverse.
pub fn propagate(u0: &HeisenbergSample, s: f64) -> Result<Propagation> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain(alloc::format!("propagation time s = {s} must be >= 0")));
    }
    if s == 0.0 {
        return Ok(Propagation { field: u0.clone(), excluded: Vec::new(), excluded_mass_fraction: 0.0 });
    }
    let mut stack = forward_central(u0);
    let total = stack.norm_sq();
    propagate_stack(&mut stack, s)?;
    let excluded: Vec<usize> = (0..stack.axis().points()).filter(|&k| stack.excluded()[k]).collect();
    let excluded_mass = if excluded.is_empty() {
        0.0
    } else {
        // Excluded slices still hold their input values at this point.
        let m = stack.excluded_norm_sq();
        for &k in &excluded {
            for v in stack.slice_mut(k).values_mut() {
                *v = C64::new(0.0, 0.0);
            }
        }
        m
    };
    let fraction = if total > 0.0 { excluded_mass / total } else { 0.0 };
    Ok(Propagation { field: inverse_central(&stack), excluded, excluded_mass_fraction: fraction })
}

/// Euclidean free propagator on the periodic box: `ŵ(ξ, s) = e^{−i|ξ|²s} ŵ(ξ, 0)`,
/// solving `i∂_s w + Δw = 0`.
pub fn free_euclidean(w0: &Slice2N, s: f64) -> Slice2N {
    let grid = *w0.grid();
    let dim = grid.dim();
    let np = grid.points();
    let plan = FftPlan::new(np);
    let mut data = w0.values().to_vec();
    transform_all(&plan, &mut data, dim, Direction::Forward);
    let freqs: Vec<f64> = (0..np).map(|k| grid.frequency(k)).collect();
    let mut idx = [0usize; 4];
    let norm = 1.0 / grid.len() as f64;
    for (k, v) in data.iter_mut().enumerate() {
        grid.unravel(k, &mut idx[..dim]);
        let xi2: f64 = idx[..dim].iter().map(|&i| freqs[i] * freqs[i]).sum();
        *v *= cis(-xi2 * s) * norm;
    }
    transform_all(&plan, &mut data, dim, Direction::Inverse);
    Slice2N::new(grid, data).expect("length preserved")
}
