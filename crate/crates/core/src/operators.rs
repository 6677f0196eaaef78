//! Periodic finite-difference realizations of the differential operators on
//! `H^n` and on its λ-slices. Spatial derivatives use centred stencils of
//! order 2 or 4; `∂_t` is spectral on the central axis.

use alloc::vec;
use alloc::vec::Vec;

use crate::central::dt_spectral;
use crate::error::{Error, Result};
use crate::field::{GridFunction, HeisenbergSample, Slice2N};
use crate::grid::SpatialGrid;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OperatorKind {
    /// `𝓛 = Σ_j X_j² + Y_j²`.
    SubLaplacian,
    /// `X_j = ∂_{x_j} + (y_j/2) ∂_t` (0-based `j`).
    XField(usize),
    /// `Y_j = ∂_{y_j} − (x_j/2) ∂_t`.
    YField(usize),
    /// `T = ∂_t`.
    Central,
    /// `L_λ = Δ − (λ²/4)|z|² + iλ Σ_j (x_j ∂_{y_j} − y_j ∂_{x_j})`.
    Twisted { lambda: f64 },
    /// `(∇ − iC_λ)²` with `C_λ(x, y) = (λ/2)(y, −x)`.
    Magnetic { lambda: f64 },
    /// `Δ − (λ²/4)|z|²`.
    Hermite { lambda: f64 },
    /// `Δ` on `R^{2n}`.
    Euclidean,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::SubLaplacian => "sub_laplacian",
            OperatorKind::XField(_) => "x_field",
            OperatorKind::YField(_) => "y_field",
            OperatorKind::Central => "central",
            OperatorKind::Twisted { .. } => "twisted",
            OperatorKind::Magnetic { .. } => "magnetic",
            OperatorKind::Hermite { .. } => "hermite",
            OperatorKind::Euclidean => "euclidean",
        }
    }

    fn needs_central_axis(&self) -> bool {
        matches!(
            self,
            OperatorKind::SubLaplacian | OperatorKind::XField(_) | OperatorKind::YField(_) | OperatorKind::Central
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StencilOrder {
    Two,
    #[default]
    Four,
}

/// How `∂²` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SecondDerivative {
    /// Dedicated 3- or 5-point stencil.
    #[default]
    Compact,
    /// First-derivative stencil applied twice; matches operator compositions
    /// such as `X_j ∘ X_j` exactly.
    Composed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub order: StencilOrder,
    pub second: SecondDerivative,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind) -> Self {
        Self { kind, order: StencilOrder::Four, second: SecondDerivative::Compact }
    }

    pub fn with_order(mut self, order: StencilOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_second(mut self, second: SecondDerivative) -> Self {
        self.second = second;
        self
    }
}

/// Spatial layout of a flat array: `values[k·block + j]`, `k` a grid index.
#[derive(Clone, Copy)]
struct Layout {
    grid: SpatialGrid,
    block: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.grid.len() * self.block
    }

    /// Stencil `Σ_m c_m f(i + m)` along `axis` with periodic wrap.
    fn stencil(&self, data: &[C64], axis: usize, taps: &[(isize, f64)], scale: f64) -> Vec<C64> {
        let np = self.grid.points() as isize;
        let stride = self.grid.stride(axis);
        let mut out = vec![ZERO; self.len()];
        for k in 0..self.grid.len() {
            let i = ((k / stride) % np as usize) as isize;
            let base = k - i as usize * stride;
            for &(m, c) in taps {
                let src = base + ((i + m).rem_euclid(np)) as usize * stride;
                let (d, s) = (&mut out[k * self.block..(k + 1) * self.block], &data[src * self.block..(src + 1) * self.block]);
                for (o, v) in d.iter_mut().zip(s) {
                    *o += v * (c * scale);
                }
            }
        }
        out
    }

    fn d1(&self, data: &[C64], axis: usize, order: StencilOrder) -> Vec<C64> {
        let h = self.grid.spacing();
        match order {
            StencilOrder::Two => self.stencil(data, axis, &[(1, 0.5), (-1, -0.5)], 1.0 / h),
            StencilOrder::Four => self.stencil(
                data,
                axis,
                &[(1, 8.0 / 12.0), (-1, -8.0 / 12.0), (2, -1.0 / 12.0), (-2, 1.0 / 12.0)],
                1.0 / h,
            ),
        }
    }

    fn d2(&self, data: &[C64], axis: usize, order: StencilOrder, second: SecondDerivative) -> Vec<C64> {
        let h = self.grid.spacing();
        match second {
            SecondDerivative::Composed => {
                let once = self.d1(data, axis, order);
                self.d1(&once, axis, order)
            }
            SecondDerivative::Compact => match order {
                StencilOrder::Two => self.stencil(data, axis, &[(0, -2.0), (1, 1.0), (-1, 1.0)], 1.0 / (h * h)),
                StencilOrder::Four => self.stencil(
                    data,
                    axis,
                    &[(0, -30.0), (1, 16.0), (-1, 16.0), (2, -1.0), (-2, -1.0)],
                    1.0 / (12.0 * h * h),
                ),
            },
        }
    }

    fn laplacian(&self, data: &[C64], order: StencilOrder, second: SecondDerivative) -> Vec<C64> {
        let mut out = vec![ZERO; self.len()];
        for axis in 0..self.grid.dim() {
            add_assign(&mut out, &self.d2(data, axis, order, second), C64::new(1.0, 0.0));
        }
        out
    }

    /// Multiplies each sample by `weight(z)`.
    fn mul_by(&self, data: &[C64], mut weight: impl FnMut(&[f64]) -> C64) -> Vec<C64> {
        let dim = self.grid.dim();
        let mut z = [0.0; 4];
        let mut out = data.to_vec();
        for k in 0..self.grid.len() {
            self.grid.point(k, &mut z[..dim]);
            let w = weight(&z[..dim]);
            for v in &mut out[k * self.block..(k + 1) * self.block] {
                *v *= w;
            }
        }
        out
    }

    /// `Σ_j (x_j ∂_{y_j} − y_j ∂_{x_j}) f`.
    fn rotation(&self, data: &[C64], order: StencilOrder) -> Vec<C64> {
        let n = self.grid.n();
        let mut out = vec![ZERO; self.len()];
        for j in 0..n {
            let dy = self.d1(data, n + j, order);
            let dx = self.d1(data, j, order);
            add_assign(&mut out, &self.mul_by(&dy, |z| C64::new(z[j], 0.0)), C64::new(1.0, 0.0));
            add_assign(&mut out, &self.mul_by(&dx, |z| C64::new(z[n + j], 0.0)), C64::new(-1.0, 0.0));
        }
        out
    }

    fn spatial(&self, data: &[C64], spec: &OperatorSpec) -> Vec<C64> {
        let (order, second) = (spec.order, spec.second);
        match spec.kind {
            OperatorKind::Euclidean => self.laplacian(data, order, second),
            OperatorKind::Hermite { lambda } => {
                let mut out = self.laplacian(data, order, second);
                let q = 0.25 * lambda * lambda;
                add_assign(&mut out, &self.mul_by(data, |z| C64::new(-q * norm2(z), 0.0)), C64::new(1.0, 0.0));
                out
            }
            OperatorKind::Twisted { lambda } => {
                let mut out = self.laplacian(data, order, second);
                let q = 0.25 * lambda * lambda;
                add_assign(&mut out, &self.mul_by(data, |z| C64::new(-q * norm2(z), 0.0)), C64::new(1.0, 0.0));
                add_assign(&mut out, &self.rotation(data, order), I * lambda);
                out
            }
            OperatorKind::Magnetic { lambda } => {
                // Δ − 2i C·∇ − i(∇·C) − |C|², with ∇·C = 0.
                let n = self.grid.n();
                let mut out = self.laplacian(data, order, second);
                for j in 0..n {
                    let dx = self.d1(data, j, order);
                    let dy = self.d1(data, n + j, order);
                    let cx = |z: &[f64]| C64::new(0.5 * lambda * z[n + j], 0.0);
                    let cy = |z: &[f64]| C64::new(-0.5 * lambda * z[j], 0.0);
                    add_assign(&mut out, &self.mul_by(&dx, cx), -2.0 * I);
                    add_assign(&mut out, &self.mul_by(&dy, cy), -2.0 * I);
                }
                let c2 = 0.25 * lambda * lambda;
                add_assign(&mut out, &self.mul_by(data, |z| C64::new(-c2 * norm2(z), 0.0)), C64::new(1.0, 0.0));
                out
            }
            _ => unreachable!("central-axis operators handled by the caller"),
        }
    }
}

fn norm2(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

fn add_assign(acc: &mut [C64], other: &[C64], c: C64) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b * c;
    }
}

/// Sampled fields the operators act on.
pub trait OperatorInput: GridFunction + Clone + Sized {
    const TYPE_NAME: &'static str;

    fn apply_op(&self, spec: &OperatorSpec) -> Result<Self>;

    /// Same layout, new values.
    fn with_values(&self, values: Vec<C64>) -> Self;

    /// Multiplies by a time-independent spatial function.
    fn mul_spatial(&self, potential: &Slice2N) -> Result<Self>;
}

impl OperatorInput for Slice2N {
    const TYPE_NAME: &'static str = "slice";

    fn apply_op(&self, spec: &OperatorSpec) -> Result<Self> {
        if spec.kind.needs_central_axis() {
            return Err(Error::IncompatibleOperator { op: spec.kind.name(), input: Self::TYPE_NAME });
        }
        let layout = Layout { grid: *self.grid(), block: 1 };
        Ok(self.with_values(layout.spatial(self.values(), spec)))
    }

    fn with_values(&self, values: Vec<C64>) -> Self {
        Slice2N::new(*self.grid(), values).expect("same layout")
    }

    fn mul_spatial(&self, potential: &Slice2N) -> Result<Self> {
        self.check_same_grid(potential)?;
        let values = self.values().iter().zip(potential.values()).map(|(a, b)| a * b).collect();
        Ok(self.with_values(values))
    }
}

impl OperatorInput for HeisenbergSample {
    const TYPE_NAME: &'static str = "heisenberg_sample";

    fn apply_op(&self, spec: &OperatorSpec) -> Result<Self> {
        let grid = *self.grid();
        let n = grid.n();
        let layout = Layout { grid, block: self.axis().points() };
        let data = self.values();
        let values = match spec.kind {
            OperatorKind::Central => return Ok(dt_spectral(self, 1)),
            OperatorKind::XField(j) | OperatorKind::YField(j) if j >= n => {
                return Err(Error::Domain(alloc::format!("vector field index {j} out of range for n = {n}")))
            }
            OperatorKind::XField(j) => {
                let mut out = layout.d1(data, j, spec.order);
                let dt = dt_spectral(self, 1);
                add_assign(&mut out, &layout.mul_by(dt.values(), |z| C64::new(0.5 * z[n + j], 0.0)), C64::new(1.0, 0.0));
                out
            }
            OperatorKind::YField(j) => {
                let mut out = layout.d1(data, n + j, spec.order);
                let dt = dt_spectral(self, 1);
                add_assign(&mut out, &layout.mul_by(dt.values(), |z| C64::new(-0.5 * z[j], 0.0)), C64::new(1.0, 0.0));
                out
            }
            OperatorKind::SubLaplacian => {
                // Δ + (|z|²/4) ∂_t² − Σ_j (x_j ∂_{y_j} − y_j ∂_{x_j}) ∂_t.
                let mut out = layout.laplacian(data, spec.order, spec.second);
                let dt = dt_spectral(self, 1);
                let dtt = dt_spectral(self, 2);
                add_assign(&mut out, &layout.mul_by(dtt.values(), |z| C64::new(0.25 * norm2(z), 0.0)), C64::new(1.0, 0.0));
                add_assign(&mut out, &layout.rotation(dt.values(), spec.order), C64::new(-1.0, 0.0));
                out
            }
            _ => layout.spatial(data, spec),
        };
        Ok(self.with_values(values))
    }

    fn with_values(&self, values: Vec<C64>) -> Self {
        HeisenbergSample::new(*self.grid(), *self.axis(), values).expect("same layout")
    }

    fn mul_spatial(&self, potential: &Slice2N) -> Result<Self> {
        if potential.grid() != self.grid() {
            return Err(Error::GridMismatch("potential and sample live on different grids"));
        }
        let m = self.axis().points();
        let mut values = self.values().to_vec();
        for (k, p) in potential.values().iter().enumerate() {
            for v in &mut values[k * m..(k + 1) * m] {
                *v *= p;
            }
        }
        Ok(self.with_values(values))
    }
}

pub fn apply<F: OperatorInput>(spec: &OperatorSpec, f: &F) -> Result<F> {
    f.apply_op(spec)
}

/// `Σ_j X_j(X_j f) + Y_j(Y_j f)` by explicit composition.
pub fn sub_laplacian_composed(f: &HeisenbergSample, order: StencilOrder) -> Result<HeisenbergSample> {
    let n = f.grid().n();
    let mut acc = vec![ZERO; f.values().len()];
    for j in 0..n {
        for kind in [OperatorKind::XField(j), OperatorKind::YField(j)] {
            let spec = OperatorSpec::new(kind).with_order(order);
            let once = apply(&spec, f)?;
            let twice = apply(&spec, &once)?;
            add_assign(&mut acc, twice.values(), C64::new(1.0, 0.0));
        }
    }
    Ok(f.with_values(acc))
}

/// `Σ_k (∂_k − iC_k)² g` by explicit composition.
pub fn magnetic_composed(g: &Slice2N, lambda: f64, order: StencilOrder) -> Slice2N {
    let grid = *g.grid();
    let n = grid.n();
    let layout = Layout { grid, block: 1 };
    let covariant = |data: &[C64], axis: usize| -> Vec<C64> {
        let mut out = layout.d1(data, axis, order);
        let coeff = move |z: &[f64]| {
            let c = if axis < n { 0.5 * lambda * z[n + axis] } else { -0.5 * lambda * z[axis - n] };
            C64::new(0.0, -c)
        };
        add_assign(&mut out, &layout.mul_by(data, coeff), C64::new(1.0, 0.0));
        out
    };
    let mut acc = vec![ZERO; grid.len()];
    for axis in 0..grid.dim() {
        let once = covariant(g.values(), axis);
        add_assign(&mut acc, &covariant(&once, axis), C64::new(1.0, 0.0));
    }
    g.with_values(acc)
}

/// `max_k ‖i(u_{k+1} − u_{k−1})/(2dt) + op(u_k) + V_k u_k‖ / ‖u_k‖` over
/// interior `k`. Terms with `‖u_k‖ = 0` and zero numerator count as 0.
pub fn pde_residual<F: OperatorInput>(
    path: &[F],
    spec: &OperatorSpec,
    potential: Option<&[Slice2N]>,
    dt: f64,
) -> Result<f64> {
    if path.len() < 3 {
        return Err(Error::TooFewSamples(path.len()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonUniformTimes);
    }
    if let Some(v) = potential {
        if v.len() != path.len() {
            return Err(Error::LengthMismatch { expected: path.len(), got: v.len() });
        }
    }
    let mut worst: f64 = 0.0;
    for k in 1..path.len() - 1 {
        let (prev, cur, next) = (&path[k - 1], &path[k], &path[k + 1]);
        if prev.values().len() != cur.values().len() || next.values().len() != cur.values().len() {
            return Err(Error::GridMismatch("path samples differ in layout"));
        }
        let mut res = cur.apply_op(spec)?.values().to_vec();
        if let Some(v) = potential {
            add_assign(&mut res, cur.mul_spatial(&v[k])?.values(), C64::new(1.0, 0.0));
        }
        let c = I / (2.0 * dt);
        for ((r, a), b) in res.iter_mut().zip(next.values()).zip(prev.values()) {
            *r += (a - b) * c;
        }
        let num: f64 = res.iter().map(|v| v.norm_sqr()).sum::<f64>() * cur.cell_weight();
        let den = cur.norm_sq_total();
        let ratio = if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            libm::sqrt(num / den)
        };
        worst = worst.max(ratio);
    }
    Ok(worst)
}
