//! Sampled fields on grids and the symbolic Gaussian × polynomial × chirp
//! family.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{CentralAxis, SpatialGrid};
use crate::linalg::RealMatrix;
use crate::sets::IndicatorSet;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Common view of sampled complex fields.
pub trait GridFunction {
    fn grid(&self) -> &SpatialGrid;
    fn values(&self) -> &[C64];
    /// Quadrature weight of one sample.
    fn cell_weight(&self) -> f64;

    /// Discrete squared L² norm, `weight · Σ |v|²`.
    fn norm_sq_total(&self) -> f64 {
        self.cell_weight() * self.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    fn max_abs(&self) -> f64 {
        self.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// One λ-slice: a complex function sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Slice2N {
    grid: SpatialGrid,
    values: Vec<C64>,
}

impl Slice2N {
    pub fn new(grid: SpatialGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![ZERO; grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: SpatialGrid, mut f: impl FnMut(&[f64]) -> C64) -> Self {
        let mut z = [0.0; 4];
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|k| {
                grid.point(k, &mut z[..dim]);
                f(&z[..dim])
            })
            .collect();
        Self { grid, values }
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// `h^{2n} Σ_{k ∈ region} |v_k|²`; the whole grid when `region` is `None`.
    pub fn norm_sq(&self, region: Option<&IndicatorSet>) -> Result<f64> {
        match region {
            None => Ok(self.norm_sq_total()),
            Some(set) => {
                if set.grid() != &self.grid {
                    return Err(Error::GridMismatch("slice and region live on different grids"));
                }
                let sum: f64 = self
                    .values
                    .iter()
                    .zip(set.mask())
                    .filter(|(_, &m)| m)
                    .map(|(v, _)| v.norm_sqr())
                    .sum();
                Ok(self.grid.cell_volume() * sum)
            }
        }
    }

    /// Discrete inner product `h^{2n} Σ conj(a) b`.
    pub fn inner(&self, other: &Slice2N) -> Result<C64> {
        self.check_same_grid(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &Slice2N) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn relative_distance(&self, reference: &Slice2N) -> Result<f64> {
        self.check_same_grid(reference)?;
        Ok(crate::relative_l2(&self.values, &reference.values))
    }

    /// Largest modulus on the outermost layer of grid cells relative to the
    /// global maximum (0 for the zero field).
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = (0..self.grid.len())
            .filter(|&k| self.grid.on_boundary(k))
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    pub(crate) fn check_same_grid(&self, other: &Slice2N) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("slices live on different grids"));
        }
        Ok(())
    }
}

impl GridFunction for Slice2N {
    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }
    fn values(&self) -> &[C64] {
        &self.values
    }
    fn cell_weight(&self) -> f64 {
        self.grid.cell_volume()
    }
}

/// A complex function of `(z, t)` sampled on `SpatialGrid × CentralAxis`.
///
/// Layout: flat spatial index major, time index minor
/// (`values[k·M + j]` is the sample at grid point `k`, time `t_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergSample {
    grid: SpatialGrid,
    axis: CentralAxis,
    values: Vec<C64>,
}

impl HeisenbergSample {
    pub fn new(grid: SpatialGrid, axis: CentralAxis, values: Vec<C64>) -> Result<Self> {
        let expected = grid.len() * axis.points();
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, got: values.len() });
        }
        Ok(Self { grid, axis, values })
    }

    pub fn zeros(grid: SpatialGrid, axis: CentralAxis) -> Self {
        Self { grid, axis, values: vec![ZERO; grid.len() * axis.points()] }
    }

    pub fn from_fn(grid: SpatialGrid, axis: CentralAxis, mut f: impl FnMut(&[f64], f64) -> C64) -> Self {
        let dim = grid.dim();
        let m = axis.points();
        let mut z = [0.0; 4];
        let mut values = Vec::with_capacity(grid.len() * m);
        for k in 0..grid.len() {
            grid.point(k, &mut z[..dim]);
            for j in 0..m {
                values.push(f(&z[..dim], axis.time(j)));
            }
        }
        Self { grid, axis, values }
    }

    /// `g(z)·e^{iωt}` style separable samples: `values[k, j] = a_k b_j`.
    pub fn separable(spatial: &Slice2N, temporal: &[C64], axis: CentralAxis) -> Result<Self> {
        if temporal.len() != axis.points() {
            return Err(Error::LengthMismatch { expected: axis.points(), got: temporal.len() });
        }
        let mut values = Vec::with_capacity(spatial.values().len() * temporal.len());
        for a in spatial.values() {
            values.extend(temporal.iter().map(|b| a * b));
        }
        Ok(Self { grid: *spatial.grid(), axis, values })
    }

    pub fn axis(&self) -> &CentralAxis {
        &self.axis
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Samples at time index `j` as a slice.
    pub fn time_slice(&self, j: usize) -> Slice2N {
        let m = self.axis.points();
        let values = (0..self.grid.len()).map(|k| self.values[k * m + j]).collect();
        Slice2N { grid: self.grid, values }
    }

    /// `h^{2n} Δt Σ_{z ∈ region, t} |v|²`.
    pub fn norm_sq(&self, region: Option<&IndicatorSet>) -> Result<f64> {
        let m = self.axis.points();
        let w = self.cell_weight();
        match region {
            None => Ok(self.norm_sq_total()),
            Some(set) => {
                if set.grid() != &self.grid {
                    return Err(Error::GridMismatch("sample and region live on different grids"));
                }
                let mut sum = 0.0;
                for (k, &inside) in set.mask().iter().enumerate() {
                    if inside {
                        sum += self.values[k * m..(k + 1) * m].iter().map(|v| v.norm_sqr()).sum::<f64>();
                    }
                }
                Ok(w * sum)
            }
        }
    }

    pub fn inner(&self, other: &HeisenbergSample) -> Result<C64> {
        self.check_same_layout(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.cell_weight())
    }

    pub fn relative_distance(&self, reference: &HeisenbergSample) -> Result<f64> {
        self.check_same_layout(reference)?;
        Ok(crate::relative_l2(&self.values, &reference.values))
    }

    pub(crate) fn check_same_layout(&self, other: &HeisenbergSample) -> Result<()> {
        if self.grid != other.grid || self.axis != other.axis {
            return Err(Error::GridMismatch("samples live on different grids"));
        }
        Ok(())
    }
}

impl GridFunction for HeisenbergSample {
    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }
    fn values(&self) -> &[C64] {
        &self.values
    }
    fn cell_weight(&self) -> f64 {
        self.grid.cell_volume() * self.axis.spacing()
    }
}

/// Largest total polynomial degree in the symbolic family.
pub const MAX_DEGREE: usize = 4;

type Exponents = [u8; 4];

/// Polynomial in up to four real variables with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Exponents, C64>,
}

impl Polynomial {
    pub fn constant(c: C64) -> Self {
        let mut terms = BTreeMap::new();
        if c != ZERO {
            terms.insert([0; 4], c);
        }
        Self { terms }
    }

    /// The coordinate `w_axis`.
    pub fn variable(axis: usize) -> Self {
        let mut e = [0; 4];
        e[axis] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, C64::new(1.0, 0.0));
        Self { terms }
    }

    /// Affine form `Σ a_i w_i + c`.
    pub fn affine(coeffs: &[C64], c: C64) -> Self {
        let mut p = Self::constant(c);
        for (i, &a) in coeffs.iter().enumerate() {
            if a != ZERO {
                p.add_term(unit(i), a);
            }
        }
        p
    }

    /// Single monomial `c · Π w_i^{e_i}`.
    pub fn monomial(exponents: &[u8], c: C64) -> Result<Self> {
        let mut e = [0; 4];
        e[..exponents.len()].copy_from_slice(exponents);
        let deg: usize = e.iter().map(|&k| k as usize).sum();
        if deg > MAX_DEGREE {
            return Err(Error::DegreeOverflow(deg));
        }
        let mut p = Self::default();
        p.add_term(e, c);
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: C64) {
        let entry = self.terms.entry(e).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&e);
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max().unwrap_or(0)
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, w: &[f64]) -> C64 {
        let mut acc = ZERO;
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    m *= w[i];
                }
            }
            acc += c * m;
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn scale(&self, c: C64) -> Polynomial {
        let mut out = Polynomial::default();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    /// Product; errors when the degree would exceed [`MAX_DEGREE`].
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        let deg = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && deg > MAX_DEGREE {
            return Err(Error::DegreeOverflow(deg));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = [0; 4];
                for i in 0..4 {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `∂/∂w_axis`.
    pub fn partial(&self, axis: usize) -> Polynomial {
        let mut out = Polynomial::default();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut d = *e;
                d[axis] -= 1;
                out.add_term(d, c * e[axis] as f64);
            }
        }
        out
    }

    /// Substitutes `w_i ↦ Σ_j A_ij w_j + b_i`.
    fn substitute(&self, a: &RealMatrix, b: &[f64]) -> Polynomial {
        let dim = b.len();
        let forms: Vec<Polynomial> = (0..dim)
            .map(|i| {
                let coeffs: Vec<C64> = (0..dim).map(|j| C64::new(a[(i, j)], 0.0)).collect();
                Polynomial::affine(&coeffs, C64::new(b[i], 0.0))
            })
            .collect();
        let mut out = Polynomial::default();
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(*c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul_unchecked(&forms[i]);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

fn unit(i: usize) -> Exponents {
    let mut e = [0; 4];
    e[i] = 1;
    e
}

/// Real quadratic form `wᵀ A w + b·w + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub matrix: RealMatrix,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn zero(dim: usize) -> Self {
        Self { matrix: RealMatrix::zeros(dim, dim), linear: vec![0.0; dim], constant: 0.0 }
    }

    /// `a |w|²`.
    pub fn isotropic(dim: usize, a: f64) -> Self {
        Self { matrix: RealMatrix::identity(dim, dim) * a, linear: vec![0.0; dim], constant: 0.0 }
    }

    /// `a |w − center|²`.
    pub fn centered(center: &[f64], a: f64) -> Self {
        let dim = center.len();
        Self {
            matrix: RealMatrix::identity(dim, dim) * a,
            linear: center.iter().map(|c| -2.0 * a * c).collect(),
            constant: a * center.iter().map(|c| c * c).sum::<f64>(),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let dim = self.dim();
        let mut acc = self.constant;
        for i in 0..dim {
            let mut row = 0.0;
            for j in 0..dim {
                row += self.matrix[(i, j)] * w[j];
            }
            acc += w[i] * row + self.linear[i] * w[i];
        }
        acc
    }

    /// Gradient `2 A w + b` as affine forms.
    fn gradient_forms(&self) -> Vec<(Vec<f64>, f64)> {
        let dim = self.dim();
        (0..dim)
            .map(|i| ((0..dim).map(|j| 2.0 * self.matrix[(i, j)]).collect(), self.linear[i]))
            .collect()
    }

    pub fn add(&self, other: &Quadratic) -> Quadratic {
        Quadratic {
            matrix: &self.matrix + &other.matrix,
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + b).collect(),
            constant: self.constant + other.constant,
        }
    }

    /// `w ↦ q(A w + b)`.
    fn compose(&self, a: &RealMatrix, b: &[f64]) -> Quadratic {
        let dim = b.len();
        let qb: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| self.matrix[(i, j)] * b[j]).sum())
            .collect();
        let matrix = a.transpose() * &self.matrix * a;
        let linear = (0..dim)
            .map(|j| (0..dim).map(|i| a[(i, j)] * (2.0 * qb[i] + self.linear[i])).sum())
            .collect();
        let constant = self.constant
            + (0..dim).map(|i| b[i] * qb[i] + self.linear[i] * b[i]).sum::<f64>();
        Quadratic { matrix: symmetrize(&matrix), linear, constant }
    }

    fn is_psd(&self) -> bool {
        let scale = self.matrix.amax().max(1.0);
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .all(|&e| e >= -1e-12 * scale)
    }
}

fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// One symbolic term `coeff · p(w) · exp(−q(w)) · exp(i r(w))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub poly: Polynomial,
    pub decay: Quadratic,
    pub phase: Quadratic,
}

impl Term {
    fn eval(&self, w: &[f64]) -> C64 {
        let p = self.poly.eval(w);
        if p == ZERO {
            return ZERO;
        }
        let mag = libm::exp(-self.decay.eval(w));
        self.coeff * p * crate::cis(self.phase.eval(w)) * mag
    }
}

/// Finite sum of Gaussian × polynomial × chirp terms on `R^{dim}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    dim: usize,
    terms: Vec<Term>,
}

impl AnalyticField {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    /// Builds a field from explicit terms; every decay form must be positive
    /// semidefinite and every polynomial of degree ≤ [`MAX_DEGREE`].
    pub fn from_terms(dim: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.decay.dim() != dim || t.phase.dim() != dim {
                return Err(Error::Domain(format!("quadratic form dimension differs from {dim}")));
            }
            if t.poly.degree() > MAX_DEGREE {
                return Err(Error::DegreeOverflow(t.poly.degree()));
            }
            if !t.decay.is_psd() {
                return Err(Error::Domain("decay form is not positive semidefinite".into()));
            }
        }
        Ok(Self { dim, terms })
    }

    fn single(dim: usize, coeff: C64, decay: Quadratic, phase: Quadratic) -> Self {
        Self {
            dim,
            terms: vec![Term { coeff, poly: Polynomial::constant(C64::new(1.0, 0.0)), decay, phase }],
        }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::single(dim, c, Quadratic::zero(dim), Quadratic::zero(dim))
    }

    /// `exp(−a |w|²)`, `a ≥ 0`.
    pub fn gaussian(dim: usize, a: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::Domain(format!("Gaussian width parameter {a} must be >= 0")));
        }
        Ok(Self::single(dim, C64::new(1.0, 0.0), Quadratic::isotropic(dim, a), Quadratic::zero(dim)))
    }

    /// `exp(−a |w − center|²)`.
    pub fn gaussian_at(center: &[f64], a: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::Domain(format!("Gaussian width parameter {a} must be >= 0")));
        }
        let dim = center.len();
        Ok(Self::single(dim, C64::new(1.0, 0.0), Quadratic::centered(center, a), Quadratic::zero(dim)))
    }

    /// `exp(i b |w|²)`.
    pub fn chirp(dim: usize, b: f64) -> Self {
        Self::single(dim, C64::new(1.0, 0.0), Quadratic::zero(dim), Quadratic::isotropic(dim, b))
    }

    /// `exp(i ⟨ξ, w⟩)`.
    pub fn plane_wave(xi: &[f64]) -> Self {
        let dim = xi.len();
        let mut phase = Quadratic::zero(dim);
        phase.linear = xi.to_vec();
        Self::single(dim, C64::new(1.0, 0.0), Quadratic::zero(dim), phase)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the field is real-valued: real coefficients and no chirp.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coeff.im == 0.0
                && t.poly.is_real()
                && t.phase.constant == 0.0
                && t.phase.linear.iter().all(|v| *v == 0.0)
                && t.phase.matrix.iter().all(|v| *v == 0.0)
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, w: &[f64]) -> C64 {
        debug_assert_eq!(w.len(), self.dim);
        self.terms.iter().map(|t| t.eval(w)).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: t.coeff * c, ..t.clone() })
            .collect();
        Self { dim: self.dim, terms }
    }

    pub fn add(&self, other: &AnalyticField) -> Result<Self> {
        self.check_dim(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dim: self.dim, terms })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &AnalyticField) -> Result<Self> {
        self.check_dim(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    poly: a.poly.mul(&b.poly)?,
                    decay: a.decay.add(&b.decay),
                    phase: a.phase.add(&b.phase),
                });
            }
        }
        Ok(Self { dim: self.dim, terms })
    }

    /// Multiplies by the polynomial `p`.
    pub fn mul_poly(&self, p: &Polynomial) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(Term { poly: t.poly.mul(p)?, ..t.clone() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: self.dim, terms })
    }

    /// Multiplies by `exp(i b |w|²)`.
    pub fn mul_chirp(&self, b: f64) -> Self {
        let extra = Quadratic::isotropic(self.dim, b);
        let terms = self
            .terms
            .iter()
            .map(|t| Term { phase: t.phase.add(&extra), ..t.clone() })
            .collect();
        Self { dim: self.dim, terms }
    }

    /// Exact `∂/∂w_axis`: `∂(p e^{φ}) = (∂p + p ∂φ) e^{φ}` with `φ = −q + i r`.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let (dq, cq) = &t.decay.gradient_forms()[axis];
            let (dr, cr) = &t.phase.gradient_forms()[axis];
            let coeffs: Vec<C64> = dq.iter().zip(dr).map(|(a, b)| C64::new(-a, *b)).collect();
            let dphi = Polynomial::affine(&coeffs, C64::new(-cq, *cr));
            let poly = t.poly.partial(axis).add(&t.poly.mul(&dphi)?);
            terms.push(Term { poly, ..t.clone() });
        }
        Ok(Self { dim: self.dim, terms })
    }

    /// `g(w) = self(A w + b)`, staying inside the family.
    pub fn affine_pushforward(&self, a: &RealMatrix, b: &[f64]) -> Result<Self> {
        if a.nrows() != self.dim || a.ncols() != self.dim || b.len() != self.dim {
            return Err(Error::Domain(format!("affine map must be {0}×{0}", self.dim)));
        }
        let det = a.determinant();
        let scale = (0..a.nrows()).map(|r| a.row(r).norm()).fold(0.0_f64, f64::max);
        if !(det.abs() >= 1e-12 * scale) || scale == 0.0 {
            return Err(Error::SingularMatrix { det });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff,
                poly: t.poly.substitute(a, b),
                decay: t.decay.compose(a, b),
                phase: t.phase.compose(a, b),
            })
            .collect();
        Ok(Self { dim: self.dim, terms })
    }

    fn check_dim(&self, other: &AnalyticField) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!("field dimensions differ: {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }
}

/// `values[k] = field(z_k)`.
pub fn sample(field: &AnalyticField, grid: &SpatialGrid) -> Result<Slice2N> {
    if field.dim() != grid.dim() {
        return Err(Error::GridMismatch("field dimension differs from grid dimension"));
    }
    Ok(Slice2N::from_fn(*grid, |z| field.eval(z)))
}
