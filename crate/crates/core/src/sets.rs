//! Measurable subsets of `R^{2n}`: exact geometric descriptions and their
//! grid masks.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::linalg::{checked_inverse, RealMatrix};

/// Exact geometric region in `R^{dim}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Empty,
    Whole,
    /// Axis-aligned box `Π [c_i − a_i, c_i + a_i]`.
    Box { center: Vec<f64>, half_widths: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// `{ z : |⟨normal, z⟩ − offset| ≤ half_width }`.
    Strip { normal: Vec<f64>, offset: f64, half_width: f64 },
    /// `{ A z : z ∈ inner }` for invertible `A`.
    LinearImage { matrix: RealMatrix, inner: Box<Region> },
}

impl Region {
    /// Centered cube `[−a, a]^{dim}`.
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Region::Box { center: alloc::vec![0.0; dim], half_widths: alloc::vec![half_width; dim] }
    }

    pub fn centered_ball(dim: usize, radius: f64) -> Self {
        Region::Ball { center: alloc::vec![0.0; dim], radius }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        match self {
            Region::Empty => false,
            Region::Whole => true,
            Region::Box { center, half_widths } => z
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((x, c), a)| (x - c).abs() <= *a),
            Region::Ball { center, radius } => {
                z.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum::<f64>() <= radius * radius
            }
            Region::Strip { normal, offset, half_width } => {
                let p: f64 = z.iter().zip(normal).map(|(x, n)| x * n).sum();
                (p - offset).abs() <= *half_width
            }
            Region::LinearImage { matrix, inner } => match checked_inverse(matrix) {
                Ok(inv) => {
                    let dim = z.len();
                    let mut pre = [0.0; 4];
                    for i in 0..dim {
                        pre[i] = (0..dim).map(|j| inv[(i, j)] * z[j]).sum();
                    }
                    inner.contains(&pre[..dim])
                }
                Err(_) => false,
            },
        }
    }

    /// Lebesgue measure in `R^{dim}` (`None` when infinite).
    pub fn measure(&self, dim: usize) -> Option<f64> {
        match self {
            Region::Empty => Some(0.0),
            Region::Whole | Region::Strip { .. } => None,
            Region::Box { half_widths, .. } => Some(half_widths.iter().map(|a| 2.0 * a).product()),
            Region::Ball { radius, .. } => Some(ball_volume(dim, *radius)),
            Region::LinearImage { matrix, inner } => {
                inner.measure(dim).map(|m| m * matrix.determinant().abs())
            }
        }
    }
}

/// Volume of the Euclidean ball of radius `r` in `R^{dim}`, `dim ∈ {1,2,3,4}`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    let rd = libm::pow(r, dim as f64);
    match dim {
        1 => 2.0 * r,
        2 => PI * rd,
        3 => 4.0 / 3.0 * PI * rd,
        4 => 0.5 * PI * PI * rd,
        _ => libm::pow(PI, dim as f64 / 2.0) * rd / libm::tgamma(dim as f64 / 2.0 + 1.0),
    }
}

/// A subset of grid points with its discrete measure `h^{2n} · #mask`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    grid: SpatialGrid,
    mask: Vec<bool>,
    /// Measure of the continuum region the mask was built from, if known.
    exact_measure: Option<f64>,
}

impl IndicatorSet {
    pub fn from_mask(grid: SpatialGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: mask.len() });
        }
        Ok(Self { grid, mask, exact_measure: None })
    }

    /// Grid points inside `region`.
    pub fn from_region(grid: SpatialGrid, region: &Region) -> Self {
        let dim = grid.dim();
        let mut z = [0.0; 4];
        let mask = (0..grid.len())
            .map(|k| {
                grid.point(k, &mut z[..dim]);
                region.contains(&z[..dim])
            })
            .collect();
        let exact_measure = region.measure(dim).map(|m| m.min(grid.box_volume()));
        Self { grid, mask, exact_measure }
    }

    pub fn empty(grid: SpatialGrid) -> Self {
        Self { grid, mask: alloc::vec![false; grid.len()], exact_measure: Some(0.0) }
    }

    pub fn whole(grid: SpatialGrid) -> Self {
        Self { grid, mask: alloc::vec![true; grid.len()], exact_measure: Some(grid.box_volume()) }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// `h^{2n} · #points`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn exact_measure(&self) -> Option<f64> {
        self.exact_measure
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid,
            mask: self.mask.iter().map(|m| !m).collect(),
            exact_measure: self.exact_measure.map(|m| self.grid.box_volume() - m),
        }
    }

    pub fn union(&self, other: &IndicatorSet) -> Result<Self> {
        self.check_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self { grid: self.grid, mask, exact_measure: None })
    }

    pub fn intersection(&self, other: &IndicatorSet) -> Result<Self> {
        self.check_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self { grid: self.grid, mask, exact_measure: None })
    }

    pub fn is_subset_of(&self, other: &IndicatorSet) -> Result<bool> {
        self.check_grid(other)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b))
    }

    pub fn is_disjoint(&self, other: &IndicatorSet) -> Result<bool> {
        self.check_grid(other)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(a, b)| !(*a && *b)))
    }

    /// Measure of mask cells with at least one axis neighbour outside the
    /// mask: the `±` one-cell-layer uncertainty of [`measure`](Self::measure).
    pub fn boundary_layer_measure(&self) -> f64 {
        let dim = self.grid.dim();
        let n = self.grid.points();
        let mut idx = [0usize; 4];
        let mut count = 0usize;
        for k in 0..self.grid.len() {
            if !self.mask[k] {
                continue;
            }
            self.grid.unravel(k, &mut idx[..dim]);
            let mut edge = false;
            for axis in 0..dim {
                let stride = self.grid.stride(axis);
                let i = idx[axis];
                let lo = if i == 0 { true } else { !self.mask[k - stride] };
                let hi = if i + 1 == n { true } else { !self.mask[k + stride] };
                if lo || hi {
                    edge = true;
                    break;
                }
            }
            if edge {
                count += 1;
            }
        }
        count as f64 * self.grid.cell_volume()
    }

    fn check_grid(&self, other: &IndicatorSet) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sets live on different grids"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_measure() {
        let g = SpatialGrid::new(1, 3.0, 24).unwrap();
        let s = IndicatorSet::from_region(g, &Region::cube(2, 1.0));
        let c = s.complement();
        assert!((s.measure() + c.measure() - 36.0).abs() < 1e-12);
        assert!(s.is_disjoint(&c).unwrap());
        // Closed cube [-1,1]^2 on spacing 0.25 holds 9×9 nodes.
        assert_eq!(s.count(), 81);
        assert!((s.exact_measure().unwrap() - 4.0).abs() < 1e-15);
        assert!((s.measure() - 4.0).abs() <= s.boundary_layer_measure());
    }

    #[test]
    fn ball_measure_within_layer() {
        let g = SpatialGrid::new(1, 4.0, 64).unwrap();
        let s = IndicatorSet::from_region(g, &Region::centered_ball(2, 2.0));
        let exact = 4.0 * PI;
        assert!((s.measure() - exact).abs() <= s.boundary_layer_measure());
    }

    #[test]
    fn linear_image_membership() {
        let a = RealMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let r = Region::LinearImage { matrix: a, inner: Box::new(Region::cube(2, 1.0)) };
        assert!(r.contains(&[1.9, 0.4]));
        assert!(!r.contains(&[1.9, 0.6]));
        assert_eq!(r.measure(2), Some(4.0));
    }
}
