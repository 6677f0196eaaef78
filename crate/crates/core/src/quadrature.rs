//! Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of an `m`-point Gauss–Legendre rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_m` by Newton iteration from the Chebyshev-like initial
    /// guess; symmetric pairs are computed once.
    pub fn new(m: usize, a: f64, b: f64) -> Self {
        assert!(m >= 1);
        let mut nodes = alloc::vec![0.0; m];
        let mut weights = alloc::vec![0.0; m];
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for i in 0..m.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (m as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = mid - half * x;
            nodes[m - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[m - 1 - i] = half * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre on `panels` equal sub-intervals of `[a, b]`.
pub fn composite(order: usize, panels: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let base = GaussLegendre::new(order, -1.0, 1.0);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            total += 0.5 * width * w * f(mid + 0.5 * width * x);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials() {
        let g = GaussLegendre::new(5, 0.0, 2.0);
        // degree 9 is integrated exactly by 5 nodes.
        let v = g.integrate(|x| libm::pow(x, 9.0));
        assert!((v - 102.4).abs() < 1e-11);
        let g = GaussLegendre::new(256, -1.0, 1.0);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        assert!((g.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrand() {
        let g = GaussLegendre::new(64, 0.0, PI);
        assert!((g.integrate(libm::sin) - 2.0).abs() < 1e-14);
        let c = composite(16, 8, -6.0, 6.0, |x| libm::exp(-x * x));
        assert!((c - libm::sqrt(PI) * libm::erf(6.0)).abs() < 1e-13);
    }
}
