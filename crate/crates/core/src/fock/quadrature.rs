use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Accepted deviation of the grid self-test integrals.
pub const SELF_TEST_TOL: f64 = 1e-6;

const CHUNK: usize = 64;

/// Tensor Gauss-Legendre rule over the square `[−R, R]²` of the complex
/// plane, in standardized coordinates where the target integrand decays
/// like `e^{−|u|²}`. Callers map `γ = centre + scale·u` and multiply by
/// `scale²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes_per_axis: usize,
    radius: f64,
    nodes: Vec<(Complex64, f64)>,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::new(64, 6.5).expect("default grid is valid")
    }
}

impl QuadratureGrid {
    pub fn new(nodes_per_axis: usize, radius: f64) -> Result<Self> {
        let n = NonZeroUsize::new(nodes_per_axis)
            .ok_or_else(|| Error::Quadrature("grid needs at least one node per axis".into()))?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Quadrature(format!("cutoff radius {radius} must be positive")));
        }
        let rule = GaussLegendre::new(n);
        let axis: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x * radius, w * radius))
            .collect();
        let mut nodes = Vec::with_capacity(axis.len() * axis.len());
        for &(x, wx) in &axis {
            for &(y, wy) in &axis {
                nodes.push((Complex64::new(x, y), wx * wy));
            }
        }
        Ok(Self {
            nodes_per_axis,
            radius,
            nodes,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[(Complex64, f64)] {
        &self.nodes
    }

    /// Same node density over twice the radius.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(2 * self.nodes_per_axis, 2.0 * self.radius)
    }

    pub fn integrate_scalar<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        let partial: Vec<f64> = self
            .nodes
            .par_chunks(CHUNK)
            .map(|chunk| chunk.iter().map(|&(u, w)| w * f(u)).sum::<f64>())
            .collect();
        partial.iter().sum()
    }

    /// `Σ w_i f(u_i)` for matrix-valued `f`. Partial sums over fixed node
    /// chunks are combined in node order, so the result does not depend on
    /// the thread count.
    pub fn integrate_matrix<F>(&self, rows: usize, cols: usize, f: F) -> DMatrix<Complex64>
    where
        F: Fn(Complex64) -> Option<DMatrix<Complex64>> + Sync,
    {
        let partial: Vec<DMatrix<Complex64>> = self
            .nodes
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = DMatrix::zeros(rows, cols);
                for &(u, w) in chunk {
                    if let Some(m) = f(u) {
                        acc += m * Complex64::new(w, 0.0);
                    }
                }
                acc
            })
            .collect();
        partial
            .into_iter()
            .fold(DMatrix::zeros(rows, cols), |acc, m| acc + m)
    }

    /// Integrates normalized Gaussians `e^{−|u|²/w²}/(πw²)` for widths
    /// `w ≤ 1` and returns the largest deviation from 1.
    pub fn self_test_deviation(&self) -> f64 {
        [1.0f64, 0.7, 0.5]
            .iter()
            .map(|&w| {
                let w2 = w * w;
                let val = self.integrate_scalar(|u| (-u.norm_sqr() / w2).exp() / (std::f64::consts::PI * w2));
                (val - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn self_test(&self) -> Result<()> {
        let dev = self.self_test_deviation();
        if dev > SELF_TEST_TOL {
            return Err(Error::Quadrature(format!(
                "self-test deviation {dev:e} exceeds {SELF_TEST_TOL:e} (N={}, R={})",
                self.nodes_per_axis, self.radius
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_grid_passes() {
        let grid = QuadratureGrid::default();
        grid.self_test().unwrap();
        assert!(grid.self_test_deviation() < 1e-9);
    }

    #[test]
    fn too_small_radius_fails() {
        let grid = QuadratureGrid::new(40, 2.0).unwrap();
        assert!(grid.self_test().is_err());
        assert!(QuadratureGrid::new(0, 2.0).is_err());
        assert!(QuadratureGrid::new(10, -1.0).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let grid = QuadratureGrid::default();
        let second = grid.integrate_scalar(|u| u.norm_sqr() * (-u.norm_sqr()).exp() / std::f64::consts::PI);
        assert_abs_diff_eq!(second, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matrix_integration_is_deterministic() {
        let grid = QuadratureGrid::new(30, 6.0).unwrap();
        let f = |u: Complex64| Some(DMatrix::from_element(2, 2, u * (-u.norm_sqr()).exp()));
        let a = grid.integrate_matrix(2, 2, f);
        let b = grid.integrate_matrix(2, 2, f);
        assert_eq!(a, b);
        assert!(a.camax() < 1e-14);
    }
}
