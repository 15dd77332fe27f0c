//! Truncated Fock-space machinery and the brute-force oracle.
//!
//! Operators are dense `D×D` complex matrices in the number basis
//! `|0⟩ … |D−1⟩`. Displacement matrix elements are taken from their exact
//! Laguerre expression, so truncation only ever removes rows or columns and
//! never distorts the elements that are kept.

mod beamsplitter;
mod displacement;
pub mod oracle;
mod quadrature;

pub use beamsplitter::{thermal_loss_channel, BeamSplitter};
pub use displacement::{displacement_matrix, ln_factorial};
pub use quadrature::QuadratureGrid;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

/// Tail mass above which truncation warnings are logged.
pub const TRUNCATION_WARN: f64 = 1e-8;

pub type FockState = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        assert!(matrix.is_square(), "Fock operators are square");
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self::from_matrix(DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(state: &FockState) -> Self {
        Self::from_matrix(state * state.adjoint())
    }

    pub fn fock(n: usize, dim: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[n] = 1.0;
        Self::from_diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `Tr(ρ a)`.
    pub fn mean_amplitude(&self) -> Complex64 {
        (1..self.dim())
            .map(|n| self.matrix[(n, n - 1)] * (n as f64).sqrt())
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_matrix(&self.matrix * Complex64::new(factor, 0.0))
    }

    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.trace())
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        (&self.matrix - &other.matrix).norm()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Returns an error unless the operator is Hermitian to 1e-10, has trace
    /// at most `1 + 1e-9` and no eigenvalue below `−1e-9`.
    pub fn check_density(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if tr > 1.0 + 1e-9 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} exceeds 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {min:e} below floor")));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_in(&self, state: &FockState) -> f64 {
        (state.adjoint() * &self.matrix * state)[(0, 0)].re
    }

    /// Upper-left `dim×dim` block.
    pub fn cropped(&self, dim: usize) -> Self {
        Self::from_matrix(self.matrix.view((0, 0), (dim, dim)).into_owned())
    }

    /// `A ρ A†`.
    pub fn conjugated_by(&self, op: &DMatrix<Complex64>) -> Self {
        Self::from_matrix(op * &self.matrix * op.adjoint())
    }

    pub(crate) fn warn_if_truncated(&self, what: &str, expected_trace: f64) {
        let lost = expected_trace - self.trace();
        if lost > TRUNCATION_WARN * expected_trace.abs().max(1e-300) {
            log::warn!("{what}: truncation at D={} lost {lost:e} of trace", self.dim());
        }
    }
}

/// Truncated coherent state `|α⟩`.
pub fn coherent_state(alpha: Complex64, dim: usize) -> FockState {
    let mut v = DVector::zeros(dim);
    let mut amp = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v[n] = amp;
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// Noiseless amplifier `g^n`, diagonal.
pub fn nla_operator(gain: f64, dim: usize) -> Result<FockOperator> {
    check_range("gain", gain, gain > 0.0 && gain <= 1.0, "NLA gain must lie in (0, 1]")?;
    check_range("dim", dim as f64, dim >= 2, "truncation must be at least 2")?;
    let diag: Vec<f64> = (0..dim).map(|n| gain.powi(n as i32)).collect();
    Ok(FockOperator::from_diagonal(&diag))
}

/// Thermal populations `(1−λ²)λ^{2n}` for `n < dim`.
pub fn thermal_populations(lambda: f64, dim: usize) -> Vec<f64> {
    let l2 = lambda * lambda;
    let mut p = 1.0 - l2;
    (0..dim)
        .map(|_| {
            let v = p;
            p *= l2;
            v
        })
        .collect()
}

/// Number of terms needed before the thermal tail `λ^{2K}` drops under `tail`.
pub(crate) fn thermal_cutoff(lambda: f64, tail: f64, min: usize, max: usize) -> usize {
    let l2 = lambda * lambda;
    if l2 <= 0.0 {
        return min.max(1);
    }
    let k = (tail.ln() / l2.ln()).ceil();
    (k.max(min as f64) as usize).clamp(1, max)
}

/// Thermal state of variance `(1+λ²)/(1−λ²)`.
pub fn thermal(lambda: f64, dim: usize) -> Result<FockOperator> {
    check_range("lambda", lambda, (0.0..1.0).contains(&lambda), "thermal parameter must lie in [0, 1)")?;
    Ok(FockOperator::from_diagonal(&thermal_populations(lambda, dim)))
}

/// `D(α) ρ_th(λ) D(α)†` on the first `dim` levels.
///
/// The thermal sum runs over as many levels as needed for its tail to drop
/// below 1e-17, independently of `dim`.
pub fn displaced_thermal(lambda: f64, alpha: Complex64, dim: usize) -> Result<FockOperator> {
    check_range("lambda", lambda, (0.0..1.0).contains(&lambda), "thermal parameter must lie in [0, 1)")?;
    let inner = thermal_cutoff(lambda, 1e-17, dim, 4000);
    let pops = thermal_populations(lambda, inner);
    let disp = displacement_matrix(alpha, dim, inner);
    let mut scaled = disp.clone();
    for (k, p) in pops.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*p);
    }
    let out = FockOperator::from_matrix(&scaled * disp.adjoint());
    out.warn_if_truncated("displaced thermal state", 1.0);
    Ok(out)
}
