//! Distillation of the dual-rail Bell state `(|H⟩|H⟩ + |V⟩|V⟩)/√2` when
//! Bob's half crosses either a pure-loss channel or a pair of teleporters
//! with Gaussian post-selection tuned to unit transmission.
//!
//! Dual-rail encoding on Bob's modes `(b₁, b₂)`: `|H⟩ = |1,0⟩`, `|V⟩ = |0,1⟩`.
//! A conclusive event has exactly one photon across the two rails. Two-qubit
//! matrices use the basis `(HH, HV, VH, VV)` with Alice's qubit first.
//!
//! At unit effective transmission the NLA factor `g_eff^n` multiplies the
//! whole single-photon subspace by the same amount, so it only rescales the
//! success probability and is left out of the state transformation. Events
//! with two or more photons on Bob's side are discarded.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::effective::{effective_params, optimal_gain, TeleporterConfig};
use crate::error::{check_range, Error, Result};
use crate::fock::{displacement_matrix, QuadratureGrid};
use crate::gaussian::ChannelParams;

/// Accepted deviation of a two-qubit density matrix from Hermiticity and unit trace.
pub const DENSITY_TOL: f64 = 1e-8;

const S_MAX: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Loss,
    Teleporter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellScenarioParams {
    transmission: f64,
    delta: f64,
}

impl BellScenarioParams {
    pub fn new(transmission: f64, delta: f64) -> Result<Self> {
        check_range("T", transmission, (0.0..=1.0).contains(&transmission), "transmission must lie in [0, 1]")?;
        check_range("Delta", delta, delta >= 0.0, "excess noise must be non-negative")?;
        Ok(Self { transmission, delta })
    }

    /// Pure-loss channel `T` bridged by teleporters with EPR parameter `χ`
    /// at the optimal post-selection gain and `φ = 1`.
    pub fn at_optimal_gain(transmission: f64, chi: f64) -> Result<Self> {
        let ch = ChannelParams::lossy(transmission)?;
        let cfg = TeleporterConfig::new(chi, optimal_gain(transmission, chi)?, 1.0)?;
        let eff = effective_params(&ch, &cfg)?;
        Self::new(transmission, eff.delta.max(0.0))
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Variance parameter of each random-displacement integral, `Δ/2`.
    pub fn delta_ch(&self) -> f64 {
        self.delta / 2.0
    }

    pub fn loss(&self) -> BellTestResult {
        chsh_loss(self.transmission).expect("transmission validated on construction")
    }

    pub fn teleporter(&self) -> BellTestResult {
        chsh_tele(self.delta).expect("Delta validated on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellTestResult {
    pub p_check: f64,
    pub s_cond: f64,
    pub s: f64,
    pub c_cond: f64,
    pub c: f64,
    pub scenario: Scenario,
}

impl BellTestResult {
    fn from_conditional(p_check: f64, s_cond: f64, c_cond: f64, scenario: Scenario) -> Self {
        Self {
            p_check,
            s_cond,
            s: p_check * s_cond,
            c_cond,
            c: p_check * c_cond,
            scenario,
        }
    }
}

/// Loss only: a conclusive event leaves the Bell state intact.
pub fn chsh_loss(transmission: f64) -> Result<BellTestResult> {
    check_range("T", transmission, (0.0..=1.0).contains(&transmission), "transmission must lie in [0, 1]")?;
    Ok(BellTestResult::from_conditional(transmission, S_MAX, 1.0, Scenario::Loss))
}

/// `p✓ = (1+Δ²/2)/(1+Δ/2)⁴`, `S✓ = 2√2/(1+Δ²/2)`, `C✓ = 3/(Δ²+2) − 1/2`.
pub fn chsh_tele(delta: f64) -> Result<BellTestResult> {
    check_range("Delta", delta, delta >= 0.0, "excess noise must be non-negative")?;
    let d2 = delta * delta;
    let p = (1.0 + d2 / 2.0) / (1.0 + delta / 2.0).powi(4);
    let s = S_MAX / (1.0 + d2 / 2.0);
    let (c_cond, _) = concurrence_tele(delta)?;
    Ok(BellTestResult::from_conditional(p, s, c_cond, Scenario::Teleporter))
}

/// `(C✓, C)` with `C = (1−Δ/2)/(1+Δ/2)³`. `C✓` is clamped at zero beyond `Δ = 2`.
pub fn concurrence_tele(delta: f64) -> Result<(f64, f64)> {
    check_range("Delta", delta, delta >= 0.0, "excess noise must be non-negative")?;
    let c_cond = (3.0 / (delta * delta + 2.0) - 0.5).max(0.0);
    let c = ((1.0 - delta / 2.0) / (1.0 + delta / 2.0).powi(3)).max(0.0);
    Ok((c_cond, c))
}

fn sigma_y2() -> Matrix4<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sy = Matrix2::new(z, -i, i, z);
    sy.kronecker(&sy)
}

fn psd_sqrt(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = SymmetricEigen::new(*m);
    let roots = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let v = eig.eigenvectors;
    v * Matrix4::from_diagonal(&roots) * v.adjoint()
}

/// Wootters concurrence `max(0, √λ₁−√λ₂−√λ₃−√λ₄)`, with `λᵢ` the
/// eigenvalues of `ρ ρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`, in decreasing order.
/// They are obtained from the Hermitian matrix `√ρ ρ̃ √ρ`.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    let herm = (rho - rho.adjoint()).camax();
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian ({herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
    }
    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let yy = sigma_y2();
    let tilde = yy * rho.conjugate() * yy;
    let root = psd_sqrt(&rho);
    let r = root * tilde * root;
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// CHSH operator with Alice measuring `σ_z`, `σ_x` and Bob `(σ_z ± σ_x)/√2`.
pub fn chsh_operator() -> Matrix4<Complex64> {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let sz = Matrix2::new(o, z, z, -o);
    let sx = Matrix2::new(z, o, o, z);
    let plus = sz + sx;
    let minus = sz - sx;
    (plus.kronecker(&plus) + minus.kronecker(&minus)) * Complex64::new(1.0 / SQRT_2, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellOracleResult {
    pub p_check: f64,
    pub s_cond: f64,
    pub c_cond: f64,
    /// Normalized conclusive two-qubit state, basis `(HH, HV, VH, VV)`.
    pub state: Matrix4<Complex64>,
}

/// Single-rail random-displacement channel
/// `∫d²ζ e^{−|ζ|²/Δ_ch}/(πΔ_ch) D(ζ)·D(ζ)†` on each `|i⟩⟨j|`, `i, j ∈ {0, 1}`,
/// evaluated on `dim` levels. Returns `out[i][j]`.
fn displacement_noise_on_qubit_block(delta_ch: f64, grid: &QuadratureGrid, dim: usize) -> [[DMatrix<Complex64>; 2]; 2] {
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        m
    };
    if delta_ch == 0.0 {
        return [[unit(0, 0), unit(0, 1)], [unit(1, 0), unit(1, 1)]];
    }
    let spread = delta_ch.sqrt();
    let block = |i: usize, j: usize| {
        grid.integrate_matrix(dim, dim, |u| {
            let w = (-u.norm_sqr()).exp() / PI;
            let d = displacement_matrix(u * spread, dim, 2);
            let col_i = d.column(i);
            let col_j = d.column(j);
            Some(col_i * col_j.adjoint() * Complex64::new(w, 0.0))
        })
    };
    [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]]
}

/// Fock-space check of the teleporter scenario: independent random
/// displacements with `Δ_ch = Δ/2` on Bob's two rails, projection onto one
/// photon across the rails, CHSH value and concurrence of what remains.
pub fn noisy_bell_oracle(delta: f64, grid: &QuadratureGrid, dim: usize) -> Result<BellOracleResult> {
    check_range("Delta", delta, delta >= 0.0, "excess noise must be non-negative")?;
    check_range("D", dim as f64, dim >= 6, "truncation must be at least 6")?;
    grid.self_test()?;
    let chan = displacement_noise_on_qubit_block(delta / 2.0, grid, dim);

    // Bob's rail occupations for |H⟩ and |V⟩
    let rails = [(1usize, 0usize), (0usize, 1usize)];
    let mut rho = Matrix4::<Complex64>::zeros();
    // |ψ⟩ = (|H⟩_A|H⟩_B + |V⟩_A|V⟩_B)/√2: Alice's qubit a pairs with Bob's rails[a]
    for a in 0..2 {
        for ap in 0..2 {
            let (i1, i2) = rails[a];
            let (j1, j2) = rails[ap];
            for b in 0..2 {
                for bp in 0..2 {
                    let (m1, m2) = rails[b];
                    let (n1, n2) = rails[bp];
                    let v = chan[i1][j1][(m1, n1)] * chan[i2][j2][(m2, n2)] * 0.5;
                    rho[(2 * a + b, 2 * ap + bp)] += v;
                }
            }
        }
    }
    let p_check = rho.trace().re;
    if p_check <= 0.0 {
        return Err(Error::Quadrature("no conclusive events".into()));
    }
    let state = rho / Complex64::new(p_check, 0.0);
    let s_cond = (chsh_operator() * state).trace().re;
    let c_cond = wootters_concurrence(&state)?;
    Ok(BellOracleResult {
        p_check,
        s_cond,
        c_cond,
        state,
    })
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter {
            name: "bracket",
            value: lo,
            reason: "no sign change over the bracket",
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Transmission at which `S^loss` reaches the classical bound 2.
pub fn loss_threshold_transmission() -> Result<f64> {
    bisect(|t| chsh_loss(t).map(|r| r.s - 2.0).unwrap_or(f64::NAN), 0.0, 1.0)
}

/// Excess noise at which `S^tele` drops to the classical bound 2.
pub fn tele_threshold_delta() -> Result<f64> {
    bisect(|d| chsh_tele(d).map(|r| r.s - 2.0).unwrap_or(f64::NAN), 0.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bell_state() -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(r, c)] = Complex64::new(0.5, 0.0);
        }
        m
    }

    fn rotation(theta: f64, phi: f64, lam: f64) -> Matrix2<Complex64> {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        Matrix2::new(
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lam),
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lam),
        )
    }

    #[test]
    fn loss_scenario() {
        let r = chsh_loss(0.5).unwrap();
        assert_abs_diff_eq!(r.s, SQRT_2, epsilon = 1e-15);
        assert_eq!(r.c, 0.5);
        assert_abs_diff_eq!(chsh_loss(1.0).unwrap().s, S_MAX, epsilon = 1e-15);
        assert!(chsh_loss(1.2).is_err());
        assert_abs_diff_eq!(loss_threshold_transmission().unwrap(), 1.0 / SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn teleporter_scenario() {
        let r = chsh_tele(0.0).unwrap();
        assert_eq!((r.p_check, r.s, r.c), (1.0, S_MAX, 1.0));
        let thr = tele_threshold_delta().unwrap();
        assert_abs_diff_eq!(thr, 2.0 * (2f64.powf(0.125) - 1.0), epsilon = 1e-12);
        assert_eq!(concurrence_tele(2.0).unwrap().0, 0.0);
        assert!(chsh_tele(-0.1).is_err());
    }

    #[test]
    fn working_point() {
        let params = BellScenarioParams::at_optimal_gain(0.5, 0.31).unwrap();
        assert_abs_diff_eq!(params.delta(), 0.10631707, epsilon = 1e-7);
        assert_eq!(params.delta_ch(), params.delta() / 2.0);
        let tele = params.teleporter();
        assert!(params.loss().s < 2.0 && tele.s > 2.0);
        assert_abs_diff_eq!(tele.s, 2.30, epsilon = 0.01);
        assert_abs_diff_eq!(tele.c, 0.81, epsilon = 0.005);
    }

    #[test]
    fn factorizations_hold() {
        for k in 0..=200 {
            let d = 2.0 * k as f64 / 200.0;
            let r = chsh_tele(d).unwrap();
            assert_abs_diff_eq!(r.s, S_MAX / (1.0 + d / 2.0).powi(4), epsilon = 1e-14);
            let (cc, c) = concurrence_tele(d).unwrap();
            assert_abs_diff_eq!(c, r.p_check * cc, epsilon = 1e-12);
        }
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(wootters_concurrence(&bell_state()).unwrap(), 1.0, epsilon = 1e-10);
        let mut prod = Matrix4::zeros();
        prod[(0, 0)] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(wootters_concurrence(&prod).unwrap(), 0.0, epsilon = 1e-10);
        let werner = bell_state() * Complex64::new(0.5, 0.0) + Matrix4::identity() * Complex64::new(0.125, 0.0);
        assert_abs_diff_eq!(wootters_concurrence(&werner).unwrap(), 0.25, epsilon = 1e-10);
        assert!(wootters_concurrence(&(bell_state() * Complex64::new(1.1, 0.0))).is_err());
        let mut skew = bell_state();
        skew[(0, 3)] = Complex64::new(0.5, 0.1);
        assert!(wootters_concurrence(&skew).is_err());
    }

    #[test]
    fn chsh_of_bell_state_is_maximal() {
        let s = (chsh_operator() * bell_state()).trace().re;
        assert_abs_diff_eq!(s, S_MAX, epsilon = 1e-14);
    }

    #[test]
    fn oracle_without_noise() {
        let r = noisy_bell_oracle(0.0, &QuadratureGrid::default(), 8).unwrap();
        assert_abs_diff_eq!(r.p_check, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.s_cond, S_MAX, epsilon = 1e-12);
        assert_abs_diff_eq!(r.c_cond, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let grid = QuadratureGrid::default();
        let d = 0.3;
        let r = noisy_bell_oracle(d, &grid, 8).unwrap();
        let c = chsh_tele(d).unwrap();
        assert_abs_diff_eq!(r.p_check, c.p_check, epsilon = 1e-8);
        assert_abs_diff_eq!(r.s_cond, c.s_cond, epsilon = 1e-8);
        assert_abs_diff_eq!(r.c_cond, c.c_cond, epsilon = 1e-8);
        assert!(noisy_bell_oracle(d, &grid, 4).is_err());
    }

    proptest! {
        #[test]
        fn concurrence_local_unitary_invariance(
            p in 0.0f64..1.0,
            a in proptest::array::uniform3(0.0f64..6.3),
            b in proptest::array::uniform3(0.0f64..6.3),
        ) {
            let rho = bell_state() * Complex64::new(p, 0.0)
                + Matrix4::identity() * Complex64::new((1.0 - p) / 4.0, 0.0);
            let u = rotation(a[0], a[1], a[2]).kronecker(&rotation(b[0], b[1], b[2]));
            let rotated = u * rho * u.adjoint();
            let c0 = wootters_concurrence(&rho).unwrap();
            let c1 = wootters_concurrence(&rotated).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-10);
            prop_assert!((c0 - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-10);
        }

        #[test]
        fn teleporter_monotone(d in 0.0f64..1.9, step in 1e-3f64..0.1) {
            let r0 = chsh_tele(d).unwrap();
            let r1 = chsh_tele(d + step).unwrap();
            prop_assert!(r1.s < r0.s && r1.c < r0.c);
            prop_assert!(r0.p_check <= 1.0 && r0.c_cond <= 1.0 && r0.s_cond.abs() <= S_MAX);
        }
    }
}
