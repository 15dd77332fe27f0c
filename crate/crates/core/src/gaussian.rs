//! Gaussian-state primitives in shot-noise units.
//!
//! Conventions shared by the whole crate:
//!
//! * quadratures `X = a + a†`, `P = i(a† − a)`, so the vacuum has variance 1
//!   and `⟨X⟩ + i⟨P⟩ = 2⟨a⟩`;
//! * two-mode covariance matrices are ordered `(X_A, P_A, X_B, P_B)`;
//! * the symplectic form is `Ω = ω ⊕ ω` with `ω = [[0, 1], [−1, 0]]`, and a
//!   covariance matrix `V` is physical iff `V + iΩ ≥ 0`.
//!
//! Mode A is the EPR half that travels through the lossy channel to Alice,
//! mode B is the half Bob keeps.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

/// Eigenvalue floor used by [`TwoModeGaussianState::is_physical`].
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// A phase-insensitive channel with transmission `T` and input-referred
/// excess noise `ε`: an input of variance `V` leaves with `T(V + (1−T)/T + ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    transmission: f64,
    excess_noise: f64,
}

impl ChannelParams {
    pub fn new(transmission: f64, excess_noise: f64) -> Result<Self> {
        check_range(
            "transmission",
            transmission,
            (0.0..=1.0).contains(&transmission),
            "must lie in [0, 1]",
        )?;
        check_range(
            "excess_noise",
            excess_noise,
            excess_noise >= 0.0,
            "must be non-negative",
        )?;
        Ok(Self {
            transmission,
            excess_noise,
        })
    }

    /// Pure-loss channel.
    pub fn lossy(transmission: f64) -> Result<Self> {
        Self::new(transmission, 0.0)
    }

    pub fn identity() -> Self {
        Self {
            transmission: 1.0,
            excess_noise: 0.0,
        }
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    /// Output variance for an input of variance `v_in`.
    pub fn output_variance(&self, v_in: f64) -> f64 {
        let t = self.transmission;
        t * v_in + 1.0 - t + t * self.excess_noise
    }
}

/// Variance `(1+χ²)/(1−χ²)` of each half of a two-mode squeezed vacuum.
pub fn epr_variance(chi: f64) -> f64 {
    let c2 = chi * chi;
    (1.0 + c2) / (1.0 - c2)
}

/// Thermal parameter λ of a thermal state of variance `v`, i.e. the inverse
/// of `v = (1+λ²)/(1−λ²)`.
pub fn thermal_parameter(variance: f64) -> f64 {
    ((variance - 1.0) / (variance + 1.0)).max(0.0).sqrt()
}

pub(crate) fn check_chi(chi: f64) -> Result<()> {
    check_range("chi", chi, (0.0..1.0).contains(&chi), "EPR parameter must lie in [0, 1)")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeGaussianState {
    pub cov: Matrix4<f64>,
    pub disp: Vector4<f64>,
}

fn symplectic_form() -> Matrix4<f64> {
    let mut omega = Matrix4::zeros();
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    omega[(2, 3)] = 1.0;
    omega[(3, 2)] = -1.0;
    omega
}

impl TwoModeGaussianState {
    pub fn block_a(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_c(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Smallest eigenvalue of `V + iΩ` after symmetrizing `V`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let sym = (self.cov + self.cov.transpose()) * 0.5;
        let omega = symplectic_form();
        let herm = Matrix4::from_fn(|r, c| Complex64::new(sym[(r, c)], omega[(r, c)]));
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_min_eigenvalue() >= -PHYSICALITY_TOL
    }
}

/// Covariance matrix of the EPR state `|χ⟩` after its A half crossed `ch`.
pub fn epr_after_channel(chi: f64, ch: &ChannelParams) -> Result<TwoModeGaussianState> {
    check_chi(chi)?;
    let t = ch.transmission();
    let v = epr_variance(chi);
    let va = ch.output_variance(v);
    let c = (t * (v * v - 1.0)).sqrt();
    let mut cov = Matrix4::zeros();
    cov[(0, 0)] = va;
    cov[(1, 1)] = va;
    cov[(2, 2)] = v;
    cov[(3, 3)] = v;
    cov[(0, 2)] = c;
    cov[(2, 0)] = c;
    cov[(1, 3)] = -c;
    cov[(3, 1)] = -c;
    Ok(TwoModeGaussianState {
        cov,
        disp: Vector4::zeros(),
    })
}

/// Bob's mode conditioned on a heterodyne measurement of mode A.
///
/// For an outcome `β`, Bob holds `D(χ*·β̄) ρ_th(λ_B) D(χ*·β̄)†`. The
/// displacement is conjugated and follows the pattern `(β_x, −β_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalState {
    pub v_b: f64,
    pub lambda_b: f64,
    pub chi_star: f64,
    pub chi_bar: f64,
    pub conjugated: bool,
}

/// Conditional state from the covariance matrix: `γ_B = Γ_B − C(Γ_A + I)⁻¹C`,
/// displacement gain from `√2·C(Γ_A + I)⁻¹·√2(β_x, β_p)`, and `χ̄` from
/// Alice's reduced thermal state `Γ_A`.
pub fn conditional_after_heterodyne(state: &TwoModeGaussianState) -> Result<ConditionalState> {
    let ga = state.block_a();
    let gb = state.block_b();
    let c = state.block_c();
    let inv = (ga + Matrix2::identity())
        .try_inverse()
        .ok_or_else(|| Error::Unphysical("Γ_A + I is singular".into()))?;
    let gamma_b = gb - c * inv * c.transpose();
    let v_b = 0.5 * (gamma_b[(0, 0)] + gamma_b[(1, 1)]);
    // d_out = 2·C(Γ_A+I)⁻¹(β_x, β_p) = 2χ*(β_x, −β_p)
    let gain = c.transpose() * inv;
    let chi_star = gain[(0, 0)];
    let conjugated = gain[(1, 1)] < 0.0 || chi_star == 0.0;
    let v_a = 0.5 * (ga[(0, 0)] + ga[(1, 1)]);
    Ok(ConditionalState {
        v_b,
        lambda_b: thermal_parameter(v_b),
        chi_star,
        chi_bar: thermal_parameter(v_a),
        conjugated,
    })
}

/// `λ_B = χ √((T(ε−2)+2)/(Tε+2))`.
pub fn lambda_b(ch: &ChannelParams, chi: f64) -> f64 {
    let (t, e) = (ch.transmission(), ch.excess_noise());
    chi * ((t * (e - 2.0) + 2.0) / (t * e + 2.0)).sqrt()
}

/// `V_B = (T + V(2+(ε−1)T)) / (2 + T(V−1+ε))` with `V = V_EPR`.
pub fn conditional_variance(ch: &ChannelParams, chi: f64) -> f64 {
    let (t, e) = (ch.transmission(), ch.excess_noise());
    let v = epr_variance(chi);
    (t + v * (2.0 + (e - 1.0) * t)) / (2.0 + t * (v - 1.0 + e))
}

/// `χ* = 2√T χ / (2 + Tε − χ²(2+(ε−2)T))`.
pub fn chi_star(ch: &ChannelParams, chi: f64) -> f64 {
    let (t, e) = (ch.transmission(), ch.excess_noise());
    2.0 * t.sqrt() * chi / (2.0 + t * e - chi * chi * (2.0 + (e - 2.0) * t))
}

/// `χ̄²`, the squared thermal parameter of Alice's reduced state.
pub fn chi_bar_sq(ch: &ChannelParams, chi: f64) -> f64 {
    let (t, e) = (ch.transmission(), ch.excess_noise());
    let c2 = chi * chi;
    t * (c2 * (e - 2.0) - e) / (c2 * (t * (e - 2.0) + 2.0) - t * e - 2.0)
}

/// Closed-form conditional state, the counterpart of
/// [`conditional_after_heterodyne`].
pub fn conditional_closed_form(ch: &ChannelParams, chi: f64) -> Result<ConditionalState> {
    check_chi(chi)?;
    Ok(ConditionalState {
        v_b: conditional_variance(ch, chi),
        lambda_b: lambda_b(ch, chi),
        chi_star: chi_star(ch, chi),
        chi_bar: chi_bar_sq(ch, chi).max(0.0).sqrt(),
        conjugated: true,
    })
}

/// Norm of Alice's reduced state projected on `⟨β|/√(2π)`:
/// `(1−χ̄²) e^{(χ̄²−1)|β|²} / 2π`.
pub fn alice_reduced_norm(chi_bar: f64, beta: Complex64) -> f64 {
    let c2 = chi_bar * chi_bar;
    (1.0 - c2) * ((c2 - 1.0) * beta.norm_sqr()).exp() / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_inputs() {
        assert!(ChannelParams::new(1.2, 0.0).is_err());
        assert!(ChannelParams::new(0.5, -0.1).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.0).is_err());
        let ch = ChannelParams::identity();
        assert!(epr_after_channel(1.0, &ch).is_err());
        assert!(epr_after_channel(-0.1, &ch).is_err());
    }

    #[test]
    fn vacuum_epr() {
        let ch = ChannelParams::new(0.3, 0.2).unwrap();
        let s = epr_after_channel(0.0, &ch).unwrap();
        assert_abs_diff_eq!(s.block_b(), Matrix2::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.block_c(), Matrix2::zeros(), epsilon = 1e-15);
        let va = 0.3 * 1.2 + 0.7;
        assert_abs_diff_eq!(s.block_a(), Matrix2::identity() * va, epsilon = 1e-15);

        let cond = conditional_after_heterodyne(&s).unwrap();
        assert_abs_diff_eq!(cond.lambda_b, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cond.chi_star, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lossy_epr_blocks() {
        let ch = ChannelParams::lossy(0.5).unwrap();
        let s = epr_after_channel(0.31, &ch).unwrap();
        let v = (1.0 + 0.0961) / (1.0 - 0.0961);
        assert_abs_diff_eq!(s.cov[(2, 2)], v, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov[(0, 0)], 0.5 * (v + 1.0), epsilon = 1e-14);
        assert!(s.is_physical());
    }

    #[test]
    fn identity_channel() {
        let ch = ChannelParams::identity();
        let chi: f64 = 0.6;
        let s = epr_after_channel(chi, &ch).unwrap();
        let v = epr_variance(chi);
        assert_abs_diff_eq!(s.cov[(0, 0)], v, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov[(0, 2)], (v * v - 1.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov[(1, 3)], -(v * v - 1.0).sqrt(), epsilon = 1e-14);

        let cond = conditional_after_heterodyne(&s).unwrap();
        assert_abs_diff_eq!(cond.v_b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cond.lambda_b, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(cond.chi_star, chi, epsilon = 1e-12);
        assert_abs_diff_eq!(cond.chi_bar, chi, epsilon = 1e-12);
        assert!(cond.conjugated);

        let closed = conditional_closed_form(&ch, chi).unwrap();
        assert_eq!(closed.lambda_b, 0.0);
        assert_abs_diff_eq!(closed.v_b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(closed.chi_star, chi, epsilon = 1e-15);
        assert_abs_diff_eq!(closed.chi_bar, chi, epsilon = 1e-15);
    }

    #[test]
    fn lambda_b_working_point() {
        let ch = ChannelParams::lossy(0.5).unwrap();
        assert_abs_diff_eq!(lambda_b(&ch, 0.31), 0.31 * 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_b(&ch, 0.31), 0.2192, epsilon = 1e-4);
    }

    #[test]
    fn matrix_route_matches_closed_forms() {
        for &t in &[0.1, 0.35, 0.6, 0.85, 1.0] {
            for &e in &[0.0, 0.05, 0.2] {
                for &chi in &[0.0, 0.2, 0.45, 0.7, 0.9] {
                    let ch = ChannelParams::new(t, e).unwrap();
                    let s = epr_after_channel(chi, &ch).unwrap();
                    assert!(s.is_physical(), "T={t} ε={e} χ={chi}");
                    let m = conditional_after_heterodyne(&s).unwrap();
                    let c = conditional_closed_form(&ch, chi).unwrap();
                    assert_abs_diff_eq!(m.v_b, c.v_b, epsilon = 1e-11);
                    assert_abs_diff_eq!(m.chi_star, c.chi_star, epsilon = 1e-12);
                    assert_abs_diff_eq!(m.chi_bar, c.chi_bar, epsilon = 1e-7);
                    let lb2 = c.lambda_b * c.lambda_b;
                    assert_abs_diff_eq!((1.0 + lb2) / (1.0 - lb2) - c.v_b, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn lambda_b_increasing_in_chi() {
        let ch = ChannelParams::new(0.4, 0.1).unwrap();
        let values: Vec<f64> = (0..50).map(|i| lambda_b(&ch, i as f64 / 50.0)).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn reduced_norm() {
        use std::f64::consts::PI;
        assert_abs_diff_eq!(
            alice_reduced_norm(0.4, Complex64::new(0.0, 0.0)),
            0.84 / (2.0 * PI),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            alice_reduced_norm(0.0, Complex64::new(1.0, 0.0)),
            (-1.0f64).exp() / (2.0 * PI),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            alice_reduced_norm(0.3, Complex64::new(1.0, 1.0)),
            0.91 / (2.0 * PI) * (-0.91f64 * 2.0).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn unphysical_matrix_detected() {
        let state = TwoModeGaussianState {
            cov: Matrix4::identity() * 0.5,
            disp: Vector4::zeros(),
        };
        assert!(!state.is_physical());
        let vac = TwoModeGaussianState {
            cov: Matrix4::identity(),
            disp: Vector4::zeros(),
        };
        assert!(vac.is_physical());
    }
}
