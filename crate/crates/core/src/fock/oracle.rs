//! Three routes to Bob's post-selected output state.
//!
//! * [`sigma_ps_closed_form`]: the displaced thermal state obtained by
//!   completing the square in the heterodyne-outcome integral.
//! * [`sigma_ps_numeric`]: that integral evaluated by quadrature, for a
//!   coherent input, with the conditional state taken from the covariance
//!   matrix route of [`crate::gaussian`].
//! * [`teleport_arbitrary_state`]: the protocol itself in Fock space. The
//!   EPR state is built explicitly, one half crosses the beamsplitter model
//!   of the channel, Alice's dual-homodyne outcome is applied as a
//!   measurement operator on (input, EPR half) and weighted by the
//!   post-selection filter, and Bob displaces his mode.
//!
//! [`apply_effective_system`] is the effective NLA + Gaussian channel all
//! three should agree with.
//!
//! Outcome variable: `γ = (x + ip)/(2√2)`, so `dx dp = 8 d²γ`. The dual
//! homodyne measurement on modes (a, A) acts as
//! `E(γ)|n⟩_a|k⟩_A = ⟨n|D(−2γ)|k⟩ / √(2π)`; on a vacuum input this reduces to
//! the heterodyne projection `⟨2γ|/√(2π)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    displaced_thermal, displacement_matrix, thermal_cutoff, thermal_loss_channel, thermal_populations,
    BeamSplitter, FockOperator, QuadratureGrid, TRUNCATION_WARN,
};
use crate::effective::{effective_params, EffectiveChannelParams, TeleporterConfig};
use crate::error::{Error, Result};
use crate::gaussian::{conditional_after_heterodyne, epr_after_channel, ChannelParams};

/// Relative integrand mass the grid cutoff may discard.
pub const CUTOFF_MASS_TOL: f64 = 1e-6;

/// Transmissions this close to 1 are treated as unit transmission.
pub const UNIT_TRANSMISSION_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub operator: FockOperator,
    /// Relative change of the integrated trace when the grid radius is doubled.
    pub cutoff_mass: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_cutoff(cutoff_mass: f64) -> Result<()> {
    if cutoff_mass > CUTOFF_MASS_TOL || !cutoff_mass.is_finite() {
        return Err(Error::Quadrature(format!(
            "grid cutoff discards {cutoff_mass:e} of the integrand mass"
        )));
    }
    Ok(())
}

/// Envelope `exp(−a|γ|² − b|2hγ + ᾱ|²)` written as `C·exp(−|γ−γ₀|²/s²)`;
/// returns `(γ₀, s)`.
fn envelope_map(a: f64, b: f64, h: f64, alpha: Complex64) -> (Complex64, f64) {
    let curv = a + 4.0 * h * h * b;
    let centre = -alpha.conj() * (2.0 * h * b / curv);
    (centre, 1.0 / curv.sqrt())
}

/// Closed-form unnormalized output for a coherent input `|α⟩`:
/// `prefactor · e^{(g_eff²−1)|α|²} · D(Gα) ρ_th(λ_out) D(Gα)†`.
pub fn sigma_ps_closed_form(
    alpha: Complex64,
    ch: &ChannelParams,
    cfg: &TeleporterConfig,
    dim: usize,
) -> Result<FockOperator> {
    let eff = effective_params(ch, cfg)?;
    if eff.lambda_out >= 1.0 {
        return Err(Error::Unphysical(format!("λ_out = {} ≥ 1", eff.lambda_out)));
    }
    let weight = eff.prefactor * (-(1.0 - eff.g_eff * eff.g_eff) * alpha.norm_sqr()).exp();
    Ok(displaced_thermal(eff.lambda_out, alpha * eff.big_g, dim)?.scaled(weight))
}

/// Quadrature evaluation of
/// `g² · 8∫d²γ N(α,γ) D(ζ) ρ_th(λ_B) D(ζ)†` with `β = 2gγ + ᾱ`,
/// `ζ = χ*β̄ − 2gγ̄φ` and
/// `N = e^{4|γ|²(g²−1)} (1−χ̄²) e^{(χ̄²−1)|β|²} / 2π`.
pub fn sigma_ps_numeric(
    alpha: Complex64,
    ch: &ChannelParams,
    cfg: &TeleporterConfig,
    grid: &QuadratureGrid,
    dim: usize,
) -> Result<OracleOutput> {
    grid.self_test()?;
    let cond = conditional_after_heterodyne(&epr_after_channel(cfg.chi(), ch)?)?;
    let g = cfg.gain();
    let phi = cfg.phi();
    let cb2 = cond.chi_bar * cond.chi_bar;

    let a = 4.0 * (1.0 - g * g);
    let b = 1.0 - cb2;
    if a + 4.0 * g * g * b <= 0.0 {
        return Err(Error::Unsupported("heterodyne integrand does not decay".into()));
    }
    let (centre, scale) = envelope_map(a, b, g, alpha);
    let norm = g * g * 8.0 * (1.0 - cb2) / (2.0 * PI) * scale * scale;
    let weight = |gamma: Complex64| {
        let beta = gamma * (2.0 * g) + alpha.conj();
        norm * (-a * gamma.norm_sqr() - b * beta.norm_sqr()).exp()
    };

    let inner = thermal_cutoff(cond.lambda_b, 1e-17, dim, 4000);
    let pops = thermal_populations(cond.lambda_b, inner);
    let integrated = grid.integrate_matrix(dim, dim, |u| {
        let gamma = centre + u * scale;
        let w = weight(gamma);
        if w == 0.0 {
            return None;
        }
        let zeta = gamma.conj() * (2.0 * g * (cond.chi_star - phi)) + alpha * cond.chi_star;
        let d = displacement_matrix(zeta, dim, inner);
        let mut dp = d.clone();
        for (k, p) in pops.iter().enumerate() {
            dp.column_mut(k).scale_mut(*p * w);
        }
        Some(dp * d.adjoint())
    });

    let envelope = |grid: &QuadratureGrid| grid.integrate_scalar(|u| weight(centre + u * scale));
    let coarse = envelope(grid);
    let fine = envelope(&grid.doubled()?);
    let cutoff_mass = ((coarse - fine) / fine).abs();
    check_cutoff(cutoff_mass)?;
    Ok(OracleOutput {
        operator: FockOperator::from_matrix(integrated),
        cutoff_mass,
    })
}

/// `prefactor · L_{η,Δ}[g_eff^n ρ g_eff^n]`.
///
/// At unit transmission the channel is the Gaussian random displacement
/// `∫d²ζ e^{−|ζ|²/Δ_ch}/(πΔ_ch) D(ζ)·D(ζ)†` with `Δ_ch = Δ/2`, which adds
/// `Δ` to each quadrature variance. For `η < 1` it is a beamsplitter of
/// transmission `η` against a thermal environment of variance
/// `1 + ηΔ/(1−η)`.
pub fn apply_effective_system(
    rho_in: &FockOperator,
    eff: &EffectiveChannelParams,
    grid: &QuadratureGrid,
    dim: usize,
) -> Result<FockOperator> {
    if !(eff.eta > 0.0 && eff.eta <= 1.0 + UNIT_TRANSMISSION_TOL) {
        return Err(Error::Unsupported(format!(
            "effective transmission η = {} outside (0, 1]",
            eff.eta
        )));
    }
    if eff.delta < -1e-10 {
        return Err(Error::Unphysical(format!("excess noise Δ = {} < 0", eff.delta)));
    }
    let delta = eff.delta.max(0.0);
    let d_in = rho_in.dim();
    let amp: Vec<f64> = (0..d_in).map(|n| eff.g_eff.powi(n as i32)).collect();
    let amplified = DMatrix::from_fn(d_in, d_in, |r, col| rho_in.matrix()[(r, col)] * (amp[r] * amp[col]));
    let amplified = FockOperator::from_matrix(amplified);

    let out = if (eff.eta - 1.0).abs() <= UNIT_TRANSMISSION_TOL {
        if delta == 0.0 {
            let mut m = DMatrix::zeros(dim, dim);
            let k = dim.min(d_in);
            m.view_mut((0, 0), (k, k))
                .copy_from(&amplified.matrix().view((0, 0), (k, k)));
            FockOperator::from_matrix(m)
        } else {
            grid.self_test()?;
            let spread = (delta / 2.0).sqrt();
            let src = amplified.matrix();
            let m = grid.integrate_matrix(dim, dim, |u| {
                let w = (-u.norm_sqr()).exp() / PI;
                let d = displacement_matrix(u * spread, dim, d_in);
                Some(&d * src * d.adjoint() * c(w))
            });
            FockOperator::from_matrix(m)
        }
    } else {
        let eta = eff.eta;
        let nbar = eta * delta / (2.0 * (1.0 - eta));
        let env_lambda = (nbar / (1.0 + nbar)).sqrt();
        thermal_loss_channel(&amplified, eta, env_lambda, dim)
    };
    let out = out.scaled(eff.prefactor);
    out.warn_if_truncated("effective system output", eff.prefactor * amplified.trace());
    Ok(out)
}

/// Conditional correlations of the EPR pair after the channel, grouped by
/// photon-number shift: Bob's unnormalized state for an Alice-side operator
/// `A` is `Σ_s W_s[n,n'] A[n+s, n'+s]`.
struct EprAfterChannel {
    epr_dim: usize,
    alice_dim: usize,
    /// indexed by `s + epr_dim`
    shifts: Vec<DMatrix<f64>>,
}

impl EprAfterChannel {
    fn new(chi: f64, ch: &ChannelParams, epr_dim: usize) -> Result<Self> {
        let coeffs: Vec<f64> = (0..epr_dim)
            .map(|n| (1.0 - chi * chi).sqrt() * chi.powi(n as i32))
            .collect();
        let tail = chi.powi(2 * epr_dim as i32);
        if tail > TRUNCATION_WARN {
            log::warn!("EPR state truncated at D={epr_dim} drops {tail:e} of its norm");
        }
        let t = ch.transmission();
        let e = ch.excess_noise();
        if t >= 1.0 && e > 0.0 {
            return Err(Error::Unsupported(
                "a unit-transmission channel with excess noise has no beamsplitter model".into(),
            ));
        }
        let (env_lambda, k_env) = if t >= 1.0 {
            (0.0, 1)
        } else {
            let nbar = t * e / (2.0 * (1.0 - t));
            let lam = (nbar / (1.0 + nbar)).sqrt();
            (lam, thermal_cutoff(lam, 1e-16, 1, 400))
        };
        let pops = thermal_populations(env_lambda, k_env);
        let alice_dim = epr_dim + k_env;
        let bs = BeamSplitter::new(t, epr_dim, k_env);
        let mut shifts = vec![DMatrix::zeros(epr_dim, epr_dim); epr_dim + alice_dim];
        for (k, &pk) in pops.iter().enumerate() {
            for l in 0..epr_dim + k {
                let s = k as isize - l as isize;
                let v: Vec<f64> = (0..epr_dim)
                    .map(|n| {
                        let m = n as isize + s;
                        if m < 0 || m as usize >= alice_dim || (m as usize) > n + k {
                            0.0
                        } else {
                            coeffs[n] * bs.column(n, k)[m as usize]
                        }
                    })
                    .collect();
                let w = &mut shifts[(s + epr_dim as isize) as usize];
                for n in 0..epr_dim {
                    if v[n] == 0.0 {
                        continue;
                    }
                    for np in 0..epr_dim {
                        w[(n, np)] += pk * v[n] * v[np];
                    }
                }
            }
        }
        Ok(Self {
            epr_dim,
            alice_dim,
            shifts,
        })
    }

    fn shift_range(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        // (index into shifts, Alice level n + s)
        (0..self.shifts.len()).filter_map(move |idx| {
            let m = n as isize + idx as isize - self.epr_dim as isize;
            (m >= 0 && (m as usize) < self.alice_dim).then_some((idx, m as usize))
        })
    }

    fn bob_state(&self, alice_op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.epr_dim;
        let mut out = DMatrix::zeros(d, d);
        for (idx, w) in self.shifts.iter().enumerate() {
            let s = idx as isize - d as isize;
            for n in 0..d {
                let m = n as isize + s;
                if m < 0 || m as usize >= self.alice_dim {
                    continue;
                }
                for np in 0..d {
                    let mp = np as isize + s;
                    if mp < 0 || mp as usize >= self.alice_dim {
                        continue;
                    }
                    let wv = w[(n, np)];
                    if wv != 0.0 {
                        out[(n, np)] += alice_op[(m as usize, mp as usize)] * wv;
                    }
                }
            }
        }
        out
    }

    fn bob_trace(&self, alice_diag: &[f64]) -> f64 {
        (0..self.epr_dim)
            .map(|n| {
                self.shift_range(n)
                    .map(|(idx, m)| self.shifts[idx][(n, n)] * alice_diag[m])
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Teleportation with Gaussian post-selection simulated in Fock space.
///
/// For every outcome `γ`, the measurement operator acts on `ρ_in ⊗ ρ_AB`,
/// the outcome is kept with weight `Q(2γ) = e^{4|γ|²(1−g⁻²)}`, Bob applies
/// `D(−2γ̄φ)`, and the result is integrated with `8 d²γ`.
pub fn teleport_arbitrary_state(
    rho_in: &FockOperator,
    ch: &ChannelParams,
    cfg: &TeleporterConfig,
    grid: &QuadratureGrid,
    dim: usize,
) -> Result<OracleOutput> {
    grid.self_test()?;
    let herm = rho_in.hermiticity_error();
    if herm > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("input not Hermitian ({herm:e})")));
    }
    let g = cfg.gain();
    let phi = cfg.phi();
    let epr = EprAfterChannel::new(cfg.chi(), ch, dim)?;
    let d_in = rho_in.dim();

    // grid placement from the vacuum-input envelope, enlarged for
    // non-classical photon-number spread
    let cond = conditional_after_heterodyne(&epr_after_channel(cfg.chi(), ch)?)?;
    let a = 4.0 * (1.0 / (g * g) - 1.0);
    let b = 1.0 - cond.chi_bar * cond.chi_bar;
    let mean_amp = rho_in.mean_amplitude();
    let excess = (rho_in.mean_photon_number() / rho_in.trace().max(1e-300) - mean_amp.norm_sqr()).max(0.0);
    let (centre, base_scale) = envelope_map(a, b, 1.0, mean_amp);
    let scale = base_scale * (1.0 + excess).sqrt();
    let jac = 8.0 * scale * scale;
    let filter = |gamma: Complex64| (4.0 * gamma.norm_sqr() * (1.0 - 1.0 / (g * g))).exp();
    let rho = rho_in.matrix();

    let alice_op = |gamma: Complex64| {
        let m = displacement_matrix(-gamma * 2.0, d_in, epr.alice_dim) * c(1.0 / (2.0 * PI).sqrt());
        (m.transpose() * rho) * m.conjugate()
    };

    let integrated = grid.integrate_matrix(dim, dim, |u| {
        let gamma = centre + u * scale;
        let q = filter(gamma);
        if q == 0.0 {
            return None;
        }
        let bob = epr.bob_state(&alice_op(gamma));
        let corr = displacement_matrix(-gamma.conj() * (2.0 * phi), dim, epr.epr_dim);
        Some(&corr * bob * corr.adjoint() * c(jac * q))
    });

    let trace_integral = |grid: &QuadratureGrid| {
        grid.integrate_scalar(|u| {
            let gamma = centre + u * scale;
            let q = filter(gamma);
            if q == 0.0 {
                return 0.0;
            }
            let m = displacement_matrix(-gamma * 2.0, d_in, epr.alice_dim) * c(1.0 / (2.0 * PI).sqrt());
            let rm = rho * m.conjugate();
            let diag: Vec<f64> = (0..epr.alice_dim)
                .map(|k| m.column(k).iter().zip(rm.column(k).iter()).map(|(x, y)| x * y).sum::<Complex64>().re)
                .collect();
            jac * q * epr.bob_trace(&diag)
        })
    };
    let coarse = trace_integral(grid);
    let fine = trace_integral(&grid.doubled()?);
    let cutoff_mass = if fine == 0.0 { 0.0 } else { ((coarse - fine) / fine).abs() };
    check_cutoff(cutoff_mass)?;

    Ok(OracleOutput {
        operator: FockOperator::from_matrix(integrated),
        cutoff_mass,
    })
}
