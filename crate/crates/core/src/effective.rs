//! Closed-form effective system of teleportation with Gaussian post-selection.
//!
//! The post-selected output for any input `ρ_in` is
//!
//! ```text
//! ρ_out = prefactor · L_{η,Δ}[ g_eff^n ρ_in g_eff^n ],   prefactor = g²(1−χ̄²)/(1−g²χ̄²)
//! ```
//!
//! where `L_{η,Δ}` is a phase-insensitive Gaussian channel of transmission `η`
//! and input-referred excess noise `Δ`. Only the regime `0 < g ≤ 1` is handled.

use crate::error::{check_range, Error, Result};
use crate::gaussian::{self, check_chi, ChannelParams};

/// Tolerance on input populations accepted by [`success_probability`].
pub const POPULATION_MASS_TOL: f64 = 1e-6;

/// EPR parameter `χ`, post-selection gain `g` and Bob's classical gain `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleporterConfig {
    chi: f64,
    gain: f64,
    phi: f64,
}

impl TeleporterConfig {
    pub fn new(chi: f64, gain: f64, phi: f64) -> Result<Self> {
        check_chi(chi)?;
        check_range(
            "gain",
            gain,
            gain > 0.0 && gain <= 1.0,
            "post-selection gain must lie in (0, 1]",
        )?;
        check_range("phi", phi, true, "classical gain must be finite")?;
        Ok(Self { chi, gain, phi })
    }

    /// Plain teleportation, no post-selection.
    pub fn unconditional(chi: f64, phi: f64) -> Result<Self> {
        Self::new(chi, 1.0, phi)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveChannelParams {
    pub eta: f64,
    /// Total input-referred noise `|1−η|/η + Δ`.
    pub chi_ch: f64,
    pub delta: f64,
    pub g_eff: f64,
    /// Displacement gain: a coherent input `|α⟩` leaves centred on `Gα`.
    pub big_g: f64,
    pub prefactor: f64,
    pub lambda_b: f64,
    pub lambda_tele: f64,
    pub lambda_out: f64,
    pub chi_star: f64,
    pub chi_bar: f64,
    /// `Ξ = g_eff² − 1`.
    pub xi: f64,
    /// Set when `φ = χ*`, where the `ζ` change of variables of the integral
    /// form breaks down. The closed forms are continuous there and
    /// `λ_tele = 0` is used.
    pub degenerate_change_of_variables: bool,
}

impl EffectiveChannelParams {
    /// Output variance of a coherent input, `(1+λ_out²)/(1−λ_out²)`.
    pub fn v_out(&self) -> f64 {
        let l2 = self.lambda_out * self.lambda_out;
        (1.0 + l2) / (1.0 - l2)
    }

    pub fn is_unit_transmission(&self, tol: f64) -> bool {
        (self.eta - 1.0).abs() <= tol
    }
}

pub fn effective_params(ch: &ChannelParams, cfg: &TeleporterConfig) -> Result<EffectiveChannelParams> {
    let chi = cfg.chi();
    let g2 = cfg.gain() * cfg.gain();
    let phi = cfg.phi();

    let lambda_b = gaussian::lambda_b(ch, chi);
    let chi_star = gaussian::chi_star(ch, chi);
    let chi_bar2 = gaussian::chi_bar_sq(ch, chi).max(0.0);
    let chi_bar = chi_bar2.sqrt();

    let one_minus = 1.0 - g2 * chi_bar2;
    if one_minus <= 0.0 {
        return Err(Error::Unphysical(format!("g²χ̄² = {} ≥ 1", g2 * chi_bar2)));
    }

    let shift = phi - chi_star;
    let degenerate = shift == 0.0;
    let lambda_tele2 = if degenerate {
        0.0
    } else {
        g2 * shift * shift / (1.0 + g2 * (shift - chi_bar) * (shift + chi_bar))
    };
    if !(0.0..1.0).contains(&lambda_tele2) {
        return Err(Error::Unphysical(format!("λ_tele² = {lambda_tele2} outside [0, 1)")));
    }

    let big_g = (chi_star - g2 * (phi * (chi_bar2 - 1.0) + chi_star)) / one_minus;
    let g_eff2 = (chi_bar2 - g2 * (2.0 * chi_bar2 - 1.0)) / one_minus;
    let g_eff = g_eff2.sqrt();
    let eta = big_g * big_g / g_eff2;

    let lb2 = lambda_b * lambda_b;
    let chi_ch = (1.0 + lb2 + lambda_tele2 - 3.0 * lb2 * lambda_tele2)
        / ((1.0 - lb2) * (1.0 - lambda_tele2))
        / eta
        - 1.0;
    let delta = chi_ch - ((1.0 - eta) / eta).abs();
    let lambda_out2 = (lb2 + lambda_tele2 - 2.0 * lb2 * lambda_tele2) / (1.0 - lb2 * lambda_tele2);

    Ok(EffectiveChannelParams {
        eta,
        chi_ch,
        delta,
        g_eff,
        big_g,
        prefactor: g2 * (1.0 - chi_bar2) / one_minus,
        lambda_b,
        lambda_tele: lambda_tele2.sqrt(),
        lambda_out: lambda_out2.max(0.0).sqrt(),
        chi_star,
        chi_bar,
        xi: g_eff2 - 1.0,
        degenerate_change_of_variables: degenerate,
    })
}

/// The transmission expression written directly in `χ*`, `χ̄`, `g`, `φ`;
/// the identity `√η = G/g_eff` must reproduce it.
pub fn eta_closed_form(ch: &ChannelParams, cfg: &TeleporterConfig) -> f64 {
    let chi = cfg.chi();
    let g2 = cfg.gain() * cfg.gain();
    let phi = cfg.phi();
    let cs = gaussian::chi_star(ch, chi);
    let cb2 = gaussian::chi_bar_sq(ch, chi);
    let num = cs - g2 * (phi * (cb2 - 1.0) + cs);
    num * num / ((g2 * cb2 - 1.0) * (g2 * (2.0 * cb2 - 1.0) - cb2))
}

fn check_gopt_domain(transmission: f64, chi: f64) -> Result<()> {
    check_range(
        "transmission",
        transmission,
        transmission > 0.0 && transmission < 1.0,
        "optimal gain needs 0 < T < 1",
    )?;
    check_range("chi", chi, chi > 0.0 && chi < 1.0, "optimal gain needs 0 < χ < 1")
}

/// Post-selection gain giving `η = 1` over a pure-loss channel with `φ = 1`.
pub fn optimal_gain(transmission: f64, chi: f64) -> Result<f64> {
    check_gopt_domain(transmission, chi)?;
    let (t, st) = (transmission, transmission.sqrt());
    let c2 = chi * chi;
    let den = 1.0 - 2.0 * st * chi - 2.0 * (1.0 - t) * c2 + 2.0 * st * chi * c2
        + (1.0 - t - t * t) * c2 * c2;
    if den <= 0.0 {
        return Err(Error::NoValidGain(format!(
            "denominator {den} ≤ 0 at T={t}, χ={chi}"
        )));
    }
    let g2 = (1.0 - t) * t * c2 * c2 / den;
    if !(g2 > 0.0 && g2 <= 1.0) {
        return Err(Error::NoValidGain(format!("g_opt² = {g2} outside (0, 1] at T={t}, χ={chi}")));
    }
    Ok(g2.sqrt())
}

/// Excess noise at the optimal gain, `2(1−T)χ²/(1−χ²)`.
pub fn delta_at_gopt(transmission: f64, chi: f64) -> Result<f64> {
    check_range("transmission", transmission, (0.0..=1.0).contains(&transmission), "must lie in [0, 1]")?;
    check_chi(chi)?;
    Ok(2.0 * (1.0 - transmission) * chi * chi / (1.0 - chi * chi))
}

/// Excess noise of plain teleportation (`g = φ = 1`, pure loss),
/// `2(1−√T χ)²/(1−χ²)`.
pub fn delta_no_postselection(transmission: f64, chi: f64) -> Result<f64> {
    check_range("transmission", transmission, (0.0..=1.0).contains(&transmission), "must lie in [0, 1]")?;
    check_chi(chi)?;
    let d = 1.0 - transmission.sqrt() * chi;
    Ok(2.0 * d * d / (1.0 - chi * chi))
}

/// Effective NLA gain at the optimal post-selection gain,
/// `√T χ(1−√T χ)/(1−√T χ+(T−1)χ²)`.
pub fn geff_at_gopt(transmission: f64, chi: f64) -> Result<f64> {
    check_range("transmission", transmission, transmission > 0.0 && transmission <= 1.0, "must lie in (0, 1]")?;
    check_chi(chi)?;
    let s = transmission.sqrt() * chi;
    Ok(s * (1.0 - s) / (1.0 - s + (transmission - 1.0) * chi * chi))
}

/// Post-selection success probability for an input with Fock populations
/// `populations[n] = ⟨n|ρ_in|n⟩`: `prefactor · Σ g_eff^{2n} ρ_nn`.
pub fn success_probability(eff: &EffectiveChannelParams, populations: &[f64]) -> Result<f64> {
    if let Some((n, p)) = populations.iter().enumerate().find(|(_, p)| **p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidPopulations(format!("population {n} is {p}")));
    }
    let mass: f64 = populations.iter().sum();
    if (mass - 1.0).abs() > POPULATION_MASS_TOL {
        return Err(Error::InvalidPopulations(format!(
            "populations sum to {mass}; truncation lost {:e}",
            1.0 - mass
        )));
    }
    let w = eff.g_eff * eff.g_eff;
    let mut factor = 1.0;
    let mut acc = 0.0;
    for p in populations {
        acc += factor * p;
        factor *= w;
    }
    Ok(eff.prefactor * acc)
}

/// Numerical gain giving `η = 1` for arbitrary `(T, ε, φ)`. At `φ = 1` the
/// point `g = 1` is always a root (unit-gain teleportation), so the search
/// scans `(0, 1)` for the first sign change of `η − 1` and bisects it.
pub fn unit_transmission_gain(ch: &ChannelParams, chi: f64, phi: f64) -> Result<f64> {
    const SCAN: usize = 400;
    let f = |g: f64| -> Result<f64> {
        let cfg = TeleporterConfig::new(chi, g, phi)?;
        Ok(effective_params(ch, &cfg)?.eta - 1.0)
    };
    let g_at = |k: usize| 1e-9 + (1.0 - 1e-6 - 1e-9) * k as f64 / SCAN as f64;
    let mut lo = g_at(0);
    let mut flo = f(lo)?;
    let mut bracket = None;
    for k in 1..=SCAN {
        let g = g_at(k);
        let fg = f(g)?;
        if flo == 0.0 {
            return Ok(lo);
        }
        if fg.signum() != flo.signum() {
            bracket = Some((lo, g));
            break;
        }
        lo = g;
        flo = fg;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::NoValidGain(format!("η − 1 keeps sign on (0, 1) (χ = {chi}, φ = {phi})"))
    })?;
    let flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn at_gopt(t: f64, chi: f64) -> EffectiveChannelParams {
        let g = optimal_gain(t, chi).unwrap();
        let cfg = TeleporterConfig::new(chi, g, 1.0).unwrap();
        effective_params(&ChannelParams::lossy(t).unwrap(), &cfg).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TeleporterConfig::new(0.3, 0.0, 1.0).is_err());
        assert!(TeleporterConfig::new(0.3, 1.2, 1.0).is_err());
        assert!(TeleporterConfig::new(1.0, 0.5, 1.0).is_err());
        assert!(TeleporterConfig::new(0.3, 0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn perfect_channel_unit_gain() {
        for &chi in &[0.1, 0.5, 0.9, 0.999_999] {
            let cfg = TeleporterConfig::unconditional(chi, 1.0).unwrap();
            let eff = effective_params(&ChannelParams::identity(), &cfg).unwrap();
            assert_abs_diff_eq!(eff.eta, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(eff.big_g, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(eff.prefactor, 1.0, epsilon = 1e-12);
            let expected = delta_no_postselection(1.0, chi).unwrap();
            assert_abs_diff_eq!(eff.delta, expected, epsilon = 1e-9);
        }
        let near = TeleporterConfig::unconditional(0.999_999, 1.0).unwrap();
        let eff = effective_params(&ChannelParams::identity(), &near).unwrap();
        assert!(eff.delta < 1e-5);
    }

    #[test]
    fn eta_is_phi_squared_without_postselection() {
        let cfg = TeleporterConfig::unconditional(0.5, 0.8).unwrap();
        let eff = effective_params(&ChannelParams::identity(), &cfg).unwrap();
        assert_abs_diff_eq!(eff.eta, 0.64, epsilon = 1e-12);
    }

    #[test]
    fn working_point() {
        let eff = at_gopt(0.5, 0.31);
        assert_abs_diff_eq!(eff.eta, 1.0, epsilon = 1e-10);
        let expected = 2.0 * 0.5 * 0.31 * 0.31 / (1.0 - 0.31 * 0.31);
        assert_abs_diff_eq!(eff.delta, expected, epsilon = 1e-10);
        assert_abs_diff_eq!(eff.delta, 0.10632, epsilon = 1e-5);
        assert_abs_diff_eq!(eff.g_eff, geff_at_gopt(0.5, 0.31).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn gopt_domain() {
        assert!(optimal_gain(0.0, 0.3).is_err());
        assert!(optimal_gain(1.0, 0.3).is_err());
        assert!(optimal_gain(0.5, 0.0).is_err());
        // g_opt² exceeds 1 close to χ → 1
        assert!(matches!(optimal_gain(0.5, 0.95), Err(Error::NoValidGain(_))));
        let small = optimal_gain(0.5, 1e-3).unwrap();
        assert!(small < 1e-5);
    }

    #[test]
    fn simple_limits() {
        assert_eq!(delta_at_gopt(0.5, 0.0).unwrap(), 0.0);
        assert_eq!(delta_at_gopt(1.0, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(delta_no_postselection(0.5, 0.0).unwrap(), 2.0, epsilon = 1e-15);
        let d = 1.0 - 0.5 / 2f64.sqrt();
        assert_abs_diff_eq!(delta_no_postselection(0.5, 0.5).unwrap(), 2.0 * d * d / 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(geff_at_gopt(1.0, 0.37).unwrap(), 0.37, epsilon = 1e-15);
        assert!(geff_at_gopt(0.5, 1e-6).unwrap() < 1e-5);
    }

    #[test]
    fn identities_on_grid() {
        for &t in &[0.2, 0.5, 0.9, 1.0] {
            for &e in &[0.0, 0.05, 0.2] {
                for &chi in &[0.1, 0.3, 0.6] {
                    for &g in &[0.3, 0.7, 1.0] {
                        for &phi in &[0.6, 1.0, 1.3] {
                            let ch = ChannelParams::new(t, e).unwrap();
                            let cfg = TeleporterConfig::new(chi, g, phi).unwrap();
                            let eff = effective_params(&ch, &cfg).unwrap();
                            assert_abs_diff_eq!(eff.eta.sqrt() * eff.g_eff, eff.big_g, epsilon = 1e-12);
                            assert_abs_diff_eq!(eff.eta, eta_closed_form(&ch, &cfg), epsilon = 1e-10);
                            assert_abs_diff_eq!(eff.eta * (1.0 + eff.chi_ch), eff.v_out(), epsilon = 1e-10);
                            assert!(eff.delta >= -1e-10, "Δ = {}", eff.delta);
                            let cb2 = eff.chi_bar * eff.chi_bar;
                            assert_abs_diff_eq!(
                                eff.xi,
                                (g * g - 1.0) * (1.0 - cb2) / (1.0 - g * g * cb2),
                                epsilon = 1e-12
                            );
                            if g == 1.0 {
                                assert_abs_diff_eq!(eff.big_g, phi, epsilon = 1e-12);
                                assert_abs_diff_eq!(eff.prefactor, 1.0, epsilon = 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_point_is_finite() {
        let ch = ChannelParams::lossy(0.5).unwrap();
        let chi = 0.3;
        let phi = gaussian::chi_star(&ch, chi);
        let cfg = TeleporterConfig::new(chi, 0.5, phi).unwrap();
        let eff = effective_params(&ch, &cfg).unwrap();
        assert!(eff.degenerate_change_of_variables);
        assert_eq!(eff.lambda_tele, 0.0);
        let nearby = TeleporterConfig::new(chi, 0.5, phi + 1e-9).unwrap();
        let eff2 = effective_params(&ch, &nearby).unwrap();
        assert!(!eff2.degenerate_change_of_variables);
        assert_abs_diff_eq!(eff.delta, eff2.delta, epsilon = 1e-7);
    }

    #[test]
    fn success_probability_cases() {
        let eff = at_gopt(0.5, 0.31);
        assert_abs_diff_eq!(success_probability(&eff, &[1.0]).unwrap(), eff.prefactor, epsilon = 1e-18);
        assert_abs_diff_eq!(
            success_probability(&eff, &[0.0, 1.0]).unwrap(),
            eff.prefactor * eff.g_eff * eff.g_eff,
            epsilon = 1e-18
        );
        let single = success_probability(&eff, &[0.0, 1.0]).unwrap();
        let total = single * single;
        assert!((total - 5.5e-8).abs() < 0.1 * 5.5e-8, "total = {total:e}");

        assert!(success_probability(&eff, &[0.5, 0.4]).is_err());
        assert!(success_probability(&eff, &[1.1, -0.1]).is_err());
    }

    #[test]
    fn unit_transmission_root() {
        let ch = ChannelParams::lossy(0.5).unwrap();
        let g = unit_transmission_gain(&ch, 0.31, 1.0).unwrap();
        assert_abs_diff_eq!(g, optimal_gain(0.5, 0.31).unwrap(), epsilon = 1e-12);

        let noisy = ChannelParams::new(0.5, 0.005).unwrap();
        let g = unit_transmission_gain(&noisy, 0.31, 1.0).unwrap();
        assert!(g < 0.5);
        let eff = effective_params(&noisy, &TeleporterConfig::new(0.31, g, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(eff.eta, 1.0, epsilon = 1e-9);

        // enough excess noise pushes η below 1 for every g < 1
        let noisier = ChannelParams::new(0.5, 0.05).unwrap();
        assert!(matches!(unit_transmission_gain(&noisier, 0.31, 1.0), Err(Error::NoValidGain(_))));
    }
}
