use cv_purify::{
    apply_effective_system, chsh_tele, noisy_bell_oracle, sigma_ps_closed_form, sigma_ps_numeric,
    success_probability, teleport_arbitrary_state, ChannelParams, FockOperator, TeleporterConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{OracleArgs, Suite};
use crate::error::CliError;
use crate::point::{InputState, PointSpec};

pub const COHERENT_TOL: f64 = 1e-5;
pub const EFFECTIVE_TOL: f64 = 1e-4;
pub const TRACE_TOL: f64 = 1e-8;
pub const BELL_TOL: f64 = 1e-5;
pub const BELL_SHIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.deviation < self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn add(&mut self, label: String, deviation: f64, tolerance: f64) {
        let check = Check {
            label,
            deviation: if deviation.is_nan() { f64::INFINITY } else { deviation },
            tolerance,
        };
        println!(
            "{} {}: {:.3e} (tol {:.0e})",
            if check.pass() { "ok  " } else { "FAIL" },
            check.label,
            check.deviation,
            check.tolerance
        );
        self.checks.push(check);
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass()).collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }
}

fn coherent_suite(args: &OracleArgs, base: &PointSpec, report: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(2024));
    let grid = base.grid()?;
    for k in 0..args.samples.unwrap_or(20) {
        let r = 1.5 * rng.random::<f64>().sqrt();
        let alpha = Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU));
        let t = rng.random_range(0.3..=1.0);
        let eps = rng.random_range(0.0..=0.1);
        let chi = rng.random_range(0.1..=0.5);
        let g = rng.random_range(0.3..=0.95);
        let phi = rng.random_range(0.7..=1.2);
        let ch = ChannelParams::new(t, eps)?;
        let cfg = TeleporterConfig::new(chi, g, phi)?;
        let num = sigma_ps_numeric(alpha, &ch, &cfg, &grid, base.dim)?;
        let closed = sigma_ps_closed_form(alpha, &ch, &cfg, base.dim)?;
        let dist = num.operator.frobenius_distance(&closed) / closed.trace();
        report.add(
            format!("#{k} α={alpha:.4} T={t:.4} ε={eps:.4} χ={chi:.4} g={g:.4} φ={phi:.4}"),
            dist,
            COHERENT_TOL,
        );
    }
    Ok(())
}

fn effective_suite(args: &OracleArgs, base: &PointSpec, report: &mut Report) -> Result<(), CliError> {
    let p = &args.params;
    let custom = p.transmission.is_some() || p.eps.is_some() || p.chi.is_some() || p.g.is_some() || p.gain.is_some() || p.phi.is_some();
    let points: Vec<PointSpec> = if custom {
        vec![base.clone()]
    } else {
        use crate::point::GainPolicy::{Fixed, Optimal};
        [
            (0.5, 0.0, 0.31, Optimal, 1.0),
            (0.7, 0.05, 0.3, Fixed(0.8), 0.9),
            (1.0, 0.0, 0.4, Fixed(1.0), 1.0),
            (0.4, 0.02, 0.25, Fixed(0.6), 0.8),
            (0.9, 0.0, 0.45, Fixed(0.5), 1.0),
        ]
        .into_iter()
        .map(|(transmission, eps, chi, gain, phi)| PointSpec {
            transmission,
            eps,
            chi,
            gain,
            phi,
            ..base.clone()
        })
        .collect()
    };
    let dim = base.dim;
    let inputs: Vec<(String, FockOperator, Vec<f64>)> = match p.input.as_deref() {
        Some(_) => vec![(
            base.input.to_string(),
            base.input.density(dim)?,
            base.input.populations(dim),
        )],
        None => [InputState::Vacuum, InputState::Fock(1), InputState::Coherent(Complex64::new(0.8, 0.0))]
            .into_iter()
            .map(|s| Ok((s.to_string(), s.density(dim)?, s.populations(dim))))
            .chain(std::iter::once(Ok(("superposition".to_string(), InputState::superposition(dim), vec![0.5, 0.5]))))
            .collect::<Result<_, CliError>>()?,
    };
    let grid = base.grid()?;
    for spec in &points {
        let ch = spec.channel()?;
        let cfg = spec.teleporter()?;
        let eff = spec.effective()?;
        let at = format!(
            "T={} ε={} χ={} g={:.6} φ={}",
            spec.transmission,
            spec.eps,
            spec.chi,
            cfg.gain(),
            spec.phi
        );
        for (name, rho, pops) in &inputs {
            let oracle = teleport_arbitrary_state(rho, &ch, &cfg, &grid, dim)?;
            let closed = apply_effective_system(rho, &eff, &grid, dim)?;
            report.add(
                format!("{name} at {at}: state distance"),
                oracle.operator.frobenius_distance(&closed) / closed.trace(),
                EFFECTIVE_TOL,
            );
            let expected = success_probability(&eff, pops)?;
            report.add(
                format!("{name} at {at}: trace vs success probability"),
                (oracle.operator.trace() - expected).abs() / expected,
                TRACE_TOL,
            );
        }
    }
    Ok(())
}

fn bell_suite(args: &OracleArgs, base: &PointSpec, report: &mut Report) -> Result<(), CliError> {
    let deltas = if args.delta.is_empty() {
        vec![0.0, 0.05, 0.1063, 0.3, 0.5]
    } else {
        args.delta.clone()
    };
    let grid = base.grid()?;
    let dim = args.params.dim.unwrap_or(8);
    for delta in deltas {
        let closed = chsh_tele(delta)?;
        let small = noisy_bell_oracle(delta, &grid, dim)?;
        let large = noisy_bell_oracle(delta, &grid, dim + 4)?;
        for (name, o, c, l) in [
            ("p_check", small.p_check, closed.p_check, large.p_check),
            ("S_cond", small.s_cond, closed.s_cond, large.s_cond),
            ("C_cond", small.c_cond, closed.c_cond, large.c_cond),
        ] {
            report.add(format!("Δ={delta} {name} vs closed form"), (o - c).abs(), BELL_TOL);
            report.add(format!("Δ={delta} {name} D={dim}→{}", dim + 4), (o - l).abs(), BELL_SHIFT_TOL);
        }
    }
    Ok(())
}

pub fn cmd_oracle_check(mut args: OracleArgs) -> Result<Report, CliError> {
    args.params.merge_config()?;
    let mut params = args.params.clone();
    // grid and truncation only; the suites choose their own parameter points
    if params.gain.is_none() && params.g.is_none() {
        params.gain = Some("gopt".into());
    }
    let mut base = PointSpec::from_args(&params)?;
    if args.params.dim.is_none() {
        base.dim = 30;
    }
    let mut report = Report::default();
    match args.suite {
        Suite::Coherent => coherent_suite(&args, &base, &mut report)?,
        Suite::EffectiveSystem => effective_suite(&args, &base, &mut report)?,
        Suite::Bell => bell_suite(&args, &base, &mut report)?,
    }
    let failures = report.failures();
    println!(
        "{}: {} checks, max deviation {:.3e}",
        if failures.is_empty() { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.max_deviation()
    );
    if let Some(first) = failures.first() {
        return Err(CliError::Tolerance(format!(
            "{} of {} checks failed, first at {}",
            failures.len(),
            report.checks.len(),
            first.label
        )));
    }
    Ok(report)
}
