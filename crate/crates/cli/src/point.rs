use std::fmt;
use std::str::FromStr;

use cv_purify::fock::coherent_state;
use cv_purify::{
    chsh_loss, chsh_tele, effective_params, optimal_gain, success_probability, ChannelParams,
    EffectiveChannelParams, FockOperator, QuadratureGrid, TeleporterConfig,
};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::args::ParamArgs;
use crate::error::CliError;

pub const DEFAULT_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainPolicy {
    Fixed(f64),
    Optimal,
}

impl GainPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            GainPolicy::Fixed(_) => "fixed",
            GainPolicy::Optimal => "gopt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputState {
    Vacuum,
    Fock(usize),
    Coherent(Complex64),
    /// One photon per teleporter, the dual-rail Bell state.
    Bell,
}

impl FromStr for InputState {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Usage(format!("input `{s}` is not vacuum | fock:n | coherent:α | bell"));
        match s.split_once(':') {
            None if s == "vacuum" => Ok(InputState::Vacuum),
            None if s == "bell" => Ok(InputState::Bell),
            Some(("fock", n)) => n.trim().parse().map(InputState::Fock).map_err(|_| bad()),
            Some(("coherent", a)) => Complex64::from_str(a.trim())
                .ok()
                .filter(|a| a.re.is_finite() && a.im.is_finite())
                .map(InputState::Coherent)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputState::Vacuum => write!(f, "vacuum"),
            InputState::Fock(n) => write!(f, "fock:{n}"),
            InputState::Coherent(a) if a.im == 0.0 => write!(f, "coherent:{}", a.re),
            InputState::Coherent(a) => write!(f, "coherent:{}{:+}i", a.re, a.im),
            InputState::Bell => write!(f, "bell"),
        }
    }
}

impl InputState {
    /// Photon-number populations on `dim` levels.
    pub fn populations(&self, dim: usize) -> Vec<f64> {
        match self {
            InputState::Vacuum => vec![1.0],
            InputState::Bell => vec![0.0, 1.0],
            InputState::Fock(n) => {
                let mut p = vec![0.0; n + 1];
                p[*n] = 1.0;
                p
            }
            InputState::Coherent(a) => coherent_state(*a, dim).iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    /// Density matrix seen by a single teleporter.
    pub fn density(&self, dim: usize) -> Result<FockOperator, CliError> {
        match self {
            InputState::Vacuum => Ok(FockOperator::fock(0, dim)),
            InputState::Fock(n) if *n < dim => Ok(FockOperator::fock(*n, dim)),
            InputState::Bell if dim > 1 => Ok(FockOperator::fock(1, dim)),
            InputState::Coherent(a) => Ok(FockOperator::projector(&coherent_state(*a, dim))),
            _ => Err(CliError::Usage(format!("input {self} does not fit in D={dim}"))),
        }
    }

    pub fn superposition(dim: usize) -> FockOperator {
        let s = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let mut v = DVector::zeros(dim);
        v[0] = s;
        v[1] = s;
        FockOperator::projector(&v)
    }
}

/// A fully resolved parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub transmission: f64,
    pub eps: f64,
    pub chi: f64,
    pub gain: GainPolicy,
    pub phi: f64,
    pub input: InputState,
    pub teleporters: u32,
    pub dim: usize,
    pub grid_n: usize,
    pub grid_radius: f64,
    /// When set, only the Bell-test quantities are evaluated at this Δ.
    pub delta: Option<f64>,
}

impl PointSpec {
    pub fn from_args(args: &ParamArgs) -> Result<Self, CliError> {
        let gain = match (args.g, args.gain.as_deref()) {
            (Some(g), _) => GainPolicy::Fixed(g),
            (None, None) | (None, Some("gopt")) => GainPolicy::Optimal,
            (None, Some(raw)) => GainPolicy::Fixed(
                raw.parse()
                    .map_err(|_| CliError::Usage(format!("--gain takes `gopt` or a number, not `{raw}`")))?,
            ),
        };
        let spec = Self {
            transmission: args.transmission.unwrap_or(0.5),
            eps: args.eps.unwrap_or(0.0),
            chi: args.chi.unwrap_or(0.31),
            gain,
            phi: args.phi.unwrap_or(1.0),
            input: args.input.as_deref().unwrap_or("vacuum").parse()?,
            teleporters: args.teleporters.unwrap_or(1),
            dim: args.dim.unwrap_or(DEFAULT_DIM),
            grid_n: args.grid_n.unwrap_or(64),
            grid_radius: args.grid_radius.unwrap_or(6.5),
            delta: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.gain == GainPolicy::Optimal && (self.eps != 0.0 || self.phi != 1.0) {
            return Err(CliError::Usage("the g_opt policy requires eps = 0 and phi = 1".into()));
        }
        if self.teleporters == 0 {
            return Err(CliError::Usage("at least one teleporter is needed".into()));
        }
        if self.dim < 2 {
            return Err(CliError::Usage("D must be at least 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<QuadratureGrid, CliError> {
        Ok(QuadratureGrid::new(self.grid_n, self.grid_radius)?)
    }

    pub fn channel(&self) -> Result<ChannelParams, CliError> {
        Ok(ChannelParams::new(self.transmission, self.eps)?)
    }

    pub fn resolved_gain(&self) -> Result<f64, CliError> {
        match self.gain {
            GainPolicy::Fixed(g) => Ok(g),
            GainPolicy::Optimal => Ok(optimal_gain(self.transmission, self.chi)?),
        }
    }

    pub fn teleporter(&self) -> Result<TeleporterConfig, CliError> {
        Ok(TeleporterConfig::new(self.chi, self.resolved_gain()?, self.phi)?)
    }

    pub fn effective(&self) -> Result<EffectiveChannelParams, CliError> {
        Ok(effective_params(&self.channel()?, &self.teleporter()?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub g: f64,
    pub eta: f64,
    pub chi_ch: f64,
    pub delta: f64,
    pub g_eff: f64,
    pub big_g: f64,
    pub prefactor: f64,
    pub lambda_out: f64,
    pub p_single: f64,
    pub p_total: f64,
    pub s_loss: f64,
    pub s_tele: f64,
    pub c_loss: f64,
    pub c_tele: f64,
    pub truncation_mass: f64,
    pub quadrature_error: f64,
}

impl Outputs {
    fn empty() -> Self {
        Self {
            g: f64::NAN,
            eta: f64::NAN,
            chi_ch: f64::NAN,
            delta: f64::NAN,
            g_eff: f64::NAN,
            big_g: f64::NAN,
            prefactor: f64::NAN,
            lambda_out: f64::NAN,
            p_single: f64::NAN,
            p_total: f64::NAN,
            s_loss: f64::NAN,
            s_tele: f64::NAN,
            c_loss: f64::NAN,
            c_tele: f64::NAN,
            truncation_mass: f64::NAN,
            quadrature_error: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Rejected parameter rather than an infeasible regime.
    pub usage: bool,
    pub message: String,
}

impl From<CliError> for Failure {
    fn from(err: CliError) -> Self {
        match err {
            CliError::Usage(message) => Failure { usage: true, message },
            CliError::Infeasible(message) | CliError::Tolerance(message) => Failure { usage: false, message },
            other => Failure {
                usage: false,
                message: other.to_string(),
            },
        }
    }
}

/// One evaluated point: inputs, outputs and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub spec: PointSpec,
    pub outputs: Outputs,
    pub status: Result<(), Failure>,
}

impl RunRecord {
    pub fn feasible(&self) -> bool {
        self.status.is_ok()
    }

    pub fn into_result(self) -> Result<Self, CliError> {
        match &self.status {
            Ok(()) => Ok(self),
            Err(f) if f.usage => Err(CliError::Usage(f.message.clone())),
            Err(f) => Err(CliError::Infeasible(f.message.clone())),
        }
    }
}

fn bell_quantities(out: &mut Outputs, transmission: f64, delta: f64) -> Result<(), CliError> {
    let loss = chsh_loss(transmission)?;
    out.s_loss = loss.s;
    out.c_loss = loss.c;
    let tele = chsh_tele(delta.max(0.0))?;
    out.s_tele = tele.s;
    out.c_tele = tele.c;
    Ok(())
}

fn compute(spec: &PointSpec, out: &mut Outputs) -> Result<(), CliError> {
    out.quadrature_error = spec.grid()?.self_test_deviation();
    if let Some(delta) = spec.delta {
        out.delta = delta;
        return bell_quantities(out, spec.transmission, delta);
    }
    out.g = spec.resolved_gain()?;
    let eff = spec.effective()?;
    out.eta = eff.eta;
    out.chi_ch = eff.chi_ch;
    out.delta = eff.delta;
    out.g_eff = eff.g_eff;
    out.big_g = eff.big_g;
    out.prefactor = eff.prefactor;
    out.lambda_out = eff.lambda_out;

    let pops = spec.input.populations(spec.dim);
    out.truncation_mass = (1.0 - pops.iter().sum::<f64>()).max(0.0);
    out.p_single = success_probability(&eff, &pops)?;
    out.p_total = out.p_single.powi(spec.teleporters as i32);

    let loss = chsh_loss(spec.transmission)?;
    out.s_loss = loss.s;
    out.c_loss = loss.c;
    // the Bell-test closed forms assume unit effective transmission
    if eff.is_unit_transmission(1e-9) {
        bell_quantities(out, spec.transmission, eff.delta)?;
    }
    Ok(())
}

pub fn evaluate(spec: &PointSpec) -> RunRecord {
    let mut outputs = Outputs::empty();
    let status = compute(spec, &mut outputs).map_err(Failure::from);
    RunRecord {
        spec: spec.clone(),
        outputs,
        status,
    }
}
