use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ConfigFile;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cv-purify", version, about = "Teleportation with Gaussian post-selection: effective channels, sweeps and oracle checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Effective channel at a single parameter point
    Effective(EffectiveArgs),
    /// CHSH, concurrence and success-probability curves against χ at g_opt
    Fig3(Fig3Args),
    /// Closed forms against the Fock-space oracle
    OracleCheck(OracleArgs),
    /// One CSV row per grid point of a single swept variable
    Sweep(SweepArgs),
}

/// Point parameters shared by every subcommand. Unset values fall back to
/// the `--config` file, then to built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Channel transmission
    #[arg(long = "T")]
    pub transmission: Option<f64>,
    /// Channel excess noise, shot-noise units
    #[arg(long)]
    pub eps: Option<f64>,
    /// EPR squeezing parameter χ
    #[arg(long)]
    pub chi: Option<f64>,
    /// Fixed post-selection gain
    #[arg(long, conflicts_with = "gain")]
    pub g: Option<f64>,
    /// `gopt` or a numeric gain
    #[arg(long)]
    pub gain: Option<String>,
    /// Bob's classical gain
    #[arg(long)]
    pub phi: Option<f64>,
    /// Fock truncation
    #[arg(long = "D")]
    pub dim: Option<usize>,
    /// Quadrature nodes per axis
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Quadrature cutoff radius in standardized units
    #[arg(long)]
    pub grid_radius: Option<f64>,
    /// vacuum | fock:n | coherent:α | bell
    #[arg(long)]
    pub input: Option<String>,
    /// Number of teleporters the success probability is compounded over
    #[arg(long)]
    pub teleporters: Option<u32>,
    /// Output file (directory for fig3)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file mirroring the flags; flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EffectiveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args, Debug, Clone)]
pub struct Fig3Args {
    #[command(flatten)]
    pub params: ParamArgs,
    /// χ range as `lo,hi`
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    Chi,
    #[value(name = "T", alias = "t")]
    T,
    G,
    #[value(name = "Delta", alias = "delta")]
    Delta,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Chi => "chi",
            SweepVariable::T => "T",
            SweepVariable::G => "g",
            SweepVariable::Delta => "Delta",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "chi" => Ok(SweepVariable::Chi),
            "T" | "t" => Ok(SweepVariable::T),
            "g" => Ok(SweepVariable::G),
            "Delta" | "delta" => Ok(SweepVariable::Delta),
            other => Err(CliError::Usage(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Swept variable
    #[arg(long, value_enum)]
    pub var: Option<SweepVariable>,
    /// Sweep range as `lo,hi`
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Coherent,
    EffectiveSystem,
    Bell,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Excess-noise values for the Bell suite, comma separated
    #[arg(long = "Delta", value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Random parameter points for the coherent suite
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, cfg: &ConfigFile, key: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = cfg.get(key)?;
    }
    Ok(())
}

impl ParamArgs {
    pub fn merge_config(&mut self) -> Result<Option<ConfigFile>, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(None);
        };
        let cfg = ConfigFile::load(&path)?;
        fill(&mut self.transmission, &cfg, "T")?;
        fill(&mut self.eps, &cfg, "eps")?;
        fill(&mut self.chi, &cfg, "chi")?;
        if self.g.is_none() && self.gain.is_none() {
            fill(&mut self.g, &cfg, "g")?;
            fill(&mut self.gain, &cfg, "gain")?;
            if self.g.is_some() && self.gain.is_some() {
                return Err(CliError::Usage("config sets both `g` and `gain`".into()));
            }
        }
        fill(&mut self.phi, &cfg, "phi")?;
        fill(&mut self.dim, &cfg, "D")?;
        fill(&mut self.grid_n, &cfg, "grid-n")?;
        fill(&mut self.grid_radius, &cfg, "grid-radius")?;
        fill(&mut self.input, &cfg, "input")?;
        fill(&mut self.teleporters, &cfg, "teleporters")?;
        fill(&mut self.out, &cfg, "out")?;
        Ok(Some(cfg))
    }
}

impl Fig3Args {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        if let Some(cfg) = self.params.merge_config()? {
            fill(&mut self.range, &cfg, "range")?;
            fill(&mut self.points, &cfg, "points")?;
        }
        Ok(())
    }
}

impl SweepArgs {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        if let Some(cfg) = self.params.merge_config()? {
            if self.var.is_none() {
                if let Some(raw) = cfg.get::<String>("var")? {
                    self.var = Some(SweepVariable::parse(&raw)?);
                }
            }
            fill(&mut self.range, &cfg, "range")?;
            fill(&mut self.points, &cfg, "points")?;
        }
        Ok(())
    }
}

/// `lo,hi` with `lo < hi`.
pub fn parse_range(raw: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("range `{raw}` must read `lo,hi` with lo < hi"));
    let (lo, hi) = raw.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}
