use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use revdiss::model::ExternalCoupling;
use revdiss::sweeps::Lift;
use revdiss::{EffectiveParams, FullParams, RingParams};
use serde::Deserialize;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "REVDISS_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "revdiss-out";

const DEFAULT_G: f64 = 10.0;
/// Mechanical damping default, deep in the reversed-dissipation regime.
const DEFAULT_GAMMA_OVER_G: f64 = 50.0;
/// Ring loss default: the critical-coupling loss of the two-cavity defaults.
const DEFAULT_RING_KAPPA: f64 = 22.0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Only `"kappa_i"` is accepted: every rate is in units of the intrinsic loss.
    pub units: Option<String>,
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub effective: Option<EffectiveSection>,
    pub full: Option<FullSection>,
    pub ring: Option<RingSection>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveSection {
    pub omega: Option<f64>,
    pub kappa_i: Option<f64>,
    pub kappa_e: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub theta: Option<f64>,
    pub theta_over_halfpi: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullSection {
    pub omega: Option<f64>,
    pub kappa_i: Option<f64>,
    pub kappa_e: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub theta: Option<f64>,
    pub theta_over_halfpi: Option<f64>,
    pub gamma: Option<f64>,
    pub lift: Option<LiftArg>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSection {
    pub omega: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub theta: Option<f64>,
    pub theta_over_halfpi: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub points: Option<usize>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub theta_points: Option<usize>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub ratio_points: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Only `"csv"`; JSON sidecars are always written alongside.
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Effective,
    Full,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftArg {
    Literal,
    Resonant,
}

impl From<LiftArg> for Lift {
    fn from(l: LiftArg) -> Self {
        match l {
            LiftArg::Literal => Lift::Literal,
            LiftArg::Resonant => Lift::Resonant,
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Default, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    /// Coherent coupling G.
    #[arg(long = "G", global = true, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Dissipative coupling J.
    #[arg(long = "J", global = true, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Coupling phase in radians.
    #[arg(
        long,
        global = true,
        allow_negative_numbers = true,
        conflicts_with = "theta_over_halfpi"
    )]
    pub theta: Option<f64>,
    /// Coupling phase as a multiple of π/2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta_over_halfpi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub kappa_i: Option<f64>,
    /// External coupling; default is critical coupling.
    #[arg(long, global = true)]
    pub kappa_e: Option<f64>,
    /// Ring loss rate.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Mechanical damping of the full model.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Coupling magnitude rule when embedding in the full model.
    #[arg(long, global = true, value_enum)]
    pub lift: Option<LiftArg>,
    /// Output directory; falls back to $REVDISS_OUT_DIR, then the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Everything a subcommand needs once config and flags are merged.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: ModelKind,
    pub omega: f64,
    pub kappa_i: f64,
    pub kappa_e: Option<f64>,
    pub g: f64,
    pub j: f64,
    pub theta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub lift: Lift,
    pub sweep: SweepSection,
    pub out_dir: PathBuf,
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse_config(text: &str) -> Result<Config> {
    let cfg: Config = toml::from_str(text)?;
    if let Some(u) = &cfg.units {
        if u != "kappa_i" {
            bail!("key `units`: unsupported value `{u}` (only \"kappa_i\")");
        }
    }
    if let Some(f) = &cfg.output.format {
        if f != "csv" {
            bail!("key `output.format`: unsupported value `{f}` (only \"csv\")");
        }
    }
    if let Some(m) = &cfg.model {
        let count = [m.effective.is_some(), m.full.is_some(), m.ring.is_some()]
            .into_iter()
            .filter(|&b| b)
            .count();
        if count != 1 {
            bail!(
                "key `model`: exactly one of [model.effective], [model.full], [model.ring] is required, found {count}"
            );
        }
    }
    Ok(cfg)
}

fn angle(radians: Option<f64>, halfpi: Option<f64>, section: &str) -> Result<Option<f64>> {
    match (radians, halfpi) {
        (Some(_), Some(_)) => bail!("keys `{section}.theta` and `{section}.theta_over_halfpi` are mutually exclusive"),
        (Some(t), None) => Ok(Some(t)),
        (None, Some(h)) => Ok(Some(h * FRAC_PI_2)),
        (None, None) => Ok(None),
    }
}

pub fn resolve(cfg: Config, args: &CommonArgs) -> Result<Resolved> {
    let from_file = cfg.model.as_ref().map(|m| {
        if m.full.is_some() {
            ModelKind::Full
        } else if m.ring.is_some() {
            ModelKind::Ring
        } else {
            ModelKind::Effective
        }
    });
    if let (Some(flag), Some(file)) = (args.model, from_file) {
        if flag != file {
            bail!("--model {flag:?} disagrees with the config's model section ({file:?})");
        }
    }
    let kind = args.model.or(from_file).unwrap_or(ModelKind::Effective);

    let m = cfg.model.unwrap_or_default();
    let mut r = Resolved {
        kind,
        omega: 0.0,
        kappa_i: 1.0,
        kappa_e: None,
        g: DEFAULT_G,
        j: DEFAULT_G,
        theta: FRAC_PI_2,
        kappa: DEFAULT_RING_KAPPA,
        gamma: DEFAULT_GAMMA_OVER_G * DEFAULT_G,
        lift: Lift::Literal,
        sweep: cfg.sweep,
        out_dir: PathBuf::from(DEFAULT_OUT_DIR),
    };
    let mut gamma_set = false;
    if let Some(s) = m.effective {
        r.omega = s.omega.unwrap_or(r.omega);
        r.kappa_i = s.kappa_i.unwrap_or(r.kappa_i);
        r.kappa_e = s.kappa_e;
        r.g = s.g.unwrap_or(r.g);
        r.j = s.j.unwrap_or(r.j);
        r.theta = angle(s.theta, s.theta_over_halfpi, "model.effective")?.unwrap_or(r.theta);
    }
    if let Some(s) = m.full {
        r.omega = s.omega.unwrap_or(r.omega);
        r.kappa_i = s.kappa_i.unwrap_or(r.kappa_i);
        r.kappa_e = s.kappa_e;
        r.g = s.g.unwrap_or(r.g);
        r.j = s.j.unwrap_or(r.j);
        r.theta = angle(s.theta, s.theta_over_halfpi, "model.full")?.unwrap_or(r.theta);
        gamma_set = s.gamma.is_some();
        r.gamma = s.gamma.unwrap_or(r.gamma);
        r.lift = s.lift.map(Lift::from).unwrap_or(r.lift);
    }
    if let Some(s) = m.ring {
        r.omega = s.omega.unwrap_or(r.omega);
        r.kappa = s.kappa.unwrap_or(r.kappa);
        r.g = s.g.unwrap_or(r.g);
        r.j = s.j.unwrap_or(r.j);
        r.theta = angle(s.theta, s.theta_over_halfpi, "model.ring")?.unwrap_or(r.theta);
    }

    r.omega = args.omega.unwrap_or(r.omega);
    r.kappa_i = args.kappa_i.unwrap_or(r.kappa_i);
    r.kappa_e = args.kappa_e.or(r.kappa_e);
    r.g = args.g.unwrap_or(r.g);
    r.j = args.j.unwrap_or(r.j);
    r.theta = angle(args.theta, args.theta_over_halfpi, "flag")?.unwrap_or(r.theta);
    r.kappa = args.kappa.unwrap_or(r.kappa);
    if args.gamma.is_some() {
        gamma_set = true;
    }
    r.gamma = args.gamma.unwrap_or(r.gamma);
    if !gamma_set {
        // keep the damping ratio fixed when only G changes
        r.gamma = DEFAULT_GAMMA_OVER_G * r.g;
    }
    r.lift = args.lift.map(Lift::from).unwrap_or(r.lift);

    r.out_dir = match (&args.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(dir), _) => dir.clone(),
        (None, Some(env)) if !env.is_empty() => PathBuf::from(env),
        _ => cfg.output.dir.unwrap_or(r.out_dir),
    };
    r.validate()?;
    Ok(r)
}

impl Resolved {
    /// Check the parameters of the selected model before any computation.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ModelKind::Effective => {
                self.effective()?;
            }
            ModelKind::Full => {
                self.full()?;
            }
            ModelKind::Ring => {
                self.ring()?;
            }
        }
        Ok(())
    }

    pub fn effective(&self) -> Result<EffectiveParams<f64>> {
        let ext = self.kappa_e.map_or(ExternalCoupling::Critical, ExternalCoupling::Fixed);
        Ok(EffectiveParams::new(
            self.omega,
            self.kappa_i,
            ext,
            self.g,
            self.j,
            self.theta,
        )?)
    }

    pub fn lift_effective(&self, e: &EffectiveParams<f64>, gamma: f64) -> Result<FullParams<f64>> {
        Ok(match self.lift {
            Lift::Literal => FullParams::lift(e, gamma)?,
            Lift::Resonant => FullParams::lift_resonant(e, gamma)?,
        })
    }

    pub fn full(&self) -> Result<FullParams<f64>> {
        let e = self.effective()?;
        self.lift_effective(&e, self.gamma)
    }

    /// Two-cavity parameters as given; for the full model these are the
    /// parameters it was lifted from, after checking the lift itself.
    pub fn two_cavity(&self) -> Result<EffectiveParams<f64>> {
        if self.kind == ModelKind::Full {
            self.full()?;
        }
        self.effective()
    }

    pub fn ring(&self) -> Result<RingParams<f64>> {
        Ok(RingParams::new(self.omega, self.kappa, self.g, self.j, self.theta)?)
    }

    /// Loss rate setting the natural detuning scale of the selected model.
    pub fn loss_scale(&self) -> f64 {
        match self.kind {
            ModelKind::Ring => self.kappa,
            _ => self.effective().map(|e| e.kappa()).unwrap_or(1.0),
        }
    }
}
