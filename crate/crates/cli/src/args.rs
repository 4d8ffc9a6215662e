//! Command-line surface.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lhv_core::inequalities::ChshSettings;
use lhv_core::{Settings, UnitVector};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "lhv-lab",
    version,
    about = "Hidden-variable models of the spin singlet: laws, protocols, CHSH and free-will measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Closed-form law at one settings pair, or a correlator-vs-angle scan.
    Law {
        /// Emit `angle correlator` rows for b - a from 0 to 180 degrees.
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 5.0)]
        step: f64,
    },
    /// Monte Carlo law of a model against its reference law.
    Simulate,
    /// CHSH value, analytic or sampled.
    Chsh {
        #[arg(long)]
        analytic: bool,
        #[arg(long, value_enum, default_value_t = Preset::Optimal)]
        preset: Preset,
    },
    /// Whether correlators admit a joint distribution of all four outcomes.
    Feasibility {
        /// Four correlators `C(a,b),C(a',b),C(a,b'),C(a',b')`; otherwise taken from `--model`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        correlators: Option<Vec<f64>>,
        /// Marginals `m_a,m_a',m_b,m_b'` (default zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        marginals: Option<Vec<f64>>,
        /// Relaxation band in standard errors for sampled inputs.
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[arg(long, value_enum, default_value_t = Preset::Optimal)]
        preset: Preset,
    },
    /// Run a two-station protocol.
    Protocol {
        #[arg(long, value_enum)]
        name: ProtocolName,
        /// Number of candidate settings per side for list-based protocols.
        #[arg(long, default_value_t = 4)]
        candidates: usize,
    },
    /// Try to send a message through lambda.
    Signal {
        /// Bits as a string of 0 and 1; defaults to `--bits` zeros.
        #[arg(long)]
        message: Option<String>,
        #[arg(long, default_value_t = 1000)]
        bits: usize,
    },
    /// Measurement-dependence measures of a discretized model.
    Freewill {
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Compare the settings used against a declared list.
    Audit,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// a=0, a'=90, b=45, b'=-45 degrees.
    Optimal,
    /// a=0, a'=90, b=225, b'=135 degrees.
    SignSaturating,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Tb,
    TbFreewill,
    SharedCoin,
    DetectionLoophole,
    Watch,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, global = true, env = "LHV_LAB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Planar angles in degrees.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b2: Option<f64>,
    /// Full vectors `x,y,z`, normalized; override the angles.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vec_a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vec_b: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vec_a2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vec_b2: Option<String>,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, global = true)]
    pub family: Option<u8>,
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true, default_value_t = 2)]
    pub n_directions: usize,
    #[arg(long, global = true)]
    pub delta_omega: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_vector(flag: &str, text: &str) -> Result<UnitVector> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("--{flag}: expected x,y,z, got {text:?}"))?;
    let [x, y, z] = parts[..] else {
        bail!("--{flag}: expected three components, got {}", parts.len());
    };
    lhv_core::Vector3::new(x, y, z).normalize().map_err(|e| anyhow!("--{flag}: {e}"))
}

impl Common {
    fn direction(&self, flag: &str, vector: &Option<String>, degrees: Option<f64>, default: f64) -> Result<UnitVector> {
        match vector {
            Some(v) => parse_vector(flag, v),
            None => {
                let d = degrees.unwrap_or(default);
                if !d.is_finite() {
                    bail!("--{}: angle must be finite", flag.trim_start_matches("vec-"));
                }
                Ok(UnitVector::planar_degrees(d))
            }
        }
    }

    /// The `(a, b)` pair; defaults to 0 and 60 degrees.
    pub fn settings(&self) -> Result<Settings> {
        Ok(Settings::new(
            self.direction("vec-a", &self.vec_a, self.a, 0.0)?,
            self.direction("vec-b", &self.vec_b, self.b, 60.0)?,
        ))
    }

    /// Four CHSH directions; unspecified ones come from the preset.
    pub fn chsh_settings(&self, preset: Preset) -> Result<ChshSettings> {
        let base = match preset {
            Preset::Optimal => ChshSettings::singlet_optimal(),
            Preset::SignSaturating => ChshSettings::sign_saturating(),
        };
        let pick = |flag: &str, v: &Option<String>, d: Option<f64>, fallback: UnitVector| match (v, d) {
            (None, None) => Ok(fallback),
            _ => self.direction(flag, v, d, 0.0),
        };
        Ok(ChshSettings {
            a: pick("vec-a", &self.vec_a, self.a, base.a)?,
            a2: pick("vec-a2", &self.vec_a2, self.a2, base.a2)?,
            b: pick("vec-b", &self.vec_b, self.b, base.b)?,
            b2: pick("vec-b2", &self.vec_b2, self.b2, base.b2)?,
        })
    }
}

/// The resolved run configuration echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<String>,
    pub n_trials: u64,
    pub seed: u64,
    /// Settings as unit vectors, in the order the command reads them.
    pub settings: Vec<[f64; 3]>,
    pub p: f64,
    pub family: Option<u8>,
    pub mode: Option<String>,
    pub options: serde_json::Map<String, serde_json::Value>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn vector_triple(v: &UnitVector) -> [f64; 3] {
    [v.x(), v.y(), v.z()]
}
