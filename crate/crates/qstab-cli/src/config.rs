//! Flat key-value experiment configs: one scenario per file, `key = value`
//! lines, optional `[section]` headers (cosmetic), `#` comments.  Repeated
//! `peripheral` keys accumulate.  The raw text is hashed for the output
//! directory key, so configs stay reviewable and reproducible.

use std::path::PathBuf;
use std::str::FromStr;

use crate::spaces::SpaceSpec;
use qstab::group_spaces::words::{parse_word, Word};
use qstab::metric_core::Frac;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`, got {1:?}")]
    BadLine(usize, String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("missing required key {0:?} for this scenario")]
    Missing(&'static str),
    #[error("radii must be strictly increasing")]
    RadiiNotIncreasing(),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scenario {
    Recurrence,
    Stability,
    Contraction,
    Property5,
    Pullback,
    RelhypCriterion,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Recurrence => "recurrence",
            Scenario::Stability => "stability",
            Scenario::Contraction => "contraction",
            Scenario::Property5 => "property5",
            Scenario::Pullback => "pullback",
            Scenario::RelhypCriterion => "relhyp_criterion",
        }
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "recurrence" => Scenario::Recurrence,
            "stability" => Scenario::Stability,
            "contraction" => Scenario::Contraction,
            "property5" => Scenario::Property5,
            "pullback" => Scenario::Pullback,
            "relhyp_criterion" => Scenario::RelhypCriterion,
            other => return Err(ConfigError::UnknownScenario(other.to_string())),
        })
    }
}

/// How stability constants are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StabilityModeCfg {
    Exact,
    Probe,
    /// Exact when the graph fits the oracle limit, probe otherwise.
    Auto,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub space: SpaceSpec,
    /// Peripheral generator subsets (positive indices).
    pub peripherals: Vec<Vec<u16>>,
    /// Subgroup generator words.
    pub subgroup: Vec<Word>,
    pub t: Vec<Frac>,
    pub c: Vec<Frac>,
    pub kappa: Vec<Frac>,
    pub lambda: Vec<Frac>,
    pub eps: Vec<u32>,
    pub radii: Vec<u32>,
    /// Endpoint distances of reference geodesics.
    pub lengths: Vec<u32>,
    /// Tiling corona count (tiling spaces only).
    pub layers: u32,
    pub mode: StabilityModeCfg,
    pub seed: u64,
    pub vertex_cap: usize,
    pub delta_samples: usize,
    pub budget_seconds: Option<u64>,
    pub output: PathBuf,
    /// Verbatim config text (hashed for the run directory).
    pub raw: String,
}

impl ExperimentConfig {
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.raw.as_bytes());
        hex(&h.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_fracs(key: &str, v: &str) -> Result<Vec<Frac>, ConfigError> {
    split_list(v)
        .map(|s| {
            Frac::parse(s).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                reason: format!("{s:?} is not a rational"),
            })
        })
        .collect()
}

fn parse_ints<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    split_list(v)
        .map(|s| {
            s.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                reason: format!("{s:?} is not an integer"),
            })
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut scenario = None;
    let mut space = None;
    let mut peripherals = Vec::new();
    let mut subgroup_raw: Vec<String> = Vec::new();
    let mut t = Vec::new();
    let mut c = Vec::new();
    let mut kappa = Vec::new();
    let mut lambda = Vec::new();
    let mut eps = Vec::new();
    let mut radii = Vec::new();
    let mut lengths = Vec::new();
    let mut layers = 0u32;
    let mut mode = StabilityModeCfg::Auto;
    let mut seed = 0u64;
    let mut vertex_cap = qstab::group_spaces::DEFAULT_VERTEX_BUDGET;
    let mut delta_samples = 200usize;
    let mut budget_seconds = None;
    let mut output = PathBuf::from("out");

    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::BadLine(i + 1, line.to_string()));
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = |reason: String| ConfigError::BadValue { key: key.to_string(), reason };
        match key {
            "scenario" => scenario = Some(value.parse::<Scenario>()?),
            "group" => {
                space = Some(SpaceSpec::parse(value).map_err(|e| bad(e))?);
            }
            "peripheral" => {
                peripherals.push(parse_ints::<u16>(key, value)?);
            }
            "subgroup" => {
                subgroup_raw.extend(split_list(value).map(String::from));
            }
            "t" => t = parse_fracs(key, value)?,
            "c" => c = parse_fracs(key, value)?,
            "kappa" => kappa = parse_fracs(key, value)?,
            "lambda" => lambda = parse_fracs(key, value)?,
            "eps" => eps = parse_ints(key, value)?,
            "radii" => radii = parse_ints(key, value)?,
            "lengths" => lengths = parse_ints(key, value)?,
            "layers" => {
                layers = value.parse().map_err(|_| bad("not an integer".into()))?;
            }
            "mode" => {
                mode = match value {
                    "exact" => StabilityModeCfg::Exact,
                    "probe" => StabilityModeCfg::Probe,
                    "auto" => StabilityModeCfg::Auto,
                    other => return Err(bad(format!("unknown mode {other:?}"))),
                }
            }
            "seed" => seed = value.parse().map_err(|_| bad("not an integer".into()))?,
            "vertex_cap" => {
                vertex_cap = value.parse().map_err(|_| bad("not an integer".into()))?;
            }
            "delta_samples" => {
                delta_samples = value.parse().map_err(|_| bad("not an integer".into()))?;
            }
            "budget_seconds" => {
                budget_seconds = Some(value.parse().map_err(|_| bad("not an integer".into()))?);
            }
            "output" => output = PathBuf::from(value),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
    }

    let scenario = scenario.ok_or(ConfigError::Missing("scenario"))?;
    let space = space.ok_or(ConfigError::Missing("group"))?;
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::RadiiNotIncreasing());
    }

    // Resolve subgroup words against the group's generator count.
    let gen_count = match &space {
        SpaceSpec::Group(g) => g.gen_count(),
        SpaceSpec::Tiling { .. } => 0,
    };
    let subgroup: Vec<Word> = subgroup_raw
        .iter()
        .map(|s| {
            parse_word(s, gen_count).map_err(|e| ConfigError::BadValue {
                key: "subgroup".into(),
                reason: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;

    // Per-scenario required grids.
    let need = |cond: bool, key: &'static str| if cond { Ok(()) } else { Err(ConfigError::Missing(key)) };
    match scenario {
        Scenario::Recurrence => {
            need(!lengths.is_empty(), "lengths")?;
            need(!t.is_empty(), "t")?;
            need(!c.is_empty(), "c")?;
        }
        Scenario::Stability => {
            need(!lengths.is_empty(), "lengths")?;
            need(!kappa.is_empty(), "kappa")?;
            need(!lambda.is_empty(), "lambda")?;
        }
        Scenario::Contraction => {
            need(!lengths.is_empty(), "lengths")?;
            need(!eps.is_empty(), "eps")?;
        }
        Scenario::Property5 => {
            need(!lengths.is_empty(), "lengths")?;
            need(!c.is_empty(), "c")?;
        }
        Scenario::Pullback => {
            need(!radii.is_empty(), "radii")?;
            need(!peripherals.is_empty(), "peripheral")?;
            need(!subgroup.is_empty(), "subgroup")?;
            need(!t.is_empty(), "t")?;
            need(!c.is_empty(), "c")?;
        }
        Scenario::RelhypCriterion => {
            need(!radii.is_empty(), "radii")?;
            need(!peripherals.is_empty(), "peripheral")?;
            need(!subgroup.is_empty(), "subgroup")?;
        }
    }
    if matches!(space, SpaceSpec::Tiling { .. }) && layers == 0 && radii.is_empty() {
        return Err(ConfigError::Missing("layers"));
    }

    Ok(ExperimentConfig {
        scenario,
        space,
        peripherals,
        subgroup,
        t,
        c,
        kappa,
        lambda,
        eps,
        radii,
        lengths,
        layers,
        mode,
        seed,
        vertex_cap,
        delta_samples,
        budget_seconds,
        output,
        raw: text.to_string(),
    })
}
