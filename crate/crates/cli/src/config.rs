use serde::{Deserialize, Serialize};

use plate_harnack::calibration::SuiteConfig;
use plate_harnack::geometry::Shape;
use plate_harnack::linalg::DEFAULT_TOL;
use plate_harnack::positivity::DEFAULT_TOL_POS;
use plate_harnack::source::SourceSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Scan,
    Degiorgi,
    Harnack,
    Poincare,
    Exponents,
    Decompose,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Scan => "scan",
            Command::Degiorgi => "degiorgi",
            Command::Harnack => "harnack",
            Command::Poincare => "poincare",
            Command::Exponents => "exponents",
            Command::Decompose => "decompose",
            Command::Report => "report",
        }
    }
}

/// A shape plus the lattice spacing, e.g. `{"shape": "disk", "radius": 1, "h": 0.015625}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub solver: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: DEFAULT_TOL,
            positivity: DEFAULT_TOL_POS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub n_fields: usize,
    pub probes_per_field: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub safety: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        let d = SuiteConfig::default();
        SuiteParams {
            n_fields: d.n_fields,
            probes_per_field: d.probes_per_field,
            r_min: d.r_min,
            r_max: d.r_max,
            safety: d.safety,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustionParams {
    pub levels: usize,
    pub delta0: f64,
}

impl Default for ExhaustionParams {
    fn default() -> Self {
        ExhaustionParams {
            levels: 3,
            delta0: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareParams {
    pub n_fields: usize,
    pub p_norms: Vec<f64>,
    pub radius: f64,
}

impl Default for PoincareParams {
    fn default() -> Self {
        PoincareParams {
            n_fields: 20,
            p_norms: vec![2.0, 4.0],
            radius: 0.3,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_n_tau() -> usize {
    5
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// γ for single solves and the superposition check.
    #[serde(default)]
    pub gamma: f64,
    /// γ grid of a scan; defaults to `{0, 1, 2, 4, …, 2γ₀}`.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    /// Harnack constant used in γ₀; calibrated when absent.
    #[serde(default)]
    pub harnack_c: Option<f64>,
    /// Interpolation steps of a scan; 0 skips the interpolation.
    #[serde(default = "default_n_tau")]
    pub n_tau: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub suite: SuiteParams,
    #[serde(default)]
    pub exhaustion: ExhaustionParams,
    #[serde(default)]
    pub poincare: PoincareParams,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("config error: {0}")]
    Invalid(String),
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.command != Command::Exponents && self.domain.is_none() {
            return bad(format!("command `{}` needs a domain", self.command.name()));
        }
        if let Some(d) = &self.domain {
            if !(d.h > 0.0) {
                return bad(format!("domain.h must be positive, got {}", d.h));
            }
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if let Some(g) = &self.gammas {
            if g.is_empty() || g[0] < 0.0 || g.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("gammas must be nonnegative and strictly increasing".into());
            }
        }
        if let Some(c) = self.harnack_c {
            if !(c > 0.0) {
                return bad(format!("harnack_c must be positive, got {c}"));
            }
        }
        let t = &self.tolerances;
        if !(t.solver > 0.0) || !(t.positivity >= 0.0) {
            return bad("tolerances must be positive".into());
        }
        let s = &self.suite;
        if s.n_fields == 0 || s.probes_per_field == 0 || !(0.0 < s.r_min && s.r_min < s.r_max) || !(s.safety >= 1.0) {
            return bad("suite needs fields, probes, 0 < r_min < r_max and safety ≥ 1".into());
        }
        if self.exhaustion.levels == 0 || !(self.exhaustion.delta0 > 0.0) {
            return bad("exhaustion needs levels ≥ 1 and delta0 > 0".into());
        }
        let p = &self.poincare;
        if p.n_fields == 0 || p.p_norms.iter().any(|&x| !(x >= 1.0)) || !(p.radius > 0.0) {
            return bad("poincare needs fields, p ≥ 1 and a positive radius".into());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
            .or_else(|| self.domain.as_ref().map(|d| d.shape.dim()))
            .unwrap_or(2)
    }

    pub fn suite_config(&self, seed: u64) -> Option<SuiteConfig> {
        let d = self.domain.as_ref()?;
        Some(SuiteConfig {
            shape: d.shape.clone(),
            h: d.h,
            n_fields: self.suite.n_fields,
            probes_per_field: self.suite.probes_per_field,
            seed,
            r_min: self.suite.r_min,
            r_max: self.suite.r_max,
            safety: self.suite.safety,
        })
    }
}
