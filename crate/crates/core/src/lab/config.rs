//! Experiment configuration: one flat JSON object, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blend::{build_blend, MAX_PSI_ORDER};
use crate::combinations::LadderRule;
use crate::error::{Error, Result};
use crate::weights::MIN_GRID;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Psi,
    Scheme,
    Lemmas,
    BernsteinIneq,
    Direct,
    InverseConsistency,
    Modulus,
}

impl Experiment {
    /// Whether the experiment builds the modified operator for every `n`.
    pub fn needs_blend(self) -> bool {
        matches!(self, Self::BernsteinIneq | Self::Direct | Self::InverseConsistency)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub function: String,
    pub xi: f64,
    pub alpha: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub r: usize,
    /// Corollary exponent, used by `bernstein_ineq` only.
    pub lambda: f64,
    pub n_list: Vec<usize>,
    pub x_grid: usize,
    /// Number of log-spaced `t` in `[1e-3, 1e-1]`.
    pub t_grid: usize,
    pub ladder_rule: LadderRule,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Direct,
            function: "abspow(1.5)".into(),
            xi: 0.5,
            alpha: 1.0,
            beta0: 0.5,
            beta1: 0.5,
            r: 2,
            lambda: 0.5,
            n_list: vec![64, 128, 256, 512, 1024],
            x_grid: 2001,
            t_grid: 9,
            ladder_rule: LadderRule::Doubling,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return bad(format!("xi = {} must lie in (0, 1)", self.xi));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if !(self.beta0 >= 0.0 && self.beta1 >= 0.0) {
            return bad("beta0 and beta1 must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda = {} must lie in [0, 1]", self.lambda));
        }
        if self.r == 0 || self.r > MAX_PSI_ORDER {
            return bad(format!("r = {} must lie in 1..={MAX_PSI_ORDER}", self.r));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return bad("n_list must be a nonempty list of positive integers".into());
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_list must be strictly increasing".into());
        }
        if self.x_grid < MIN_GRID {
            return bad(format!("x_grid = {} must be at least {MIN_GRID}", self.x_grid));
        }
        if self.t_grid < 2 {
            return bad(format!("t_grid = {} must be at least 2", self.t_grid));
        }
        if self.experiment.needs_blend() {
            if self.r < 2 {
                return bad(format!("{:?} needs r >= 2", self.experiment));
            }
            for &n in &self.n_list {
                build_blend(n, self.r, self.xi).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}
