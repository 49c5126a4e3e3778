//! Run configuration: a single JSON document with unknown keys rejected, so
//! a config file fully determines a run.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::DensityKernel;
use crate::error::{Error, Result};
use crate::sigmoid::Sigmoidal;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Activation id: "logistic" or "tanh".
    #[serde(default = "default_activation")]
    pub activation: String,
    /// Integer interval [a, b] carrying the samples.
    #[serde(default = "default_interval")]
    pub interval: (i64, i64),
    /// Shrink for the guaranteed interval I_delta = [a + delta, b - delta].
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Highest derivative order in play.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Polynomial decay exponent for the derivative certificates;
    /// defaults to 2m + 2.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Decay exponent for the kernel itself; defaults to beta.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Kernel rescale x -> phi(x/c)/c; c != 1 is a Strang-Fix control.
    #[serde(default)]
    pub kernel_scale: Option<f64>,
    /// Test-function ids for converge/voronovskaja/eval/bound.
    #[serde(default = "default_functions")]
    pub functions: Vec<String>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<u32>,
    #[serde(default = "default_s_list")]
    pub s_list: Vec<usize>,
    #[serde(default = "default_x_list")]
    pub x_list: Vec<f64>,
    /// Moment orders for the moments subcommand.
    #[serde(default = "default_nu_list")]
    pub nu_list: Vec<u32>,
    /// Strang-Fix: frequencies 2 pi k, k = 1..k_max.
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// Strang-Fix: highest moment order checked.
    #[serde(default = "default_nu_max")]
    pub nu_max: usize,
    /// Pass/fail tolerance for Strang-Fix checks.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Points on the I_delta sup-estimation grid.
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

fn default_activation() -> String {
    "logistic".into()
}
fn default_interval() -> (i64, i64) {
    (0, 3)
}
fn default_delta() -> f64 {
    0.25
}
fn default_m() -> usize {
    3
}
fn default_functions() -> Vec<String> {
    vec!["sin".into()]
}
fn default_n_list() -> Vec<u32> {
    vec![20, 40, 80, 160]
}
fn default_s_list() -> Vec<usize> {
    vec![0, 1, 2]
}
fn default_x_list() -> Vec<f64> {
    vec![1.5]
}
fn default_nu_list() -> Vec<u32> {
    vec![0, 1, 2]
}
fn default_k_max() -> u32 {
    3
}
fn default_nu_max() -> usize {
    2
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_grid_resolution() -> usize {
    241
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or((2 * self.m + 2) as f64)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.beta())
    }

    /// Structural validation; theorem hypotheses (beta > 2m, moment
    /// conditions) are checked by the operations themselves so their
    /// violation is reported as a flagged run, not a config error.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.interval;
        if a >= b {
            return Err(Error::Config(format!("interval [{a}, {b}] is empty")));
        }
        if !(self.delta > 0.0) || 2.0 * self.delta >= (b - a) as f64 {
            return Err(Error::Config(format!(
                "delta {} leaves no guaranteed interval inside [{a}, {b}]",
                self.delta
            )));
        }
        if self.m < 1 || self.m > crate::sigmoid::MAX_ORDER {
            return Err(Error::Config(format!(
                "m = {} outside 1..={}",
                self.m,
                crate::sigmoid::MAX_ORDER
            )));
        }
        if self.nu_max > self.m {
            return Err(Error::Config(format!(
                "nu_max {} > m {}",
                self.nu_max, self.m
            )));
        }
        if self.s_list.iter().any(|&s| s > self.m) {
            return Err(Error::Config(format!(
                "s_list {:?} exceeds m = {}",
                self.s_list, self.m
            )));
        }
        if self.functions.is_empty() {
            return Err(Error::Config("functions list is empty".into()));
        }
        for id in &self.functions {
            crate::analysis::TestFunction::by_id(id)?;
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list is empty".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Config("grid_resolution < 2".into()));
        }
        let lo = a as f64 + self.delta;
        let hi = b as f64 - self.delta;
        for &x in &self.x_list {
            if !(lo <= x && x <= hi) {
                return Err(Error::Config(format!(
                    "x = {x} outside the guaranteed interval [{lo}, {hi}]"
                )));
            }
        }
        if let Some(c) = self.kernel_scale {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("kernel_scale {c} invalid")));
            }
        }
        Ok(())
    }

    /// Build the kernel this config describes. Derivative budget m + 1:
    /// studies use orders up to m, the bound evaluators one more.
    pub fn kernel(&self) -> Result<DensityKernel> {
        let max_order = (self.m + 1).min(crate::sigmoid::MAX_ORDER);
        let sig = match self.activation.as_str() {
            "logistic" => Sigmoidal::logistic(max_order, self.alpha(), self.beta())?,
            "tanh" => Sigmoidal::tanh(max_order, self.alpha(), self.beta())?,
            other => {
                return Err(Error::Config(format!(
                    "unknown activation {other:?}; known: logistic, tanh"
                )))
            }
        };
        DensityKernel::rescaled(Arc::new(sig), self.kernel_scale.unwrap_or(1.0))
    }
}
