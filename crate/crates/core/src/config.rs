//! TOML run configuration.
//!
//! ```toml
//! [kernel]
//! type = "exponential"   # or "box" (width, mass) / "tabulated" (step, values)
//! rate = 2.0
//! mass = 0.5
//!
//! [link]
//! type = "linear"        # or "saturating_exp" (nu, cap) / "tanh" (nu, amplitude)
//! nu = 1.0
//!
//! [u]
//! breakpoints = [0.0, 100.0]
//! values = [0.0948683298]
//!
//! [sim]
//! seed = 1
//! reps = 10000
//! mode = "stationary"
//!
//! [experiment]
//! beta = 0.2
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chaos::QuadratureConfig;
use crate::error::{Error, Result};
use crate::experiments::{Mode, Scenario};
use crate::model::{HawkesParams, Kernel, LinkFunction, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Exponential { rate: f64, mass: f64 },
    Box { width: f64, mass: f64 },
    Tabulated { step: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkSpec {
    Linear { nu: f64 },
    SaturatingExp { nu: f64, cap: f64 },
    Tanh { nu: f64, amplitude: f64 },
}

/// Step function `values[i]` on `(breakpoints[i], breakpoints[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct USpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

fn default_seed() -> u64 {
    1
}

fn default_reps() -> usize {
    10_000
}

fn default_mode() -> Mode {
    Mode::Rplus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Defaults to the right end of the support of `u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Stationary-mode burn-in; defaults to a kernel-dependent value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            reps: default_reps(),
            mode: default_mode(),
            horizon: None,
            burn_in: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_quad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    /// Constant intensity for `delta_a`; must lie in the intensity bracket
    /// unless `lambda_hat_override` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lambda_hat_override: bool,
}

/// Whole configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    pub link: LinkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<USpec>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Parameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Hex SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every section; run after any programmatic change.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        if let Some(u) = &self.u {
            TestFunction::new(u.breakpoints.clone(), u.values.clone())?;
        }
        if let Some(h) = self.sim.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Parameter(format!(
                    "sim.horizon must be > 0, got {h}"
                )));
            }
        }
        if self.u.is_none() && self.sim.horizon.is_none() {
            return Err(Error::Parameter(
                "either [u] or sim.horizon is required".into(),
            ));
        }
        if let Some(b) = self.sim.burn_in {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Parameter(format!(
                    "sim.burn_in must be >= 0, got {b}"
                )));
            }
            if b > 0.0 && self.sim.mode == Mode::Rplus {
                return Err(Error::Parameter(format!(
                    "sim.burn_in = {b} needs mode = \"stationary\"; rplus runs start from an empty history"
                )));
            }
        }
        if let Some(beta) = self.experiment.beta {
            if !(beta > 0.0 && beta < 0.5) {
                return Err(Error::Domain(format!(
                    "experiment.beta must lie in (0, 1/2), got {beta}"
                )));
            }
        }
        if let Some(h) = self.experiment.h_quad {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Parameter(format!(
                    "experiment.h_quad must be > 0, got {h}"
                )));
            }
        }
        if let Some(l) = self.experiment.lambda_hat {
            if self.experiment.lambda_hat_override {
                crate::chaos::LambdaHat::unchecked(&params, l)?;
            } else {
                crate::chaos::LambdaHat::checked(&params, l)?;
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel> {
        match &self.kernel {
            KernelSpec::Exponential { rate, mass } => Kernel::exponential(*rate, *mass),
            KernelSpec::Box { width, mass } => Kernel::boxcar(*width, *mass),
            KernelSpec::Tabulated { step, values } => Kernel::tabulated(*step, values.clone()),
        }
    }

    pub fn link(&self) -> Result<LinkFunction> {
        match &self.link {
            LinkSpec::Linear { nu } => LinkFunction::linear(*nu),
            LinkSpec::SaturatingExp { nu, cap } => LinkFunction::saturating_exp(*nu, *cap),
            LinkSpec::Tanh { nu, amplitude } => LinkFunction::tanh(*nu, *amplitude),
        }
    }

    pub fn params(&self) -> Result<HawkesParams> {
        HawkesParams::new(self.kernel()?, self.link()?)
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        let u = self
            .u
            .as_ref()
            .ok_or_else(|| Error::Parameter("config has no [u] section".into()))?;
        TestFunction::new(u.breakpoints.clone(), u.values.clone())
    }

    /// Simulation horizon: `sim.horizon`, else the end of the support of `u`.
    pub fn horizon(&self) -> Result<f64> {
        match (self.sim.horizon, &self.u) {
            (Some(h), _) => Ok(h),
            (None, Some(_)) => Ok(self.test_function()?.support().1),
            (None, None) => Err(Error::Parameter(
                "either [u] or sim.horizon is required".into(),
            )),
        }
    }

    /// Burn-in implied by the mode and the optional override.
    pub fn burn_in(&self) -> Result<f64> {
        Ok(match self.sim.mode {
            Mode::Rplus => 0.0,
            Mode::Stationary => match self.sim.burn_in {
                Some(b) => b,
                None => crate::simulator::default_burn_in(&self.params()?),
            },
        })
    }

    pub fn scenario(&self, name: &str) -> Result<Scenario> {
        let mut s = Scenario::new(name, self.params()?, self.test_function()?, self.sim.mode)?;
        if let Some(b) = self.sim.burn_in {
            s = s.with_burn_in(b);
        }
        Ok(s)
    }

    /// Configuration reproducing `scenario` with the given seed and replication count.
    pub fn from_scenario(scenario: &Scenario, seed: u64, reps: usize) -> Self {
        let kernel = match scenario.params.kernel() {
            Kernel::Exponential { rate, mass } => KernelSpec::Exponential {
                rate: *rate,
                mass: *mass,
            },
            Kernel::Box { width, mass } => KernelSpec::Box {
                width: *width,
                mass: *mass,
            },
            Kernel::Tabulated(tab) => KernelSpec::Tabulated {
                step: tab.step(),
                values: tab.values().to_vec(),
            },
        };
        let link = match *scenario.params.link() {
            LinkFunction::Linear { nu } => LinkSpec::Linear { nu },
            LinkFunction::SaturatingExp { nu, cap } => LinkSpec::SaturatingExp { nu, cap },
            LinkFunction::Tanh { nu, amplitude } => LinkSpec::Tanh { nu, amplitude },
        };
        Self {
            kernel,
            link,
            u: Some(USpec {
                breakpoints: scenario.u.breakpoints().to_vec(),
                values: scenario.u.values().to_vec(),
            }),
            sim: SimSection {
                seed,
                reps,
                mode: scenario.mode,
                horizon: None,
                burn_in: scenario.burn_in,
            },
            experiment: ExperimentSection {
                name: Some(scenario.name.clone()),
                ..Default::default()
            },
        }
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            h_quad: self.experiment.h_quad.unwrap_or(d.h_quad),
            tol: self.experiment.quad_tol.unwrap_or(d.tol),
        }
    }
}
