//! Synthetic tumor pairs and the size/power harness.
//!
//! A scenario is a marker universe made of independent markers, mutually
//! exclusive blocks and equicorrelated latent-Gaussian blocks, plus a clonality
//! signal and an optional misspecification of the analysis probabilities.

mod generate;
mod harness;
mod perturb;
mod presets;
mod quantile;

pub use generate::{sample_latent_block, sample_tumor_pair, SampledPair, Universe};
pub use harness::{run_size_power, run_size_power_with, HarnessOptions, PowerReport, UnconditionalPower};
pub use perturb::{inflate_rare, inv_logit, logit, perturb_probabilities_logit, shift_logit};
pub use presets::{preset_scenario, Base, Preset, PRESET_FORMS};
pub use quantile::{normal_cdf, normal_quantile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Independent,
    /// At most one marker of the block is mutated per tumor.
    ExclusiveBlock,
    /// Markers dichotomized from equicorrelated latent normals.
    EquicorrelatedBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerGroup {
    pub kind: GroupKind,
    pub n_markers: usize,
    /// Marginal mutation probability of every marker in the group.
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl MarkerGroup {
    pub fn independent(n_markers: usize, p: f64) -> Self {
        Self {
            kind: GroupKind::Independent,
            n_markers,
            p,
            rho: None,
        }
    }

    pub fn exclusive(n_markers: usize, p: f64) -> Self {
        Self {
            kind: GroupKind::ExclusiveBlock,
            n_markers,
            p,
            rho: None,
        }
    }

    pub fn equicorrelated(n_markers: usize, p: f64, rho: f64) -> Self {
        Self {
            kind: GroupKind::EquicorrelatedBlock,
            n_markers,
            p,
            rho: Some(rho),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidScenario(format!(
                "group probability {} outside (0, 1)",
                self.p
            )));
        }
        match self.kind {
            GroupKind::Independent => {}
            GroupKind::ExclusiveBlock => {
                if self.n_markers as f64 * self.p > 1.0 + 1e-12 {
                    return Err(Error::InvalidScenario(format!(
                        "exclusive block of {} markers at p = {} has total mass above 1",
                        self.n_markers, self.p
                    )));
                }
            }
            GroupKind::EquicorrelatedBlock => match self.rho {
                Some(rho) if (0.0..1.0).contains(&rho) => {}
                other => {
                    return Err(Error::InvalidScenario(format!(
                        "equicorrelated block needs rho in [0, 1), got {other:?}"
                    )))
                }
            },
        }
        Ok(())
    }
}

/// How the analysis probabilities differ from the generating ones.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    #[default]
    None,
    LogitNoise {
        sigma: f64,
    },
    RareInflation {
        factor: f64,
        threshold: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub groups: Vec<MarkerGroup>,
    pub xi: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
    pub replicates: usize,
    /// Null draws per Monte Carlo test.
    pub sims: usize,
    pub alpha: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidScenario("no marker groups".into()));
        }
        for g in &self.groups {
            g.validate()?;
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::SignalDomain(self.xi));
        }
        match self.perturbation {
            Perturbation::None => {}
            Perturbation::LogitNoise { sigma } if sigma > 0.0 && sigma.is_finite() => {}
            Perturbation::RareInflation { factor, threshold } if factor > 1.0 && threshold > 0.0 => {}
            other => return Err(Error::InvalidScenario(format!("invalid perturbation {other:?}"))),
        }
        if self.replicates == 0 || self.sims == 0 {
            return Err(Error::InvalidScenario("replicates and sims must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidScenario(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }

    pub fn n_markers(&self) -> usize {
        self.groups.iter().map(|g| g.n_markers).sum()
    }

    /// Expected mutations per tumor, `sum p`.
    pub fn expected_mutations(&self) -> f64 {
        self.groups.iter().map(|g| g.n_markers as f64 * g.p).sum()
    }

    /// Expected matches for independent markers, `xi sum p + (1 - xi) sum p^2`.
    pub fn expected_matches_independent(&self) -> f64 {
        let sum_p = self.expected_mutations();
        let sum_p2: f64 = self.groups.iter().map(|g| g.n_markers as f64 * g.p * g.p).sum();
        self.xi * sum_p + (1.0 - self.xi) * sum_p2
    }

    pub fn with_xi(&self, xi: f64) -> Self {
        Self { xi, ..self.clone() }
    }
}
