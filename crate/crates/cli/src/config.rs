//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use packlab::input::{Aabb, Region};
use packlab::nn::ProbeConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Pack,
    Correlate,
    Clt,
    Boundary,
    Cones,
    Nn,
    Oracle,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pack" => Self::Pack,
            "correlate" => Self::Correlate,
            "clt" => Self::Clt,
            "boundary" => Self::Boundary,
            "cones" => Self::Cones,
            "nn" => Self::Nn,
            "oracle" => Self::Oracle,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstrateKind {
    #[default]
    Continuum,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Infinite,
    Finite,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    #[default]
    Sequential,
    Desorption,
    BirthGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSpec {
    pub fn unit(d: usize) -> Self {
        BoxSpec { lower: vec![0.0; d], upper: vec![1.0; d] }
    }

    pub fn to_aabb(&self) -> Result<Aabb<f64>> {
        Aabb::new(&self.lower, &self.upper).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Knobs of the individual experiments; each has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorOptions {
    pub rule: RuleKind,
    pub lifetime_rate: f64,
    pub growth_speed: f64,
    pub initial_radius: f64,

    pub t_grid: Vec<f64>,
    pub window_side: f64,
    pub probes: usize,
    pub bin_edges: Vec<f64>,
    pub separations: Vec<f64>,
    /// Arrival times of the two clustering test points.
    pub cluster_times: [f64; 2],
    pub joint_blocking: bool,
    /// Side of the cubic window used by the pair-correlation estimator.
    pub pair_window: f64,

    /// Covariance constant for the Gaussianity prediction; estimated by the
    /// variance method when absent.
    pub c_estimate: Option<f64>,
    pub c_lambda: Option<f64>,
    pub c_replicates: Option<usize>,
    pub lilliefors_sims: usize,
    pub jitter: Option<bool>,

    pub r_grid: Vec<f64>,
    pub betas: Vec<f64>,

    pub probe: ProbeConfig,

    pub taus: Vec<f64>,
    pub sigma_trials: usize,
    pub box_halfwidth: f64,
    pub margin: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            rule: RuleKind::Sequential,
            lifetime_rate: 0.0,
            growth_speed: 1.0,
            initial_radius: 2.0,
            t_grid: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            window_side: 1000.0,
            probes: 4000,
            bin_edges: (0..=24).map(|i| i as f64 * 0.5).collect(),
            separations: vec![4.0, 6.0, 8.0, 10.0, 12.0],
            cluster_times: [0.5, 0.5],
            joint_blocking: true,
            pair_window: 200.0,
            c_estimate: None,
            c_lambda: None,
            c_replicates: None,
            lilliefors_sims: 400,
            jitter: None,
            r_grid: (2..=10).map(f64::from).collect(),
            betas: Vec::new(),
            probe: ProbeConfig::default(),
            taus: vec![1.0],
            sigma_trials: 0,
            box_halfwidth: 5.0,
            margin: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub substrate: SubstrateKind,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub mode: ModeKind,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    /// The house `A` of finite-volume runs, or the window of `pack`.
    #[serde(default)]
    pub house: Vec<BoxSpec>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub options: EstimatorOptions,
}

fn default_dim() -> usize {
    1
}
fn default_tau() -> f64 {
    1.0
}
fn default_replicates() -> usize {
    100
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            dim: 1,
            substrate: SubstrateKind::Continuum,
            tau: 1.0,
            mode: ModeKind::Infinite,
            lambdas: Vec::new(),
            boxes: Vec::new(),
            house: Vec::new(),
            replicates: default_replicates(),
            seed: 0,
            out: None,
            options: EstimatorOptions::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn box_list(&self) -> Result<Vec<Aabb<f64>>> {
        self.boxes.iter().map(BoxSpec::to_aabb).collect()
    }

    /// The house, defaulting to the unit cube.
    pub fn house_region(&self) -> Result<Region<f64>> {
        let boxes = if self.house.is_empty() { vec![BoxSpec::unit(self.dim)] } else { self.house.clone() };
        let b = boxes.iter().map(BoxSpec::to_aabb).collect::<Result<Vec<_>>>()?;
        Region::new(b).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Range checks that do not depend on the experiment's internals.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if !(1..=3).contains(&self.dim) {
            return bad("dim must be 1, 2 or 3");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau must be positive and finite");
        }
        if self.replicates == 0 {
            return bad("replicates must be positive");
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("lambdas must be positive");
        }
        for b in self.boxes.iter().chain(&self.house) {
            if b.lower.len() != self.dim || b.upper.len() != self.dim {
                return bad("box dimension differs from dim");
            }
            b.to_aabb()?;
        }
        let o = &self.options;
        if o.t_grid.iter().any(|t| !(*t >= 0.0)) || o.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t_grid must be ascending and nonnegative");
        }
        if o.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("r_grid must be ascending");
        }
        if o.betas.iter().any(|b| !(*b > 0.0)) {
            return bad("betas must be positive");
        }
        if o.lifetime_rate < 0.0 || !(o.growth_speed > 0.0) || o.initial_radius < 0.0 {
            return bad("rule parameters out of range");
        }
        if self.substrate == SubstrateKind::Lattice
            && !matches!(self.experiment, ExperimentKind::Pack | ExperimentKind::Correlate | ExperimentKind::Clt)
        {
            return bad("lattice substrate is supported by pack, correlate and clt only");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "clt"
dim = 1
tau = 1.0
mode = "both"
lambdas = [64.0]
replicates = 1000
seed = 7

[[boxes]]
lower = [0.0]
upper = [1.0]

[[boxes]]
lower = [0.5]
upper = [1.5]

[options]
c_estimate = 0.05
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Clt);
        assert_eq!(c.mode, ModeKind::Both);
        assert_eq!(c.boxes.len(), 2);
        assert_eq!(c.options.c_estimate, Some(0.05));
        assert_eq!(c.options.lilliefors_sims, 400);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"pack\"\nbogus = 1").is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::Pack);
        c.replicates = 0;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = ExperimentConfig::new(ExperimentKind::Pack);
        c.boxes.push(BoxSpec { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0] });
        assert!(c.validate().is_err());
    }
}
