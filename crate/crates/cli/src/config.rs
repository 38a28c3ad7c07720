//! JSON experiment configuration: schema-validated on load, echoed
//! verbatim into the run manifest. All randomness flows from the
//! `master_seed` key; a missing key is an error, never an implicit seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use planarmatch::bipartite::{read_matrix_csv, MatrixKind};
use planarmatch::{EdgeProbabilityModel, Error, Result, WeightDistribution};

fn default_slack() -> f64 {
    3.0
}

fn default_stability() -> f64 {
    2.0
}

fn default_slope_tolerance() -> f64 {
    0.4
}

/// Edge-state model as written in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatesSpec {
    Homogeneous { p: f64 },
    DistanceDecay { c: f64 },
    /// Path to a `kind=probs` matrix file.
    Matrix { path: PathBuf },
}

impl StatesSpec {
    pub fn resolve(&self, n: usize) -> Result<EdgeProbabilityModel> {
        match self {
            StatesSpec::Homogeneous { p } => EdgeProbabilityModel::homogeneous(n, *p),
            StatesSpec::DistanceDecay { c } => EdgeProbabilityModel::distance_decay(n, *c),
            StatesSpec::Matrix { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
                let (file_n, kind, values) = read_matrix_csv(file)?;
                if kind != MatrixKind::Probs {
                    return Err(Error::Format(format!(
                        "{} must declare kind=probs",
                        path.display()
                    )));
                }
                if file_n != n {
                    return Err(Error::Format(format!(
                        "{} has n={file_n} but the experiment needs n={n}",
                        path.display()
                    )));
                }
                EdgeProbabilityModel::matrix(n, values)
            }
        }
    }
}

/// Edge-count constraint rule for size grids.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauRule {
    Count { count: usize },
    Fraction { fraction: f64 },
}

impl TauRule {
    pub fn tau_for(&self, n: usize) -> usize {
        match self {
            TauRule::Count { count } => *count,
            TauRule::Fraction { fraction } => {
                planarmatch::experiments::tau_for_fraction(*fraction, n)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperaddPair {
    pub n1: usize,
    pub n2: usize,
    pub rho1: f64,
    pub rho2: f64,
}

/// One experiment description. The `experiment` tag selects the study; the
/// remaining keys parametrize it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExperimentConfig {
    Theorem21 {
        n: usize,
        #[serde(rename = "L")]
        length_cap: usize,
        states: StatesSpec,
        trials: usize,
        master_seed: u64,
        #[serde(default = "default_slack")]
        slack_sigma: f64,
        /// Also run the per-trial stable-set and degree-cap checks.
        #[serde(default)]
        check_conflict_bounds: bool,
    },
    Theorem31 {
        n_grid: Vec<usize>,
        tau: TauRule,
        weights: WeightDistribution,
        trials: usize,
        master_seed: u64,
        #[serde(default = "default_stability")]
        stability_factor: f64,
    },
    Theta {
        rho_grid: Vec<f64>,
        n_grid: Vec<usize>,
        weights: WeightDistribution,
        trials: usize,
        master_seed: u64,
        #[serde(default = "default_slack")]
        slack_sigma: f64,
    },
    Appendix {
        n: usize,
        states: StatesSpec,
        trials: usize,
        master_seed: u64,
        #[serde(default = "default_slack")]
        slack_sigma: f64,
    },
    Chernoff {
        r_grid: Vec<u64>,
        p_grid: Vec<f64>,
        gamma_grid: Vec<f64>,
        /// Only used when some `r` exceeds the exact-summation limit.
        #[serde(default)]
        trials: usize,
        master_seed: u64,
    },
    Saturation {
        n: usize,
        tau_grid: Vec<usize>,
        weights: WeightDistribution,
        trials: usize,
        master_seed: u64,
        #[serde(default = "default_slope_tolerance")]
        slope_tolerance: f64,
        #[serde(default)]
        min_edge_r_grid: Vec<usize>,
        #[serde(default)]
        min_edge_trials: usize,
        #[serde(default = "default_slack")]
        slack_sigma: f64,
    },
    Superadd {
        weights: WeightDistribution,
        trials: usize,
        master_seed: u64,
        #[serde(default)]
        random_configs: usize,
        #[serde(default = "default_superadd_n_min")]
        n_min: usize,
        #[serde(default = "default_superadd_n_max")]
        n_max: usize,
        #[serde(default = "default_superadd_rho_min")]
        rho_min: f64,
        #[serde(default = "default_superadd_rho_max")]
        rho_max: f64,
        #[serde(default)]
        pairs: Vec<SuperaddPair>,
        #[serde(default = "default_slack")]
        slack_sigma: f64,
    },
}

fn default_superadd_n_min() -> usize {
    20
}

fn default_superadd_n_max() -> usize {
    60
}

fn default_superadd_rho_min() -> f64 {
    0.2
}

fn default_superadd_rho_max() -> f64 {
    0.9
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("bad config: {e}")))
    }

    pub fn trials(&self) -> usize {
        match self {
            ExperimentConfig::Theorem21 { trials, .. }
            | ExperimentConfig::Theorem31 { trials, .. }
            | ExperimentConfig::Theta { trials, .. }
            | ExperimentConfig::Appendix { trials, .. }
            | ExperimentConfig::Chernoff { trials, .. }
            | ExperimentConfig::Saturation { trials, .. }
            | ExperimentConfig::Superadd { trials, .. } => *trials,
        }
    }
}
