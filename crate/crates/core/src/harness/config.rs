use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::planted::{generate_planted_instance, PlantedParams};
use crate::docking::{
    build_binding_interaction_graph, build_labeled_distance_graph, PharmacophoreFile, PotentialTable,
    DEFAULT_EPSILON, DEFAULT_TAU,
};
use crate::error::{Error, Result};
use crate::graphs::{VertexSet, WeightedGraph};

/// Where the benchmark graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    Synthetic(PlantedParams),
    GraphJson {
        path: PathBuf,
    },
    Pharmacophore {
        ligand: PathBuf,
        receptor: PathBuf,
        /// Potential table CSV; the shipped table when absent.
        #[serde(default)]
        potential: Option<PathBuf>,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Every knob of a benchmark run. Missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    /// Weight coupling in `Omega = c (1 + alpha w)`.
    pub alpha: f64,
    /// Mean click count the encoding is tuned to.
    pub target_clicks: f64,
    /// Transmissivity of the noisy arm of the noise study.
    pub eta: f64,
    /// Click count of post-selected random-search samples.
    pub postselect_clicks: usize,
    /// Samples per source for random search.
    pub random_search_samples: usize,
    /// Samples per source for shrinking and local search.
    pub solver_samples: usize,
    /// GBS samples used to estimate the classical baseline's moments.
    pub pilot_samples: usize,
    /// Local-search steps after shrinking.
    pub max_steps: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instance: InstanceSource::Synthetic(PlantedParams::default()),
            alpha: 1.0,
            target_clicks: 8.0,
            eta: 0.8,
            postselect_clicks: 8,
            random_search_samples: 100_000,
            solver_samples: 10_000,
            pilot_samples: 10_000,
            max_steps: 20,
            seed: 1,
            out_dir: PathBuf::from("results"),
        }
    }
}

/// A loaded benchmark graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: WeightedGraph,
    /// Known optimum for synthetic instances.
    pub planted: Option<VertexSet>,
}

impl ExperimentConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::from_json(&text)
    }

    /// Accepts a bare config or a run summary carrying one under `"config"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let cfg = match value.get("config") {
            Some(inner) if value.get("config_hash").is_some() => serde_json::from_value(inner.clone())?,
            _ => serde_json::from_value(value)?,
        };
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form with the output directory blanked,
    /// so moving a run does not change its identity.
    pub fn hash(&self) -> String {
        let key = ExperimentConfig {
            out_dir: PathBuf::new(),
            ..self.clone()
        };
        let compact = serde_json::to_string(&key).expect("config serializes");
        Sha256::digest(compact.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha {} must be finite and non-negative", self.alpha));
        }
        if !(self.target_clicks > 0.0 && self.target_clicks.is_finite()) {
            return bad(format!("target clicks {} must be positive", self.target_clicks));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("transmissivity {} outside (0, 1]", self.eta));
        }
        if self.random_search_samples == 0 || self.solver_samples == 0 || self.pilot_samples == 0 {
            return bad("sample counts must be positive".into());
        }
        Ok(())
    }

    /// Seed of an independent stream for one named stage of the run.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }

    pub fn load_instance(&self) -> Result<Instance> {
        match &self.instance {
            InstanceSource::Synthetic(params) => {
                let inst = generate_planted_instance(params)?;
                Ok(Instance {
                    graph: inst.graph,
                    planted: Some(inst.planted_clique),
                })
            }
            InstanceSource::GraphJson { path } => Ok(Instance {
                graph: WeightedGraph::read_json(path)?,
                planted: None,
            }),
            InstanceSource::Pharmacophore {
                ligand,
                receptor,
                potential,
                tau,
                epsilon,
            } => {
                let kappa = match potential {
                    Some(p) => PotentialTable::read_csv(p)?,
                    None => PotentialTable::builtin(),
                };
                let gl = build_labeled_distance_graph(PharmacophoreFile::read(ligand)?.points)?;
                let gb = build_labeled_distance_graph(PharmacophoreFile::read(receptor)?.points)?;
                Ok(Instance {
                    graph: build_binding_interaction_graph(&gl, &gb, &kappa, *tau, *epsilon)?.graph,
                    planted: None,
                })
            }
        }
    }
}

/// First eight bytes (little-endian) of `SHA-256(base || label)`.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}
