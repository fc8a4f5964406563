//! Synthetic benchmark graphs with a known heaviest clique.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{enumerate_cliques, VertexSet, WeightedGraph};
use crate::samplers::worker_rng;

/// Attempts (each with its own sub-seed) before the generator gives up.
pub const MAX_ATTEMPTS: u64 = 100;

/// How vertex weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightProfile {
    /// Planted clique: all but two members heavy, two light. Other vertices
    /// moderate.
    HeavyCore,
    /// Every vertex carries the same light weight.
    UniformLight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedParams {
    pub n: usize,
    pub clique_size: usize,
    /// Background edge probability.
    pub edge_density: f64,
    pub weight_profile: WeightProfile,
    /// Extra cliques of `clique_size` forced into the graph, each on a
    /// uniformly random vertex subset.
    pub decoys: usize,
    /// Required margin between the planted clique and any other clique.
    pub min_gap: f64,
    pub seed: u64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            n: 24,
            clique_size: 8,
            edge_density: 0.05,
            weight_profile: WeightProfile::HeavyCore,
            decoys: 4,
            min_gap: 0.05,
            seed: 1,
        }
    }
}

// weight ranges of the heavy-core profile
const CORE_WEIGHTS: (f64, f64) = (0.55, 0.72);
const LIGHT_WEIGHTS: (f64, f64) = (0.05, 0.2);
const BACKGROUND_WEIGHTS: (f64, f64) = (0.0, 0.55);
const DECOY_WEIGHTS: (f64, f64) = (0.0, 0.3);
const LIGHT_MEMBERS: usize = 2;
const UNIFORM_LIGHT_WEIGHT: f64 = 0.1;

/// A graph whose unique maximum-weight clique is `planted_clique`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub graph: WeightedGraph,
    pub planted_clique: VertexSet,
    pub params: PlantedParams,
    /// Sub-seed index of the accepted attempt.
    pub attempt: u64,
    /// Weight of the heaviest clique other than the planted one.
    pub runner_up_weight: f64,
}

impl PlantedInstance {
    pub fn planted_weight(&self) -> f64 {
        self.planted_clique.iter().map(|v| self.graph.weight(v)).sum()
    }
}

/// Draws instances until the clique-enumeration oracle confirms the planted
/// clique beats every other clique by at least `min_gap`.
pub fn generate_planted_instance(params: &PlantedParams) -> Result<PlantedInstance> {
    let p = params;
    if p.n == 0 || p.n > crate::graphs::BRUTEFORCE_MAX_VERTICES {
        return Err(Error::invalid(format!(
            "planted instance size {} outside 1..={}",
            p.n,
            crate::graphs::BRUTEFORCE_MAX_VERTICES
        )));
    }
    if p.clique_size == 0 || p.clique_size > p.n {
        return Err(Error::invalid(format!(
            "clique size {} outside 1..={}",
            p.clique_size, p.n
        )));
    }
    if !(0.0..1.0).contains(&p.edge_density) {
        return Err(Error::invalid(format!("edge density {} outside [0, 1)", p.edge_density)));
    }
    if !(p.min_gap >= 0.0 && p.min_gap.is_finite()) {
        return Err(Error::invalid(format!("uniqueness gap {} is negative", p.min_gap)));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = worker_rng(p.seed, attempt);
        let (graph, planted) = draw(p, &mut rng)?;
        let planted_w: f64 = planted.iter().map(|v| graph.weight(v)).sum();
        let runner_up = enumerate_cliques(&graph)?
            .into_iter()
            .filter(|(c, _)| *c != planted)
            .map(|(_, w)| w)
            .fold(0.0, f64::max);
        if planted_w - runner_up >= p.min_gap && planted_w > runner_up {
            return Ok(PlantedInstance {
                graph,
                planted_clique: planted,
                params: p.clone(),
                attempt,
                runner_up_weight: runner_up,
            });
        }
    }
    Err(Error::Degenerate(format!(
        "no instance with a unique heaviest clique in {MAX_ATTEMPTS} attempts"
    )))
}

fn draw(p: &PlantedParams, rng: &mut impl Rng) -> Result<(WeightedGraph, VertexSet)> {
    let n = p.n;
    let k = p.clique_size;
    let planted = VertexSet::new(index::sample(rng, n, k));
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let e = rng.random::<f64>() < p.edge_density;
            adj[i * n + j] = e;
            adj[j * n + i] = e;
        }
    }
    let mut force = |set: &[usize]| {
        for &a in set {
            for &b in set {
                if a != b {
                    adj[a * n + b] = true;
                }
            }
        }
    };
    force(planted.members());
    let mut in_decoy = vec![false; n];
    for _ in 0..p.decoys {
        let d: Vec<usize> = index::sample(rng, n, k).into_vec();
        force(&d);
        for &v in &d {
            in_decoy[v] = true;
        }
    }
    let weights = match p.weight_profile {
        WeightProfile::UniformLight => vec![UNIFORM_LIGHT_WEIGHT; n],
        WeightProfile::HeavyCore => {
            // light members are the last ones of a random order of the clique
            let order = index::sample(rng, k, k).into_vec();
            let mut w = vec![0.0; n];
            for v in 0..n {
                let range = if in_decoy[v] { DECOY_WEIGHTS } else { BACKGROUND_WEIGHTS };
                w[v] = uniform(rng, range);
            }
            for (rank, &i) in order.iter().enumerate() {
                let range = if rank + LIGHT_MEMBERS >= k { LIGHT_WEIGHTS } else { CORE_WEIGHTS };
                w[planted.members()[i]] = uniform(rng, range);
            }
            w
        }
    };
    let graph = WeightedGraph::from_fn(weights, |i, j| adj[i * n + j])?;
    Ok((graph, planted))
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
