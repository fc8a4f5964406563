//! Clique heuristics seeded by click patterns: random search (keep the
//! samples that already are cliques), greedy shrinking, and shrinking
//! followed by grow/swap local search.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{max_weighted_clique_bruteforce, VertexSet, WeightedGraph};
use crate::samplers::SampleBatch;

/// Added to every weight in weight-proportional draws so zero weights stay
/// selectable.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// Weights within this distance of the optimum count as optimal.
pub const SUCCESS_TOL: f64 = 1e-9;

/// Removes one vertex at a time until a clique remains. The removed vertex
/// is drawn uniformly among the lightest of the minimum-degree vertices of
/// the current induced subgraph.
pub fn greedy_shrink<R: Rng + ?Sized>(g: &WeightedGraph, s: &VertexSet, rng: &mut R) -> Result<VertexSet> {
    g.check(s)?;
    let mut members: Vec<usize> = s.members().to_vec();
    let mut degree: Vec<usize> = members
        .iter()
        .map(|&v| members.iter().filter(|&&u| g.has_edge(u, v)).count())
        .collect();
    loop {
        let h = members.len();
        if h <= 1 || degree.iter().all(|&d| d + 1 == h) {
            return Ok(VertexSet::new(members));
        }
        let dmin = *degree.iter().min().unwrap_or(&0);
        let wmin = (0..h)
            .filter(|&i| degree[i] == dmin)
            .map(|i| g.weight(members[i]))
            .fold(f64::INFINITY, f64::min);
        let ties: Vec<usize> = (0..h)
            .filter(|&i| degree[i] == dmin && g.weight(members[i]) == wmin)
            .collect();
        let out = ties[rng.random_range(0..ties.len())];
        let v = members.swap_remove(out);
        degree.swap_remove(out);
        for (i, &u) in members.iter().enumerate() {
            if g.has_edge(u, v) {
                degree[i] -= 1;
            }
        }
    }
}

fn pick_weighted<R: Rng + ?Sized>(g: &WeightedGraph, candidates: &[usize], rng: &mut R) -> usize {
    let dist = WeightedIndex::new(candidates.iter().map(|&v| g.weight(v) + WEIGHT_FLOOR))
        .expect("candidate weights are finite and positive");
    candidates[dist.sample(rng)]
}

/// Cliques visited by grow/swap local search from `start`, starting with
/// `start` itself and with one entry per step taken.
///
/// A step grows the clique by a common neighbour of all members, chosen with
/// probability proportional to weight. When no such vertex exists it swaps
/// in a vertex adjacent to all members but one, preferring candidates at
/// least as heavy as the member they replace (weight-proportional among
/// those, uniform otherwise). The search stops after `max_steps` steps or
/// when neither move exists.
pub fn local_search_trajectory<R: Rng + ?Sized>(
    g: &WeightedGraph,
    start: &VertexSet,
    max_steps: usize,
    rng: &mut R,
) -> Result<Vec<VertexSet>> {
    if !g.is_clique(start)? {
        return Err(Error::invalid("local search must start from a clique"));
    }
    let n = g.n();
    let mut clique: Vec<usize> = start.members().to_vec();
    let mut path = vec![start.clone()];
    for _ in 0..max_steps {
        let mut in_clique = vec![false; n];
        for &v in &clique {
            in_clique[v] = true;
        }
        let mut grow = Vec::new();
        // (candidate, the single member it is not adjacent to)
        let mut swaps = Vec::new();
        for v in (0..n).filter(|&v| !in_clique[v]) {
            let mut missing = clique.iter().filter(|&&u| !g.has_edge(u, v));
            match (missing.next(), missing.next()) {
                (None, _) => grow.push(v),
                (Some(&u), None) => swaps.push((v, u)),
                _ => {}
            }
        }
        if !grow.is_empty() {
            clique.push(pick_weighted(g, &grow, rng));
        } else if !swaps.is_empty() {
            let uphill: Vec<usize> = swaps
                .iter()
                .filter(|(v, u)| g.weight(*v) >= g.weight(*u))
                .map(|(v, _)| *v)
                .collect();
            let v = if uphill.is_empty() {
                swaps[rng.random_range(0..swaps.len())].0
            } else {
                pick_weighted(g, &uphill, rng)
            };
            let u = swaps.iter().find(|(c, _)| *c == v).map(|(_, u)| *u).unwrap_or(v);
            clique.retain(|&x| x != u);
            clique.push(v);
        } else {
            break;
        }
        path.push(VertexSet::new(clique.iter().copied()));
    }
    Ok(path)
}

/// Final clique of [`local_search_trajectory`] and the number of steps taken.
pub fn local_search<R: Rng + ?Sized>(
    g: &WeightedGraph,
    start: &VertexSet,
    max_steps: usize,
    rng: &mut R,
) -> Result<(VertexSet, usize)> {
    let mut path = local_search_trajectory(g, start, max_steps, rng)?;
    let steps = path.len() - 1;
    Ok((path.pop().unwrap_or_default(), steps))
}

/// Outcome of one sample in a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub initial_size: usize,
    /// Clique after shrinking; for random search the sample itself, if a clique.
    pub clique: Option<VertexSet>,
    pub clique_weight: f64,
    /// Heaviest clique seen during local search (the shrunk clique when none ran).
    pub best_clique: Option<VertexSet>,
    pub best_weight: f64,
    pub steps_used: usize,
    /// Fewest local-search steps after which the optimum had been seen.
    pub first_success: Option<usize>,
}

/// Number of cliques found at one (size, weight) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub size: usize,
    pub weight: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_clique: VertexSet,
    pub best_weight: f64,
    pub optimum_weight: f64,
    pub total_samples: usize,
    /// Samples with at least one click.
    pub usable_samples: usize,
    /// One record per usable sample.
    pub records: Vec<SampleRecord>,
    /// `success_curve[k]`: fraction of usable samples that reached the
    /// optimum within `k` local-search steps.
    pub success_curve: Vec<f64>,
    pub success_counts: Vec<usize>,
}

impl SolveResult {
    fn assemble(records: Vec<SampleRecord>, total: usize, optimum: f64, max_steps: usize) -> Self {
        let usable = records.len();
        let mut success_counts = vec![0usize; max_steps + 1];
        for r in &records {
            if let Some(k) = r.first_success {
                for c in &mut success_counts[k.min(max_steps)..] {
                    *c += 1;
                }
            }
        }
        let success_curve = success_counts
            .iter()
            .map(|&c| if usable == 0 { 0.0 } else { c as f64 / usable as f64 })
            .collect();
        let (best_clique, best_weight) = records
            .iter()
            .filter_map(|r| r.best_clique.as_ref().map(|c| (c, r.best_weight)))
            .fold((VertexSet::empty(), 0.0), |acc, (c, w)| {
                if w > acc.1 {
                    (c.clone(), w)
                } else {
                    acc
                }
            });
        SolveResult {
            best_clique,
            best_weight,
            optimum_weight: optimum,
            total_samples: total,
            usable_samples: usable,
            records,
            success_curve,
            success_counts,
        }
    }

    /// Number of usable samples that produced a clique.
    pub fn clique_count(&self) -> usize {
        self.records.iter().filter(|r| r.clique.is_some()).count()
    }

    /// Cliques (after shrinking, before local search) grouped by size and
    /// weight, ordered by size then weight.
    pub fn histogram(&self) -> Vec<HistogramBin> {
        let mut bins: BTreeMap<(usize, i64), (f64, usize)> = BTreeMap::new();
        for r in &self.records {
            if let Some(c) = &r.clique {
                let key = (c.len(), (r.clique_weight * 1e9).round() as i64);
                bins.entry(key).or_insert((r.clique_weight, 0)).1 += 1;
            }
        }
        bins.into_iter()
            .map(|((size, _), (weight, count))| HistogramBin { size, weight, count })
            .collect()
    }
}

fn check_batch(g: &WeightedGraph, batch: &SampleBatch) -> Result<()> {
    if batch.modes != g.n() {
        return Err(Error::invalid(format!(
            "{}-mode samples for a {}-vertex graph",
            batch.modes,
            g.n()
        )));
    }
    Ok(())
}

fn optimum_weight(g: &WeightedGraph) -> Result<f64> {
    let best = max_weighted_clique_bruteforce(g)?;
    g.clique_weight(&best)
}

/// Keeps the non-empty samples that already are cliques.
pub fn random_search(g: &WeightedGraph, batch: &SampleBatch) -> Result<SolveResult> {
    check_batch(g, batch)?;
    let optimum = optimum_weight(g)?;
    let records = batch
        .patterns
        .iter()
        .enumerate()
        .filter(|(_, p)| p.count() > 0)
        .map(|(i, p)| {
            let s = VertexSet::from_pattern(p.clicks());
            let is_clique = g.is_clique_unchecked(s.members());
            let w = if is_clique { g.clique_weight(&s)? } else { 0.0 };
            let clique = is_clique.then_some(s);
            Ok(SampleRecord {
                sample: i,
                initial_size: p.count(),
                clique: clique.clone(),
                clique_weight: w,
                best_clique: clique,
                best_weight: w,
                steps_used: 0,
                first_success: (is_clique && w >= optimum - SUCCESS_TOL).then_some(0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveResult::assemble(records, batch.len(), optimum, 0))
}

/// Greedy shrinking of every non-empty sample followed by up to `max_steps`
/// local-search steps. Sample `i` draws from stream `i` of a generator
/// seeded with `seed`.
pub fn hybrid_pipeline(g: &WeightedGraph, batch: &SampleBatch, max_steps: usize, seed: u64) -> Result<SolveResult> {
    check_batch(g, batch)?;
    let optimum = optimum_weight(g)?;
    let records = batch
        .patterns
        .par_iter()
        .enumerate()
        .filter(|(_, p)| p.count() > 0)
        .map(|(i, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let s = VertexSet::from_pattern(p.clicks());
            let shrunk = greedy_shrink(g, &s, &mut rng)?;
            let w0 = g.clique_weight(&shrunk)?;
            let path = local_search_trajectory(g, &shrunk, max_steps, &mut rng)?;
            let mut best = (shrunk.clone(), w0);
            let mut first_success = None;
            for (k, c) in path.iter().enumerate() {
                let w = g.clique_weight(c)?;
                if w > best.1 {
                    best = (c.clone(), w);
                }
                if first_success.is_none() && w >= optimum - SUCCESS_TOL {
                    first_success = Some(k);
                }
            }
            Ok(SampleRecord {
                sample: i,
                initial_size: p.count(),
                clique: Some(shrunk),
                clique_weight: w0,
                best_clique: Some(best.0),
                best_weight: best.1,
                steps_used: path.len() - 1,
                first_success,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveResult::assemble(records, batch.len(), optimum, max_steps))
}
