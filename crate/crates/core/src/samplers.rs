//! Click-pattern sources: the exact chain-rule sampler, the fixed-click
//! post-selected sampler, and the moment-matched classical baseline.
//!
//! Batches are produced in fixed-size chunks. Chunk `i` draws from its own
//! generator seeded with `seed + i` and chunks are concatenated in index
//! order, so a batch depends only on its inputs and never on the thread count.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbs::{dark_and_clicked_probability, hafnian, ClickPattern, Encoding, GaussianState};

/// Mode limit of the chain-rule sampler.
pub const CHAIN_MAX_MODES: usize = 30;

/// Largest number of subsets the post-selected sampler enumerates.
pub const POSTSELECT_MAX_SUBSETS: u64 = 10_000_000;

/// Samples per worker chunk.
pub const CHUNK_SIZE: usize = 256;

/// Allowed excursion of a conditional probability outside [0, 1].
const PROB_SLACK: f64 = 1e-9;

/// Generator for worker `index` of a run seeded with `seed`.
pub fn worker_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Gbs,
    GbsPostselected,
    Classical,
}

/// Click patterns of a common length with the seed and settings that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub modes: usize,
    pub seed: u64,
    pub source: SampleSource,
    /// Encoding summary or baseline moments.
    pub provenance: serde_json::Value,
    #[serde(skip)]
    pub patterns: Vec<ClickPattern>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn click_counts(&self) -> Vec<usize> {
        self.patterns.iter().map(ClickPattern::count).collect()
    }

    /// Writes `<stem>.csv` (one `pattern,clicks` row per sample) and
    /// `<stem>.json` (everything but the patterns).
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path)?;
        w.write_record(["pattern", "clicks"])?;
        for p in &self.patterns {
            w.write_record([p.to_bitstring(), p.count().to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
        let json_path = dir.join(format!("{stem}.json"));
        let mut f = File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f).map_err(|e| Error::io(&json_path, e))
    }

    /// Reads a batch written by [`SampleBatch::write`].
    pub fn read(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let json_path = dir.join(format!("{stem}.json"));
        let f = File::open(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let mut batch: SampleBatch = serde_json::from_reader(std::io::BufReader::new(f))?;
        let mut r = csv::Reader::from_path(dir.join(format!("{stem}.csv")))?;
        for rec in r.records() {
            let rec = rec?;
            let p = ClickPattern::from_bitstring(rec.get(0).unwrap_or(""))?;
            if p.len() != batch.modes {
                return Err(Error::invalid(format!(
                    "pattern of length {} in a {}-mode batch",
                    p.len(),
                    batch.modes
                )));
            }
            batch.patterns.push(p);
        }
        Ok(batch)
    }
}

/// Runs `draw` over `count` samples in seeded chunks.
fn chunked<F>(count: usize, seed: u64, draw: F) -> Result<Vec<ClickPattern>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<ClickPattern> + Sync,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<ClickPattern>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = worker_rng(seed, i as u64);
            let len = CHUNK_SIZE.min(count - i * CHUNK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Exact samples of the threshold-detector distribution of `s`.
///
/// Modes are decided in natural order; mode `k` clicks with the probability
/// of its outcome conditioned on modes `0..k`, evaluated on the marginal of
/// modes `0..=k`.
pub fn sample_threshold_chain(s: &GaussianState, count: usize, seed: u64) -> Result<SampleBatch> {
    let m = s.modes();
    if m > CHAIN_MAX_MODES {
        return Err(Error::TooLarge {
            what: "chain-rule sampler modes",
            size: m,
            limit: CHAIN_MAX_MODES,
        });
    }
    let patterns = chunked(count, seed, |rng| draw_chain(s, rng))?;
    Ok(SampleBatch {
        modes: m,
        seed,
        source: SampleSource::Gbs,
        provenance: serde_json::json!({ "sampler": "chain_rule" }),
        patterns,
    })
}

fn draw_chain(s: &GaussianState, rng: &mut impl Rng) -> Result<ClickPattern> {
    let m = s.modes();
    let mut dark = Vec::with_capacity(m);
    let mut clicked = Vec::with_capacity(m);
    let mut prefix = 1.0;
    for k in 0..m {
        dark.push(k);
        let p_dark = dark_and_clicked_probability(s, &dark, &clicked)?;
        let cond = p_dark / prefix;
        if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&cond) {
            return Err(Error::Numerical(format!(
                "conditional no-click probability {cond} at mode {k}"
            )));
        }
        if rng.random::<f64>() < cond {
            prefix = p_dark;
        } else {
            dark.pop();
            clicked.push(k);
            // recomputed rather than subtracted; keeps the conditional exact
            // when the prefix probability is tiny
            prefix = dark_and_clicked_probability(s, &dark, &clicked)?;
        }
        if !(prefix > 0.0) {
            return Err(Error::Numerical(format!(
                "sampled prefix has probability {prefix} at mode {k}"
            )));
        }
    }
    let mut bits = vec![false; m];
    for k in clicked {
        bits[k] = true;
    }
    Ok(ClickPattern::new(bits))
}

/// Number of `k`-subsets of `n` items, saturating.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n as u128 - i as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Bitmasks of all `k`-subsets of `0..n` in increasing numeric order.
fn fixed_size_masks(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let limit = 1u64 << n;
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut v = (1u64 << k) - 1;
    while v < limit {
        out.push(v);
        // next mask with the same popcount
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Unnormalized weight `(prod_{i in S} omega_i * Haf(A_S))^2` of every
/// `n_clicks`-subset, keyed by bitmask. The adjacency `A` is read off the
/// support of `B`'s off-diagonal. Odd subsets weigh zero.
pub fn postselection_weights(e: &Encoding, n_clicks: usize) -> Result<Vec<(u64, f64)>> {
    let m = e.modes();
    if m > 63 || binomial(m, n_clicks) > POSTSELECT_MAX_SUBSETS {
        return Err(Error::TooLarge {
            what: "post-selection subsets",
            size: binomial(m, n_clicks).min(usize::MAX as u64) as usize,
            limit: POSTSELECT_MAX_SUBSETS as usize,
        });
    }
    let b = e.b_matrix();
    let omega = e.omega();
    fixed_size_masks(m, n_clicks)
        .into_par_iter()
        .map(|mask| {
            let idx: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).collect();
            let adj = DMatrix::from_fn(idx.len(), idx.len(), |a, c| {
                if a != c && b[(idx[a], idx[c])] != 0.0 {
                    1.0
                } else {
                    0.0
                }
            });
            // odd subsets have no perfect matching
            let haf = if idx.len() % 2 == 1 { 0.0 } else { hafnian(&adj)? };
            let scale: f64 = idx.iter().map(|&j| omega[j]).product();
            Ok((mask, (scale * haf).powi(2)))
        })
        .collect()
}

/// Samples conditioned on exactly `n_clicks` clicks, drawn from the
/// collision-free weights of [`postselection_weights`].
pub fn sample_postselected(e: &Encoding, n_clicks: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    let m = e.modes();
    let weights = postselection_weights(e, n_clicks)?;
    let mut cdf = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for &(_, w) in &weights {
        total += w;
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!(
            "every {n_clicks}-subset has zero weight"
        )));
    }
    let patterns = chunked(count, seed, |rng| {
        let u = rng.random::<f64>() * total;
        let i = cdf.partition_point(|&c| c <= u).min(weights.len() - 1);
        Ok(ClickPattern::from_bits(weights[i].0, m))
    })?;
    Ok(SampleBatch {
        modes: m,
        seed,
        source: SampleSource::GbsPostselected,
        provenance: serde_json::json!({
            "sampler": "postselected",
            "n_clicks": n_clicks,
            "encoding": e.summary(),
        }),
        patterns,
    })
}

/// Uniform random subsets whose sizes follow a rounded, clamped normal law
/// with the given mean and variance. Zero variance fixes the size at the
/// rounded mean.
pub fn classical_baseline(m: usize, mean_n: f64, var_n: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    if !(mean_n.is_finite() && var_n.is_finite() && var_n >= 0.0) {
        return Err(Error::invalid(format!(
            "baseline moments ({mean_n}, {var_n}) must be finite with variance >= 0"
        )));
    }
    let normal = Normal::new(mean_n, var_n.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let patterns = chunked(count, seed, |rng| {
        let size = normal.sample(rng).round().clamp(0.0, m as f64) as usize;
        let mut bits = vec![false; m];
        for j in index::sample(rng, m, size) {
            bits[j] = true;
        }
        Ok(ClickPattern::new(bits))
    })?;
    Ok(SampleBatch {
        modes: m,
        seed,
        source: SampleSource::Classical,
        provenance: serde_json::json!({ "mean_n": mean_n, "var_n": var_n }),
        patterns,
    })
}

/// Sample mean and unbiased sample variance of the click counts. A single
/// sample has variance 0.
pub fn estimate_moments(batch: &SampleBatch) -> Result<(f64, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("sample batch"));
    }
    let counts = batch.click_counts();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    if counts.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
    Ok((mean, ss / (n - 1.0)))
}
