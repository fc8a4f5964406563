//! Figure-analogue experiments. Each runner writes `<name>.csv` (plot-ready
//! rows behind a `#` provenance line) and `<name>.json` (config, hash, seed,
//! library version and summary) into the configured output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Instance};
use super::stats::Rate;
use crate::error::{Context, Error, Result};
use crate::gbs::{
    apply_loss, mean_clicks, state_from_encoding, tune_c_for_clicks, Encoding, EncodingSummary,
};
use crate::samplers::{
    classical_baseline, estimate_moments, sample_postselected, sample_threshold_chain, SampleBatch,
};
use crate::solvers::{hybrid_pipeline, random_search, SolveResult};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Histogram bins under this fraction of usable samples are hidden from the
/// plot table of the shrinking experiment.
pub const PLOT_FRACTION_FLOOR: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bench {
    Fig3,
    Fig4,
    Fig56,
    Noise,
}

impl Bench {
    pub fn name(self) -> &'static str {
        match self {
            Bench::Fig3 => "fig3",
            Bench::Fig4 => "fig4",
            Bench::Fig56 => "fig56",
            Bench::Noise => "noise",
        }
    }
}

/// Sampling and solving shared by the shrinking, local-search and noise
/// experiments.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub encoding: Encoding,
    /// Mean click count of the tuned state.
    pub mean_clicks: f64,
    pub pilot: SampleBatch,
    /// Pilot mean and variance of the click count.
    pub moments: (f64, f64),
    pub gbs: SampleBatch,
    pub classical: SampleBatch,
    pub gbs_result: SolveResult,
    pub classical_result: SolveResult,
}

impl Campaign {
    /// Tunes the lossless encoding, runs the pilot, draws both sample sets
    /// and solves them with up to `max_steps` local-search steps.
    pub fn prepare(cfg: &ExperimentConfig, max_steps: usize) -> Result<Self> {
        cfg.validate()?;
        let instance = cfg.load_instance().stage("loading instance")?;
        let g = &instance.graph;
        let encoding = tune_c_for_clicks(g, cfg.alpha, cfg.target_clicks, 1.0).stage("tuning encoding")?;
        let state = state_from_encoding(&encoding)?;
        let n_mean = mean_clicks(&state);
        let pilot = sample_threshold_chain(&state, cfg.pilot_samples, cfg.stage_seed("pilot"))
            .stage("pilot sampling")?;
        let moments = estimate_moments(&pilot)?;
        let mut gbs = sample_threshold_chain(&state, cfg.solver_samples, cfg.stage_seed("gbs"))
            .stage("GBS sampling")?;
        gbs.provenance = serde_json::json!({ "sampler": "chain_rule", "encoding": encoding.summary() });
        let classical = classical_baseline(
            g.n(),
            moments.0,
            moments.1,
            cfg.solver_samples,
            cfg.stage_seed("classical"),
        )
        .stage("classical baseline")?;
        let gbs_result =
            hybrid_pipeline(g, &gbs, max_steps, cfg.stage_seed("solve-gbs")).stage("solving GBS samples")?;
        let classical_result = hybrid_pipeline(g, &classical, max_steps, cfg.stage_seed("solve-classical"))
            .stage("solving classical samples")?;
        Ok(Campaign {
            config: cfg.clone(),
            instance,
            encoding,
            mean_clicks: n_mean,
            pilot,
            moments,
            gbs,
            classical,
            gbs_result,
            classical_result,
        })
    }
}

/// Cliques of one (size, weight) point found from one sample source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueBin {
    pub source: String,
    pub size: usize,
    pub weight: f64,
    pub count: usize,
    /// Share of the source's usable samples.
    pub fraction: f64,
}

fn bins(source: &str, r: &SolveResult) -> Vec<CliqueBin> {
    r.histogram()
        .into_iter()
        .map(|b| CliqueBin {
            source: source.to_string(),
            size: b.size,
            weight: b.weight,
            count: b.count,
            fraction: if r.usable_samples == 0 {
                0.0
            } else {
                b.count as f64 / r.usable_samples as f64
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure3Summary {
    pub samples: usize,
    pub n_clicks: usize,
    pub encoding: EncodingSummary,
    pub optimum_weight: f64,
    pub gbs_cliques: usize,
    pub classical_cliques: usize,
    pub gbs_found_optimum: bool,
    pub classical_found_optimum: bool,
}

/// Random search on post-selected GBS samples against uniform subsets of the
/// same size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure3 {
    pub bins: Vec<CliqueBin>,
    pub summary: Figure3Summary,
}

pub fn run_figure3(cfg: &ExperimentConfig) -> Result<Figure3> {
    cfg.validate()?;
    let instance = cfg.load_instance().stage("loading instance")?;
    let g = &instance.graph;
    let encoding = tune_c_for_clicks(g, cfg.alpha, cfg.target_clicks, 1.0).stage("tuning encoding")?;
    let n = cfg.postselect_clicks;
    let count = cfg.random_search_samples;
    let gbs = sample_postselected(&encoding, n, count, cfg.stage_seed("postselected"))
        .stage("post-selected sampling")?;
    let classical = classical_baseline(g.n(), n as f64, 0.0, count, cfg.stage_seed("classical-fixed"))
        .stage("classical baseline")?;
    let rg = random_search(g, &gbs)?;
    let rc = random_search(g, &classical)?;
    let mut all = bins("gbs", &rg);
    all.extend(bins("classical", &rc));
    let fig = Figure3 {
        bins: all,
        summary: Figure3Summary {
            samples: count,
            n_clicks: n,
            encoding: encoding.summary(),
            optimum_weight: rg.optimum_weight,
            gbs_cliques: rg.clique_count(),
            classical_cliques: rc.clique_count(),
            gbs_found_optimum: rg.success_counts[0] > 0,
            classical_found_optimum: rc.success_counts[0] > 0,
        },
    };
    let rows = fig
        .bins
        .iter()
        .map(|b| vec![b.source.clone(), b.size.to_string(), fmt(b.weight), b.count.to_string()])
        .collect();
    write_outputs(cfg, Bench::Fig3, &["source", "size", "weight", "count"], rows, &fig.summary)?;
    Ok(fig)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure4Summary {
    pub samples: usize,
    pub moments: (f64, f64),
    pub optimum_weight: f64,
    pub gbs: Rate,
    pub classical: Rate,
    /// Most frequent (size, weight) bin of shrunk GBS cliques.
    pub gbs_modal_bin: Option<(usize, f64)>,
    pub planted: Option<(usize, f64)>,
}

/// Greedy shrinking alone: success rates and clique histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure4 {
    /// Raw counts of every bin.
    pub bins: Vec<CliqueBin>,
    pub summary: Figure4Summary,
}

pub fn run_figure4(cfg: &ExperimentConfig) -> Result<Figure4> {
    figure4_from(&Campaign::prepare(cfg, 0)?)
}

/// Shrinking results of a prepared campaign (local-search steps are ignored).
pub fn figure4_from(c: &Campaign) -> Result<Figure4> {
    let (rg, rc) = (&c.gbs_result, &c.classical_result);
    let mut all = bins("gbs", rg);
    all.extend(bins("classical", rc));
    let modal = all
        .iter()
        .filter(|b| b.source == "gbs")
        .fold(None::<&CliqueBin>, |best, b| match best {
            Some(x) if x.count >= b.count => Some(x),
            _ => Some(b),
        })
        .map(|b| (b.size, b.weight));
    let g = &c.instance.graph;
    let planted = match &c.instance.planted {
        Some(p) => Some((p.len(), g.clique_weight(p)?)),
        None => None,
    };
    let fig = Figure4 {
        bins: all,
        summary: Figure4Summary {
            samples: c.gbs.len(),
            moments: c.moments,
            optimum_weight: rg.optimum_weight,
            gbs: Rate::wilson(rg.success_counts[0], rg.usable_samples),
            classical: Rate::wilson(rc.success_counts[0], rc.usable_samples),
            gbs_modal_bin: modal,
            planted,
        },
    };
    let rows = fig
        .bins
        .iter()
        .map(|b| {
            vec![
                b.source.clone(),
                b.size.to_string(),
                fmt(b.weight),
                b.count.to_string(),
                fmt(b.fraction),
                u8::from(b.fraction >= PLOT_FRACTION_FLOOR).to_string(),
            ]
        })
        .collect();
    write_outputs(
        &c.config,
        Bench::Fig4,
        &["source", "size", "weight", "count", "fraction", "shown"],
        rows,
        &fig.summary,
    )?;
    Ok(fig)
}

/// Success rate after `k` local-search steps for each source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub gbs: Rate,
    pub classical: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure56Summary {
    pub samples: usize,
    pub moments: (f64, f64),
    pub optimum_weight: f64,
    /// GBS rate at least the classical rate at every k.
    pub gbs_dominates: bool,
    /// GBS over classical success rate at each k (absent where classical is 0).
    pub ratios: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure56 {
    pub curve: Vec<CurvePoint>,
    pub summary: Figure56Summary,
}

fn curve(r: &SolveResult) -> Vec<Rate> {
    r.success_counts
        .iter()
        .map(|&s| Rate::wilson(s, r.usable_samples))
        .collect()
}

pub fn run_figure5_6(cfg: &ExperimentConfig) -> Result<Figure56> {
    figure56_from(&Campaign::prepare(cfg, cfg.max_steps)?)
}

pub fn figure56_from(c: &Campaign) -> Result<Figure56> {
    let fig = figure56_table(c);
    let rows = fig
        .curve
        .iter()
        .map(|p| {
            let mut row = vec![p.k.to_string()];
            row.extend(rate_cells(&p.gbs));
            row.extend(rate_cells(&p.classical));
            row
        })
        .collect();
    write_outputs(
        &c.config,
        Bench::Fig56,
        &[
            "k",
            "gbs_rate",
            "gbs_low",
            "gbs_high",
            "classical_rate",
            "classical_low",
            "classical_high",
        ],
        rows,
        &fig.summary,
    )?;
    Ok(fig)
}

fn figure56_table(c: &Campaign) -> Figure56 {
    let g = curve(&c.gbs_result);
    let cl = curve(&c.classical_result);
    let points: Vec<CurvePoint> = g
        .into_iter()
        .zip(cl)
        .enumerate()
        .map(|(k, (gbs, classical))| CurvePoint { k, gbs, classical })
        .collect();
    let ratios = points
        .iter()
        .filter(|p| p.classical.rate > 0.0)
        .map(|p| (p.k, p.gbs.rate / p.classical.rate))
        .collect();
    Figure56 {
        summary: Figure56Summary {
            samples: c.gbs.len(),
            moments: c.moments,
            optimum_weight: c.gbs_result.optimum_weight,
            gbs_dominates: points.iter().all(|p| p.gbs.rate >= p.classical.rate),
            ratios,
        },
        curve: points,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub k: usize,
    pub noiseless: Rate,
    pub noisy: Rate,
    pub classical: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub eta: f64,
    pub c_noiseless: f64,
    pub c_noisy: f64,
    pub mean_clicks_noiseless: f64,
    pub mean_clicks_noisy: f64,
    /// Noisy k = 0 rate inside the noiseless 95% interval.
    pub noisy_k0_within_band: bool,
    /// Noisy rate above the classical rate at every k.
    pub noisy_above_classical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudy {
    pub curve: Vec<NoisePoint>,
    pub summary: NoiseSummary,
    /// The noiseless arm, as the local-search experiment reports it.
    pub noiseless: Figure56,
}

pub fn run_noise_study(cfg: &ExperimentConfig) -> Result<NoiseStudy> {
    noise_study_from(&Campaign::prepare(cfg, cfg.max_steps)?)
}

/// Adds a lossy arm with `c` re-tuned to the same mean click count.
pub fn noise_study_from(c: &Campaign) -> Result<NoiseStudy> {
    let cfg = &c.config;
    let g = &c.instance.graph;
    let eta = cfg.eta;
    let encoding = tune_c_for_clicks(g, cfg.alpha, cfg.target_clicks, eta).stage("tuning lossy encoding")?;
    let state = apply_loss(&state_from_encoding(&encoding)?, eta)?;
    // common random numbers: the lossy arm reuses the lossless arm's sampling
    // and solving streams, so the paired curves differ only through the state
    let mut noisy = sample_threshold_chain(&state, cfg.solver_samples, cfg.stage_seed("gbs"))
        .stage("lossy GBS sampling")?;
    noisy.provenance = serde_json::json!({ "sampler": "chain_rule", "eta": eta, "encoding": encoding.summary() });
    let max_steps = c.gbs_result.success_counts.len() - 1;
    let rn = hybrid_pipeline(g, &noisy, max_steps, cfg.stage_seed("solve-gbs"))
        .stage("solving lossy GBS samples")?;
    let noiseless = figure56_table(c);
    let noisy_curve = curve(&rn);
    let points: Vec<NoisePoint> = noiseless
        .curve
        .iter()
        .zip(noisy_curve)
        .map(|(p, n)| NoisePoint {
            k: p.k,
            noiseless: p.gbs,
            noisy: n,
            classical: p.classical,
        })
        .collect();
    let study = NoiseStudy {
        summary: NoiseSummary {
            eta,
            c_noiseless: c.encoding.c(),
            c_noisy: encoding.c(),
            mean_clicks_noiseless: c.mean_clicks,
            mean_clicks_noisy: mean_clicks(&state),
            noisy_k0_within_band: points[0].noiseless.contains(points[0].noisy.rate),
            noisy_above_classical: points.iter().all(|p| p.noisy.rate > p.classical.rate),
        },
        curve: points,
        noiseless,
    };
    let rows = study
        .curve
        .iter()
        .map(|p| {
            let mut row = vec![p.k.to_string()];
            row.extend(rate_cells(&p.noiseless));
            row.extend(rate_cells(&p.noisy));
            row.extend(rate_cells(&p.classical));
            row
        })
        .collect();
    write_outputs(
        cfg,
        Bench::Noise,
        &[
            "k",
            "noiseless_rate",
            "noiseless_low",
            "noiseless_high",
            "noisy_rate",
            "noisy_low",
            "noisy_high",
            "classical_rate",
            "classical_low",
            "classical_high",
        ],
        rows,
        &study.summary,
    )?;
    Ok(study)
}

fn fmt(x: f64) -> String {
    format!("{x:.9}")
}

fn rate_cells(r: &Rate) -> [String; 3] {
    [fmt(r.rate), fmt(r.low), fmt(r.high)]
}

/// Paths of the table and summary a bench writes.
pub fn output_paths(out_dir: &Path, bench: Bench) -> (PathBuf, PathBuf) {
    (
        out_dir.join(format!("{}.csv", bench.name())),
        out_dir.join(format!("{}.json", bench.name())),
    )
}

fn write_outputs(
    cfg: &ExperimentConfig,
    bench: Bench,
    header: &[&str],
    rows: Vec<Vec<String>>,
    summary: &impl Serialize,
) -> Result<()> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (csv_path, json_path) = output_paths(dir, bench);
    let hash = cfg.hash();
    let mut text = format!(
        "# config_hash={hash} seed={} version={LIBRARY_VERSION}\n",
        cfg.seed
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let body = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    text.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
    std::fs::write(&csv_path, text).map_err(|e| Error::io(&csv_path, e))?;
    let envelope = serde_json::json!({
        "bench": bench.name(),
        "config_hash": hash,
        "seed": cfg.seed,
        "library_version": LIBRARY_VERSION,
        "config": cfg,
        "summary": summary,
    });
    let json = serde_json::to_string_pretty(&envelope)? + "\n";
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
}

/// A gnuplot script plotting `<bench>.csv` from the same directory.
pub fn gnuplot_script(bench: Bench) -> String {
    let name = bench.name();
    let body = match bench {
        Bench::Fig3 => "set xlabel 'clique weight'\nset ylabel 'cliques sampled'\nset style data impulses\n\
             plot 'fig3.csv' using ($1 eq 'gbs' ? $3 : 1/0):4 title 'GBS', \\\n     \
             '' using ($1 eq 'classical' ? $3 : 1/0):4 title 'classical'\n"
            .to_string(),
        Bench::Fig4 => "set xlabel 'clique weight'\nset ylabel 'fraction of samples'\nset style data impulses\n\
             plot 'fig4.csv' using ($1 eq 'gbs' && $6 == 1 ? $3 : 1/0):5 title 'GBS', \\\n     \
             '' using ($1 eq 'classical' && $6 == 1 ? $3 : 1/0):5 title 'classical'\n"
            .to_string(),
        Bench::Fig56 => "set xlabel 'local search steps k'\nset ylabel 'success rate'\n\
             plot 'fig56.csv' using 1:2:3:4 with yerrorlines title 'GBS', \\\n     \
             '' using 1:5:6:7 with yerrorlines title 'classical'\n"
            .to_string(),
        Bench::Noise => "set xlabel 'local search steps k'\nset ylabel 'success rate'\n\
             plot 'noise.csv' using 1:2:3:4 with yerrorlines title 'GBS, lossless', \\\n     \
             '' using 1:5:6:7 with yerrorlines title 'GBS, lossy', \\\n     \
             '' using 1:8:9:10 with yerrorlines title 'classical'\n"
            .to_string(),
    };
    format!("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\nset terminal pngcairo\nset output '{name}.png'\n{body}")
}
