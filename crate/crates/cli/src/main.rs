use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gbsdock::docking::{
    build_binding_interaction_graph, build_labeled_distance_graph, PharmacophoreFile, PotentialTable,
    DEFAULT_EPSILON, DEFAULT_TAU,
};
use gbsdock::gbs::{mean_clicks, state_from_encoding, tune_c_for_clicks};
use gbsdock::graphs::max_weighted_clique_bruteforce;
use gbsdock::harness::{
    figure4_from, figure56_from, generate_planted_instance, gnuplot_script, noise_study_from, run_figure3,
    Bench, Campaign, ExperimentConfig, InstanceSource, PlantedParams,
};
use gbsdock::samplers::{
    classical_baseline, estimate_moments, sample_postselected, sample_threshold_chain, SampleBatch,
};
use gbsdock::solvers::{hybrid_pipeline, random_search};
use gbsdock::{Error, ErrorClass, WeightedGraph};

/// Docking as weighted clique search, seeded by a simulated Gaussian boson sampler.
#[derive(Parser, Debug)]
#[command(name = "gbsdock", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment config (JSON); a run summary is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Overrides every sample count of the config.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pharmacophore JSON files -> binding interaction graph JSON.
    BuildGraph {
        #[arg(long)]
        ligand: PathBuf,
        #[arg(long)]
        receptor: PathBuf,
        /// Potential table CSV (the shipped table by default).
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Planted synthetic instance -> `instance.json` and `graph.json`.
    GenInstance,
    /// Tunes the encoding of the configured instance and prints it.
    Tune {
        /// Transmissivity (the config's lossless setting by default).
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
    /// Draws a batch of click patterns into `<stem>.csv` and `<stem>.json`.
    Sample {
        #[arg(long, value_enum, default_value_t = SourceArg::Gbs)]
        source: SourceArg,
        /// Click count of post-selected samples (config value by default).
        #[arg(long)]
        clicks: Option<usize>,
        #[arg(long, default_value = "samples")]
        stem: String,
    },
    /// Solves a stored batch on the configured instance.
    Solve {
        /// Directory holding the batch (the output directory by default).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "samples")]
        stem: String,
        #[arg(long, value_enum, default_value_t = Method::Hybrid)]
        method: Method,
    },
    /// Runs a figure-analogue experiment.
    Bench {
        #[arg(value_enum)]
        which: BenchArg,
        /// Also write `<bench>.gp` next to the table.
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Exhaustive maximum-weighted clique of a graph JSON (the configured
    /// instance without `--graph`).
    Oracle {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SourceArg {
    Gbs,
    Postselected,
    Classical,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    /// Greedy shrinking then local search.
    Hybrid,
    /// Keep samples that already are cliques.
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BenchArg {
    Fig3,
    Fig4,
    Fig56,
    Noise,
    /// fig4, fig56 and noise from one shared campaign.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already render their causes
            if e.downcast_ref::<Error>().is_some() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> ExitCode {
    match e.downcast_ref::<Error>().map(Error::class) {
        Some(ErrorClass::Numerical) => ExitCode::from(3),
        Some(ErrorClass::Io) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn load_config(g: &Global) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &g.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(n) = g.samples {
        cfg.random_search_samples = n;
        cfg.solver_samples = n;
        cfg.pilot_samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(v)?).context("writing to stdout")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring worker threads")?;
    }
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::BuildGraph {
            ligand,
            receptor,
            potential,
            tau,
            epsilon,
            output,
        } => {
            let kappa = match potential {
                Some(p) => PotentialTable::read_csv(p)?,
                None => PotentialTable::builtin(),
            };
            let gl = build_labeled_distance_graph(PharmacophoreFile::read(&ligand)?.points)?;
            let gr = build_labeled_distance_graph(PharmacophoreFile::read(&receptor)?.points)?;
            let big = build_binding_interaction_graph(&gl, &gr, &kappa, tau, epsilon)?;
            big.write_json(&output)?;
            eprintln!(
                "{} contacts, {} edges -> {}",
                big.graph.n(),
                big.graph.edge_count(),
                output.display()
            );
        }
        Command::GenInstance => {
            let params = match &cfg.instance {
                InstanceSource::Synthetic(p) => p.clone(),
                _ => PlantedParams::default(),
            };
            let params = PlantedParams {
                seed: cli.global.seed.unwrap_or(params.seed),
                ..params
            };
            let inst = generate_planted_instance(&params)?;
            create_dir(&cfg.out_dir)?;
            let path = cfg.out_dir.join("instance.json");
            std::fs::write(&path, serde_json::to_string_pretty(&inst)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            inst.graph.write_json(cfg.out_dir.join("graph.json"))?;
            print_json(&serde_json::json!({
                "planted_clique": inst.planted_clique,
                "planted_weight": inst.planted_weight(),
                "runner_up_weight": inst.runner_up_weight,
                "attempt": inst.attempt,
            }))?;
        }
        Command::Tune { eta } => {
            let g = cfg.load_instance()?.graph;
            let e = tune_c_for_clicks(&g, cfg.alpha, cfg.target_clicks, eta)?;
            let s = gbsdock::gbs::apply_loss(&state_from_encoding(&e)?, eta)?;
            print_json(&serde_json::json!({
                "c": e.c(),
                "eta": eta,
                "mean_clicks": mean_clicks(&s),
                "eigenvalues": e.eigenvalues(),
                "squeezing": e.squeezing(),
            }))?;
        }
        Command::Sample { source, clicks, stem } => {
            let g = cfg.load_instance()?.graph;
            let e = tune_c_for_clicks(&g, cfg.alpha, cfg.target_clicks, 1.0)?;
            let batch = match source {
                SourceArg::Gbs => {
                    let mut b = sample_threshold_chain(&state_from_encoding(&e)?, cfg.solver_samples, cfg.seed)?;
                    b.provenance = serde_json::json!({ "sampler": "chain_rule", "encoding": e.summary() });
                    b
                }
                SourceArg::Postselected => sample_postselected(
                    &e,
                    clicks.unwrap_or(cfg.postselect_clicks),
                    cfg.random_search_samples,
                    cfg.seed,
                )?,
                SourceArg::Classical => {
                    let pilot = sample_threshold_chain(
                        &state_from_encoding(&e)?,
                        cfg.pilot_samples,
                        cfg.stage_seed("pilot"),
                    )?;
                    let (mean, var) = estimate_moments(&pilot)?;
                    classical_baseline(g.n(), mean, var, cfg.solver_samples, cfg.seed)?
                }
            };
            create_dir(&cfg.out_dir)?;
            batch.write(&cfg.out_dir, &stem)?;
            let (mean, var) = estimate_moments(&batch)?;
            eprintln!(
                "{} samples, mean clicks {mean:.4}, variance {var:.4} -> {}",
                batch.len(),
                cfg.out_dir.join(format!("{stem}.csv")).display()
            );
        }
        Command::Solve { input, stem, method } => {
            let g = cfg.load_instance()?.graph;
            let dir = input.unwrap_or_else(|| cfg.out_dir.clone());
            let batch = SampleBatch::read(&dir, &stem)?;
            let r = match method {
                Method::Hybrid => hybrid_pipeline(&g, &batch, cfg.max_steps, cfg.stage_seed("solve"))?,
                Method::Random => random_search(&g, &batch)?,
            };
            create_dir(&cfg.out_dir)?;
            let path = cfg.out_dir.join(format!("{stem}.solve.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&r)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            print_json(&serde_json::json!({
                "best_clique": r.best_clique,
                "best_weight": r.best_weight,
                "optimum_weight": r.optimum_weight,
                "usable_samples": r.usable_samples,
                "cliques": r.clique_count(),
                "success_curve": r.success_curve,
            }))?;
        }
        Command::Bench { which, emit_gnuplot } => {
            let benches = match which {
                BenchArg::Fig3 => {
                    let f = run_figure3(&cfg)?;
                    print_json(&f.summary)?;
                    vec![Bench::Fig3]
                }
                BenchArg::Fig4 => {
                    let f = figure4_from(&Campaign::prepare(&cfg, 0)?)?;
                    print_json(&f.summary)?;
                    vec![Bench::Fig4]
                }
                BenchArg::Fig56 => {
                    let f = figure56_from(&Campaign::prepare(&cfg, cfg.max_steps)?)?;
                    print_json(&f.summary)?;
                    vec![Bench::Fig56]
                }
                BenchArg::Noise => {
                    let f = noise_study_from(&Campaign::prepare(&cfg, cfg.max_steps)?)?;
                    print_json(&f.summary)?;
                    vec![Bench::Noise]
                }
                BenchArg::All => {
                    let c = Campaign::prepare(&cfg, cfg.max_steps)?;
                    print_json(&figure4_from(&c)?.summary)?;
                    print_json(&figure56_from(&c)?.summary)?;
                    print_json(&noise_study_from(&c)?.summary)?;
                    vec![Bench::Fig4, Bench::Fig56, Bench::Noise]
                }
            };
            if emit_gnuplot {
                for b in benches {
                    let path = cfg.out_dir.join(format!("{}.gp", b.name()));
                    std::fs::write(&path, gnuplot_script(b))
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
        }
        Command::Oracle { graph } => {
            let g = match graph {
                Some(p) => WeightedGraph::read_json(p)?,
                None => cfg.load_instance()?.graph,
            };
            let best = max_weighted_clique_bruteforce(&g)?;
            print_json(&serde_json::json!({
                "clique": best,
                "weight": g.clique_weight(&best)?,
            }))?;
        }
    }
    Ok(())
}
