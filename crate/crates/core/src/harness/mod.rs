//! Experiment orchestration: synthetic instances, figure-analogue runners and
//! their output files.

mod config;
mod planted;
mod runners;
mod stats;

pub use config::{derive_seed, ExperimentConfig, Instance, InstanceSource};
pub use planted::{generate_planted_instance, PlantedInstance, PlantedParams, WeightProfile, MAX_ATTEMPTS};
pub use runners::{
    figure4_from, figure56_from, gnuplot_script, noise_study_from, output_paths, run_figure3, run_figure4,
    run_figure5_6, run_noise_study, Bench, Campaign, CliqueBin, CurvePoint, Figure3, Figure3Summary, Figure4,
    Figure4Summary, Figure56, Figure56Summary, NoisePoint, NoiseStudy, NoiseSummary, LIBRARY_VERSION,
    PLOT_FRACTION_FLOOR,
};
pub use stats::{Rate, Z_95};
