//! Gaussian-state mathematics for a boson sampler programmed with a
//! vertex-weighted graph.

mod detection;
mod encoding;
mod hafnian;
mod state;

pub use detection::{
    dark_and_clicked_probability, mean_clicks, threshold_distribution, threshold_probability,
    vacuum_probability, ClickPattern, ENUMERATION_MAX_MODES,
};
pub use encoding::{
    build_encoding, mean_clicks_at, scaled_laplacian, spectral_c_bound, tune_c_for_clicks,
    weight_factors, Encoding, EncodingSummary, ScaleChoice, AUTO_C_CEILING, TUNING_EIGEN_MARGIN,
};
pub use hafnian::{complete_graph_hafnian, hafnian, HAFNIAN_MAX_DIM};
pub use state::{apply_loss, state_from_encoding, GaussianState};
