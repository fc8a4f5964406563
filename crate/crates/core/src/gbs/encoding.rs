use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::detection::mean_clicks;
use super::state::{apply_loss, state_from_encoding};
use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;

/// Largest scale `c` picked automatically; keeps `c` strictly inside (0, 1)
/// for graphs whose spectral bound would allow more.
pub const AUTO_C_CEILING: f64 = 1.0 - 1e-6;

/// Margin below 1 that the tuned maximum eigenvalue of `B` must respect.
pub const TUNING_EIGEN_MARGIN: f64 = 1e-6;

/// Negative eigenvalues of `B` larger than this in magnitude mean it is not PSD.
const PSD_TOL: f64 = 1e-9;

/// How the global scale `c` of `Omega = c (1 + alpha w)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleChoice {
    /// The largest scale certified by the degree bound, capped at
    /// [`AUTO_C_CEILING`].
    Auto,
    Fixed(f64),
}

/// Device programming for one weighted graph: `B = Omega (D - A) Omega` with
/// `Omega_ii = c (1 + alpha w_i)`, its spectrum, and the matching squeezing.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    omega: Vec<f64>,
    alpha: f64,
    c: f64,
    b_matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    squeezing: Vec<f64>,
}

/// Provenance record written next to sample files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSummary {
    pub alpha: f64,
    pub c: f64,
    pub omega: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub squeezing: Vec<f64>,
}

impl Encoding {
    pub fn modes(&self) -> usize {
        self.omega.len()
    }

    /// Diagonal of `Omega`.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b_matrix(&self) -> &DMatrix<f64> {
        &self.b_matrix
    }

    /// Eigenvalues of `B`, descending, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `r_j = atanh(lambda_j)`, in eigenvalue order.
    pub fn squeezing(&self) -> &[f64] {
        &self.squeezing
    }

    pub fn summary(&self) -> EncodingSummary {
        EncodingSummary {
            alpha: self.alpha,
            c: self.c,
            omega: self.omega.clone(),
            eigenvalues: self.eigenvalues.clone(),
            squeezing: self.squeezing.clone(),
        }
    }
}

/// Largest `c` with `2 max_j d_j omega_j^2 <= 1/c`, which bounds the spectrum of
/// `c^2 Omega_raw (D - A) Omega_raw` by `c`. Isolated vertices are left out of
/// the maximum; a graph without edges gives `+inf`.
pub fn spectral_c_bound(g: &WeightedGraph, omega_raw: &[f64]) -> Result<f64> {
    if omega_raw.len() != g.n() {
        return Err(Error::invalid(format!(
            "{} scale factors for {} vertices",
            omega_raw.len(),
            g.n()
        )));
    }
    if let Some(w) = omega_raw.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::invalid(format!("scale factor {w} is not positive")));
    }
    let worst = g
        .degrees()
        .iter()
        .zip(omega_raw)
        .filter(|(d, _)| **d > 0)
        .map(|(&d, &w)| d as f64 * w * w)
        .fold(0.0, f64::max);
    Ok(if worst == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * worst)
    })
}

/// `1 + alpha w_j` per vertex.
pub fn weight_factors(g: &WeightedGraph, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha {alpha} must be finite and >= 0")));
    }
    Ok(g.weights().iter().map(|w| 1.0 + alpha * w).collect())
}

pub fn build_encoding(g: &WeightedGraph, alpha: f64, scale: ScaleChoice) -> Result<Encoding> {
    let raw = weight_factors(g, alpha)?;
    let c = match scale {
        ScaleChoice::Auto => spectral_c_bound(g, &raw)?.min(AUTO_C_CEILING),
        ScaleChoice::Fixed(c) => {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::invalid(format!("scale c = {c} outside (0, 1)")));
            }
            c
        }
    };
    let omega: Vec<f64> = raw.iter().map(|w| c * w).collect();
    let b = scaled_laplacian(g, &omega);
    let eig = SymmetricEigen::new(b.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    if let Some(&low) = eigenvalues.last() {
        if low < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "B has negative eigenvalue {low:e}; expected PSD"
            )));
        }
    }
    if eigenvalues[0] >= 1.0 {
        return Err(Error::Encoding {
            eigenvalue: eigenvalues[0],
        });
    }
    for v in &mut eigenvalues {
        *v = v.max(0.0);
    }
    let squeezing = eigenvalues.iter().map(|l| l.atanh()).collect();
    Ok(Encoding {
        omega,
        alpha,
        c,
        b_matrix: b,
        eigenvalues,
        squeezing,
    })
}

/// `Omega (D - A) Omega` for a diagonal given as a vector.
pub fn scaled_laplacian(g: &WeightedGraph, omega: &[f64]) -> DMatrix<f64> {
    let l = g.laplacian();
    DMatrix::from_fn(g.n(), g.n(), |i, j| omega[i] * l[(i, j)] * omega[j])
}

/// Mean clicks of the (optionally lossy) device programmed at scale `c`.
pub fn mean_clicks_at(g: &WeightedGraph, alpha: f64, c: f64, eta: f64) -> Result<f64> {
    let e = build_encoding(g, alpha, ScaleChoice::Fixed(c))?;
    let s = apply_loss(&state_from_encoding(&e)?, eta)?;
    Ok(mean_clicks(&s))
}

/// Bisects `c` so that the lossy state's mean click count hits `target_n`.
///
/// The search interval is `(0, c_max)` where `c_max` puts the largest
/// eigenvalue of `B` at `1 - 1e-6`. The mean click count must grow with `c`;
/// a violation is reported as a numerical failure.
pub fn tune_c_for_clicks(g: &WeightedGraph, alpha: f64, target_n: f64, eta: f64) -> Result<Encoding> {
    let m = g.n() as f64;
    if !(target_n > 0.0 && target_n < m) {
        return Err(Error::invalid(format!(
            "target mean clicks {target_n} outside (0, {m})"
        )));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("transmissivity {eta} outside (0, 1]")));
    }
    let raw = weight_factors(g, alpha)?;
    let b0 = scaled_laplacian(g, &raw);
    let lambda0 = SymmetricEigen::new(b0).eigenvalues.max();
    if lambda0 <= 0.0 {
        return Err(Error::Unreachable {
            target: target_n,
            max_achievable: 0.0,
        });
    }
    let c_max = ((1.0 - TUNING_EIGEN_MARGIN) / lambda0).sqrt().min(1.0 - 1e-12);
    let n_max = mean_clicks_at(g, alpha, c_max, eta)?;
    if n_max < target_n {
        return Err(Error::Unreachable {
            target: target_n,
            max_achievable: n_max,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, c_max);
    let (mut n_lo, mut n_hi) = (0.0_f64, n_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let n_mid = mean_clicks_at(g, alpha, mid, eta)?;
        if n_mid < n_lo - 1e-12 || n_mid > n_hi + 1e-12 {
            return Err(Error::Numerical(format!(
                "mean clicks not monotone in c near c = {mid}"
            )));
        }
        if (n_mid - target_n).abs() < 1e-10 {
            lo = mid;
            hi = mid;
            break;
        }
        if n_mid < target_n {
            lo = mid;
            n_lo = n_mid;
        } else {
            hi = mid;
            n_hi = n_mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let e = build_encoding(g, alpha, ScaleChoice::Fixed(c))?;
    let achieved = mean_clicks(&apply_loss(&state_from_encoding(&e)?, eta)?);
    if (achieved - target_n).abs() > 1e-3 {
        return Err(Error::Numerical(format!(
            "line search ended at {achieved} clicks for target {target_n}"
        )));
    }
    Ok(e)
}
