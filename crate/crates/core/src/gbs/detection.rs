//! Threshold-detector statistics of Gaussian states.
//!
//! Every probability here reduces to vacuum probabilities
//! `p_vac(T) = 1 / sqrt(det(sigma_T + I/2))` of mode subsets. Click patterns
//! are evaluated by inclusion-exclusion over the clicked modes.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use super::state::GaussianState;
use crate::error::{Error, Result};

/// Largest mode count for full distribution enumeration.
pub const ENUMERATION_MAX_MODES: usize = 20;

/// Detector outcome per mode: `true` for a click.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClickPattern(Vec<bool>);

impl ClickPattern {
    pub fn new(clicks: Vec<bool>) -> Self {
        ClickPattern(clicks)
    }

    pub fn zeros(m: usize) -> Self {
        ClickPattern(vec![false; m])
    }

    /// Bit `j` of `bits` is mode `j`.
    pub fn from_bits(bits: u64, m: usize) -> Self {
        ClickPattern((0..m).map(|j| bits >> j & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (u64::from(b) << j))
    }

    /// Parses a string of `0`/`1` characters, mode 0 first.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("bad click character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ClickPattern)
    }

    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn clicks(&self) -> &[bool] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn clicked_modes(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j]).collect()
    }
}

/// Probability that every mode in `modes` registers zero photons; 1 for the
/// empty set. Direct determinant evaluation.
pub fn vacuum_probability(s: &GaussianState, modes: &[usize]) -> Result<f64> {
    let idx = s.quadrature_indices(modes)?;
    if idx.is_empty() {
        return Ok(1.0);
    }
    let k = shifted_block(s.covariance(), &idx, &idx);
    let det = k.determinant();
    if !(det > 0.0) {
        return Err(Error::Numerical(format!(
            "det(sigma_T + I/2) = {det:e} is not positive"
        )));
    }
    Ok(1.0 / det.sqrt())
}

/// Probability of observing exactly `pattern`.
pub fn threshold_probability(s: &GaussianState, pattern: &ClickPattern) -> Result<f64> {
    if pattern.len() != s.modes() {
        return Err(Error::invalid(format!(
            "pattern of length {} for a {}-mode state",
            pattern.len(),
            s.modes()
        )));
    }
    let clicked = pattern.clicked_modes();
    let dark: Vec<usize> = (0..s.modes()).filter(|&j| !pattern.clicks()[j]).collect();
    dark_and_clicked_probability(s, &dark, &clicked)
}

/// `M - sum_j 1/sqrt(det(sigma_j + I/2))`.
pub fn mean_clicks(s: &GaussianState) -> f64 {
    (0..s.modes())
        .map(|j| {
            let c = s.mode_covariance(j);
            let det = (c[0][0] + 0.5) * (c[1][1] + 0.5) - c[0][1] * c[1][0];
            1.0 - 1.0 / det.sqrt()
        })
        .sum()
}

/// Probabilities of all `2^M` patterns, indexed by [`ClickPattern::to_bits`].
pub fn threshold_distribution(s: &GaussianState) -> Result<Vec<f64>> {
    let m = s.modes();
    if m > ENUMERATION_MAX_MODES {
        return Err(Error::TooLarge {
            what: "enumerated state",
            size: m,
            limit: ENUMERATION_MAX_MODES,
        });
    }
    (0..1u64 << m)
        .map(|bits| threshold_probability(s, &ClickPattern::from_bits(bits, m)))
        .collect()
}

/// Probability that all `dark` modes show vacuum and all `clicked` modes click,
/// marginalizing every other mode.
///
/// With `K = sigma + I/2`, the vacuum probability of `dark + Z` factorizes as
/// `p_vac(dark) / sqrt(det S_Z)` where `S` is the Schur complement of the dark
/// block. The `2^|clicked|` subsets `Z` are walked depth-first while a
/// Cholesky factor of `S_Z` is extended one mode at a time. When `sigma` has
/// no position-momentum correlations, `K` and `S` split into independent
/// position and momentum blocks that are factored separately.
pub fn dark_and_clicked_probability(s: &GaussianState, dark: &[usize], clicked: &[usize]) -> Result<f64> {
    let all: Vec<usize> = dark.iter().chain(clicked).copied().collect();
    s.quadrature_indices(&all)?;
    let m = s.modes();
    let blocks: Vec<(Vec<usize>, Vec<usize>)> = if s.is_quadrature_separable() {
        vec![
            (dark.to_vec(), clicked.to_vec()),
            (
                dark.iter().map(|j| j + m).collect(),
                clicked.iter().map(|j| j + m).collect(),
            ),
        ]
    } else {
        vec![(s.quadrature_indices(dark)?, s.quadrature_indices(clicked)?)]
    };
    let mut inv_sqrt_det_dark = 1.0;
    let mut schurs = Vec::with_capacity(blocks.len());
    for (d_idx, c_idx) in &blocks {
        let (inv, schur) = dark_schur(s.covariance(), d_idx, c_idx)?;
        inv_sqrt_det_dark *= inv;
        schurs.push(schur);
    }
    if clicked.is_empty() {
        return Ok(inv_sqrt_det_dark);
    }
    let mut walker = SubsetWalker::new(&schurs, clicked.len());
    walker.visit(0, 0, 1.0, -1.0)?;
    Ok(inv_sqrt_det_dark * (1.0 + walker.total))
}

/// `1/prod(diag chol(K_DD))` and `K_CC - K_CD K_DD^-1 K_DC` for `K = sigma + I/2`.
fn dark_schur(cov: &DMatrix<f64>, d_idx: &[usize], c_idx: &[usize]) -> Result<(f64, DMatrix<f64>)> {
    if d_idx.is_empty() {
        return Ok((1.0, shifted_block(cov, c_idx, c_idx)));
    }
    let chol = Cholesky::new(shifted_block(cov, d_idx, d_idx))
        .ok_or_else(|| Error::Numerical("sigma + I/2 not positive definite".into()))?;
    let l = chol.l();
    let prod: f64 = l.diagonal().iter().product();
    if c_idx.is_empty() {
        return Ok((1.0 / prod, DMatrix::zeros(0, 0)));
    }
    let x = l
        .solve_lower_triangular(&shifted_block(cov, d_idx, c_idx))
        .ok_or_else(|| Error::Numerical("singular dark block".into()))?;
    Ok((1.0 / prod, shifted_block(cov, c_idx, c_idx) - x.transpose() * x))
}

/// `(sigma + I/2)[rows, cols]`.
fn shifted_block(cov: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        let (r, c) = (rows[a], cols[b]);
        cov[(r, c)] + if r == c { 0.5 } else { 0.0 }
    })
}

/// Incrementally extended lower Cholesky factor of principal submatrices of
/// one Schur block. Rows are stored densely, row-major.
struct Factor {
    schur: Vec<f64>,
    dim: usize,
    rows_per_mode: usize,
    factor: Vec<f64>,
    source: Vec<usize>,
}

impl Factor {
    fn new(schur: &DMatrix<f64>, modes: usize) -> Self {
        let dim = schur.nrows();
        Factor {
            schur: schur.transpose().as_slice().to_vec(),
            dim,
            rows_per_mode: dim / modes,
            factor: vec![0.0; dim * dim],
            source: vec![0; dim],
        }
    }

    /// Writes factor row `row` for Schur row `src` and returns its diagonal.
    fn append(&mut self, row: usize, src: usize) -> Result<f64> {
        let n = self.dim;
        self.source[row] = src;
        let (done, rest) = self.factor.split_at_mut(row * n);
        let new = &mut rest[..n];
        let srow = &self.schur[src * n..(src + 1) * n];
        for k in 0..row {
            let prev = &done[k * n..k * n + k];
            let dot: f64 = prev.iter().zip(&new[..k]).map(|(a, b)| a * b).sum();
            new[k] = (srow[self.source[k]] - dot) / prev_diag(done, n, k);
        }
        let diag = srow[src] - new[..row].iter().map(|x| x * x).sum::<f64>();
        if !(diag > 0.0) {
            return Err(Error::Numerical(format!(
                "Schur complement lost positive definiteness (pivot {diag:e})"
            )));
        }
        let d = diag.sqrt();
        new[row] = d;
        Ok(d)
    }
}

fn prev_diag(done: &[f64], n: usize, k: usize) -> f64 {
    done[k * n + k]
}

/// Signed sum of `1/sqrt(det S_Z)` over non-empty mode subsets `Z`.
struct SubsetWalker {
    factors: Vec<Factor>,
    modes: usize,
    total: f64,
}

impl SubsetWalker {
    fn new(schurs: &[DMatrix<f64>], modes: usize) -> Self {
        SubsetWalker {
            factors: schurs.iter().map(|s| Factor::new(s, modes)).collect(),
            modes,
            total: 0.0,
        }
    }

    fn visit(&mut self, first_mode: usize, depth: usize, inv_prod: f64, sign: f64) -> Result<()> {
        for mode in first_mode..self.modes {
            let mut inv = inv_prod;
            for f in &mut self.factors {
                let r = f.rows_per_mode;
                for t in 0..r {
                    inv /= f.append(depth * r + t, mode * r + t)?;
                }
            }
            self.total += sign * inv;
            self.visit(mode + 1, depth + 1, inv, -sign)?;
        }
        Ok(())
    }
}
