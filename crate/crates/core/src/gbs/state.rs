use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::encoding::Encoding;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Tolerance on the smallest eigenvalue of `sigma + iJ/2`.
const PHYSICALITY_TOL: f64 = 1e-9;

/// Zero-mean Gaussian state of `M` modes.
///
/// The covariance is real, `2M x 2M`, in quadrature order
/// `(x_1..x_M, p_1..p_M)` with the vacuum at `I/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation `sigma + iJ/2 >= 0`.
    pub fn new(covariance: DMatrix<f64>) -> Result<Self> {
        let dim = covariance.nrows();
        if dim == 0 || dim % 2 != 0 || covariance.ncols() != dim {
            return Err(Error::invalid(format!(
                "covariance must be 2M x 2M with M >= 1, got {}x{}",
                dim,
                covariance.ncols()
            )));
        }
        if covariance.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance has non-finite entries"));
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..dim {
            for j in i + 1..dim {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::invalid(format!("covariance not symmetric at ({i},{j})")));
                }
            }
        }
        let state = GaussianState {
            modes: dim / 2,
            covariance,
        };
        let min_eig = state.uncertainty_min_eigenvalue();
        if min_eig < -PHYSICALITY_TOL * scale {
            return Err(Error::invalid(format!(
                "covariance violates the uncertainty relation (min eigenvalue of sigma + iJ/2 is {min_eig:e})"
            )));
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            modes,
            covariance: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Single-mode squeezed vacuum, `diag(e^{2r}, e^{-2r}) / 2`.
    pub fn squeezed_vacuum(r: f64) -> Self {
        let mut cov = DMatrix::zeros(2, 2);
        cov[(0, 0)] = (2.0 * r).exp() / 2.0;
        cov[(1, 1)] = (-2.0 * r).exp() / 2.0;
        GaussianState {
            modes: 1,
            covariance: cov,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Whether every position-momentum covariance is exactly zero.
    pub fn is_quadrature_separable(&self) -> bool {
        let m = self.modes;
        (0..m).all(|i| (m..2 * m).all(|j| self.covariance[(i, j)] == 0.0))
    }

    /// Reduced `2x2` covariance `[[xx, xp], [px, pp]]` of mode `j`.
    pub fn mode_covariance(&self, j: usize) -> [[f64; 2]; 2] {
        let m = self.modes;
        let s = &self.covariance;
        [[s[(j, j)], s[(j, j + m)]], [s[(j + m, j)], s[(j + m, j + m)]]]
    }

    /// Marginal state on `modes`, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<GaussianState> {
        let idx = self.quadrature_indices(modes)?;
        let k = modes.len();
        // quadrature_indices interleaves (x_j, p_j); regroup to (x.., p..)
        let order: Vec<usize> = (0..k).map(|a| idx[2 * a]).chain((0..k).map(|a| idx[2 * a + 1])).collect();
        let cov = DMatrix::from_fn(2 * k, 2 * k, |r, c| self.covariance[(order[r], order[c])]);
        Ok(GaussianState {
            modes: k,
            covariance: cov,
        })
    }

    /// Relabels modes so that new mode `i` is old mode `perm[i]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<GaussianState> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.modes).collect::<Vec<_>>() {
            return Err(Error::invalid("not a permutation of the modes"));
        }
        self.reduced(perm)
    }

    /// Row indices `[x_j, p_j]` for each listed mode, interleaved per mode.
    pub(crate) fn quadrature_indices(&self, modes: &[usize]) -> Result<Vec<usize>> {
        let mut seen = vec![false; self.modes];
        let mut out = Vec::with_capacity(2 * modes.len());
        for &j in modes {
            if j >= self.modes {
                return Err(Error::InvalidVertex {
                    index: j,
                    n: self.modes,
                });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::invalid(format!("mode {j} listed twice")));
            }
            out.push(j);
            out.push(j + self.modes);
        }
        Ok(out)
    }

    /// `<n_j> = (sigma_xx + sigma_pp) / 2 - 1/2` per mode.
    pub fn mean_photon_numbers(&self) -> Vec<f64> {
        (0..self.modes)
            .map(|j| {
                let c = self.mode_covariance(j);
                (c[0][0] + c[1][1]) / 2.0 - 0.5
            })
            .collect()
    }

    /// `det(2 sigma)`; exactly 1 for pure states and larger for mixed ones.
    pub fn purity_determinant(&self) -> f64 {
        (&self.covariance * 2.0).determinant()
    }

    /// The `M` symplectic eigenvalues, ascending. All equal 1/2 for a pure state.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.covariance.clone());
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let root_c = root.map(|x| C64::new(x, 0.0));
        let h = &root_c * i_times_symplectic_form(self.modes) * &root_c;
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().map(|v| v.abs()).collect();
        ev.sort_by(f64::total_cmp);
        ev.into_iter().step_by(2).collect()
    }

    fn uncertainty_min_eigenvalue(&self) -> f64 {
        let s = self.covariance.map(|x| C64::new(x, 0.0)) + i_times_symplectic_form(self.modes) * C64::new(0.5, 0.0);
        SymmetricEigen::new(s).eigenvalues.min()
    }

    /// Covariance in the complex `(a_1..a_M, a_1^dag..a_M^dag)` basis.
    pub fn complex_covariance(&self) -> DMatrix<C64> {
        let w = quadrature_to_ladder(self.modes);
        &w * self.covariance.map(|x| C64::new(x, 0.0)) * w.adjoint()
    }

    /// `X [I - (sigma_c + I/2)^{-1}]` with `X = [[0, I], [I, 0]]`; equals
    /// `B (+) B*` for a pure state programmed with `B`.
    pub fn a_matrix(&self) -> Result<DMatrix<C64>> {
        let dim = 2 * self.modes;
        let id = DMatrix::<C64>::identity(dim, dim);
        let q = self.complex_covariance() + &id * C64::new(0.5, 0.0);
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| Error::Numerical("sigma + I/2 is singular".into()))?;
        Ok(swap_halves(self.modes) * (id - q_inv))
    }
}

/// Pure state whose `A` matrix is `B (+) B` for the encoding's real `B`:
/// `sigma_c = (I - X A)^{-1} - I/2`, converted to quadrature order.
pub fn state_from_encoding(e: &Encoding) -> Result<GaussianState> {
    let m = e.modes();
    let b = e.b_matrix().map(|x| C64::new(x, 0.0));
    let mut a = DMatrix::<C64>::zeros(2 * m, 2 * m);
    a.view_mut((0, 0), (m, m)).copy_from(&b);
    a.view_mut((m, m), (m, m)).copy_from(&b.conjugate());
    let id = DMatrix::<C64>::identity(2 * m, 2 * m);
    let q = (&id - swap_halves(m) * a).try_inverse().ok_or(Error::Encoding {
        eigenvalue: e.max_eigenvalue(),
    })?;
    let sigma_c = q - &id * C64::new(0.5, 0.0);
    let t = ladder_to_quadrature(m);
    let sigma_q = &t * sigma_c * t.adjoint();
    let imag = sigma_q.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 * sigma_q.iter().map(|z| z.re.abs()).fold(1.0, f64::max) {
        return Err(Error::Numerical(format!(
            "quadrature covariance has imaginary residue {imag:e}"
        )));
    }
    let mut cov = sigma_q.map(|z| z.re);
    cov = (&cov + cov.transpose()) * 0.5;
    // real B has no position-momentum correlations; clear the rounding residue
    let scale = cov.amax().max(1.0);
    let xp = cov.view((0, m), (m, m)).amax();
    if xp <= 1e-12 * scale {
        cov.view_mut((0, m), (m, m)).fill(0.0);
        cov.view_mut((m, 0), (m, m)).fill(0.0);
    }
    GaussianState::new(cov)
}

/// Uniform pure-loss channel of transmissivity `eta`:
/// `sigma -> eta sigma + (1 - eta) I/2`.
pub fn apply_loss(s: &GaussianState, eta: f64) -> Result<GaussianState> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("transmissivity {eta} outside (0, 1]")));
    }
    if eta == 1.0 {
        return Ok(s.clone());
    }
    let dim = 2 * s.modes;
    let cov = s.covariance() * eta + DMatrix::identity(dim, dim) * ((1.0 - eta) * 0.5);
    Ok(GaussianState {
        modes: s.modes,
        covariance: cov,
    })
}

fn swap_halves(m: usize) -> DMatrix<C64> {
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if (i + m == j) || (j + m == i) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `iJ` for `J = [[0, I], [-I, 0]]`; Hermitian.
fn i_times_symplectic_form(m: usize) -> DMatrix<C64> {
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if j == i + m {
            C64::new(0.0, 1.0)
        } else if i == j + m {
            C64::new(0.0, -1.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `W` with `(a, a^dag) = W (x, p)`, `a = (x + ip)/sqrt 2`.
fn quadrature_to_ladder(m: usize) -> DMatrix<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let (ri, ci) = (i % m, j % m);
        if ri != ci {
            return C64::new(0.0, 0.0);
        }
        match (i < m, j < m) {
            (true, true) | (false, true) => C64::new(h, 0.0),
            (true, false) => C64::new(0.0, h),
            (false, false) => C64::new(0.0, -h),
        }
    })
}

/// `W^{-1}`.
fn ladder_to_quadrature(m: usize) -> DMatrix<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let (ri, ci) = (i % m, j % m);
        if ri != ci {
            return C64::new(0.0, 0.0);
        }
        match (i < m, j < m) {
            (true, _) => C64::new(h, 0.0),
            (false, true) => C64::new(0.0, -h),
            (false, false) => C64::new(0.0, h),
        }
    })
}
