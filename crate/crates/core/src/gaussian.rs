//! Zero-mean multimode Gaussian states in ladder-operator ordering.
//!
//! Operators are ordered `(a1, a1†, a2, a2†, ...)`. The covariance is the
//! symmetrized second moment `Sigma_uv = <{A_u - l_u, A_v - l_v}> / 2`, which is
//! complex symmetric (not Hermitian) in this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::SceneParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalue floor used by [`physicality_check`].
pub const PHYSICALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<Complex64>,
    cov: DMatrix<Complex64>,
}

impl GaussianState {
    pub fn new(mean: DVector<Complex64>, cov: DMatrix<Complex64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "covariance dimension must be even and positive, got {dim}"
            )));
        }
        if cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.ncols(),
            });
        }
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mean.len(),
            });
        }
        Ok(Self {
            n_modes: dim / 2,
            mean,
            cov,
        })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(&vec![0.0; n_modes])
    }

    /// Product of uncorrelated thermal modes with the given mean occupations.
    pub fn thermal(occupations: &[f64]) -> Self {
        let dim = 2 * occupations.len();
        let mut cov = DMatrix::zeros(dim, dim);
        for (i, &n) in occupations.iter().enumerate() {
            let p = Complex64::new(n + 0.5, 0.0);
            cov[(2 * i, 2 * i + 1)] = p;
            cov[(2 * i + 1, 2 * i)] = p;
        }
        Self {
            n_modes: occupations.len(),
            mean: DVector::zeros(dim),
            cov,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn mean(&self) -> &DVector<Complex64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<Complex64> {
        &self.cov
    }

    /// Adds `n_floor` thermal photons to every mode. Used to lift pure modes
    /// off the vacuum before evaluating Fisher information.
    pub fn with_thermal_floor(&self, n_floor: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_modes {
            out.cov[(2 * i, 2 * i + 1)] += n_floor;
            out.cov[(2 * i + 1, 2 * i)] += n_floor;
        }
        out
    }

    /// Hermitian matrix `H_uv = <dA_u† dA_v>` of centered moments. It is
    /// positive semidefinite exactly when the state is physical.
    pub fn occupation_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let omega = symplectic_form(self.n_modes);
        DMatrix::from_fn(dim, dim, |u, v| {
            let ub = partner(u);
            self.cov[(ub, v)] + 0.5 * omega[(ub, v)]
        })
    }

    pub fn min_occupation_eigenvalue(&self) -> f64 {
        let h = self.occupation_matrix();
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }
}

/// Index of the Hermitian partner: `a_i <-> a_i†`.
pub(crate) fn partner(index: usize) -> usize {
    index ^ 1
}

/// Commutator matrix `Omega_uv = [A_u, A_v]`, a direct sum of `i sigma_y`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<Complex64> {
    let dim = 2 * n_modes;
    let mut omega = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        omega[(2 * i, 2 * i + 1)] = ONE;
        omega[(2 * i + 1, 2 * i)] = -ONE;
    }
    omega
}

/// Covariance of the two telescope modes for source strength `eta * nbar`
/// and phases `(phi1, phi2)`.
pub fn two_telescope_covariance(strength: f64, phi1: f64, phi2: f64) -> DMatrix<Complex64> {
    let p = Complex64::new(2.0 * strength + 0.5, 0.0);
    let q = (Complex64::cis(phi1) + Complex64::cis(phi2)) * strength;
    let qc = q.conj();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            ZERO, p, ZERO, q, //
            p, ZERO, qc, ZERO, //
            ZERO, qc, ZERO, p, //
            q, ZERO, p, ZERO,
        ],
    )
}

/// State received by the two telescopes from two equal thermal sources.
pub fn two_telescope_state(scene: &SceneParams) -> Result<GaussianState> {
    scene.validate()?;
    let phases = scene.phases();
    let cov = two_telescope_covariance(scene.strength(), phases.phi1, phases.phi2);
    GaussianState::new(DVector::zeros(4), cov)
}

/// Passive linear transform `d = U a` of the annihilation operators.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    u: DMatrix<Complex64>,
}

impl ModeTransform {
    pub const UNITARITY_TOL: f64 = 1e-12;

    pub fn new(u: DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                got: u.ncols(),
            });
        }
        let n = u.nrows();
        let defect = (u.adjoint() * &u - DMatrix::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > Self::UNITARITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "mode transform is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self { u })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            u: DMatrix::identity(n_modes, n_modes),
        }
    }

    /// 50:50 beam splitter with delay `delta` on the second arm:
    /// `d1 = (a1 + e^{i delta} a2) / sqrt 2`, `d2 = (a1 - e^{i delta} a2) / sqrt 2`.
    pub fn beam_splitter(delta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = Complex64::cis(delta) * s;
        let s = Complex64::new(s, 0.0);
        Self {
            u: DMatrix::from_row_slice(2, 2, &[s, e, s, -e]),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    /// The transform lifted to the ladder vector: `A' = S A`.
    pub fn ladder_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n_modes();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                s[(2 * i, 2 * j)] = self.u[(i, j)];
                s[(2 * i + 1, 2 * j + 1)] = self.u[(i, j)].conj();
            }
        }
        s
    }
}

pub fn apply_transform(state: &GaussianState, t: &ModeTransform) -> Result<GaussianState> {
    if t.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: state.n_modes(),
            got: t.n_modes(),
        });
    }
    let s = t.ladder_matrix();
    let cov = &s * state.cov() * s.transpose();
    let mean = &s * state.mean();
    GaussianState::new(mean, cov)
}

pub fn physicality_check(state: &GaussianState) -> bool {
    state.min_occupation_eigenvalue() >= -PHYSICALITY_TOL
}

/// Mean photon number `<a_i† a_i>` of every mode (centered part plus the
/// coherent contribution `|l_i|^2`).
pub fn mode_occupations(state: &GaussianState) -> Vec<f64> {
    (0..state.n_modes())
        .map(|i| state.cov()[(2 * i, 2 * i + 1)].re - 0.5 + state.mean()[2 * i].norm_sqr())
        .collect()
}
