//! Quantum Fisher information and symmetric logarithmic derivatives of
//! Gaussian states.
//!
//! The generic route works directly on the ladder-ordered covariance: with
//! `M = Sigma (x) Sigma + Omega (x) Omega / 4` acting on matrices as
//! `X -> Sigma X Sigma^T + Omega X Omega^T / 4`,
//!
//! ```text
//! F_ij = 1/2 vec(d_j Sigma)^T M^-1 vec(d_i Sigma) + (d_j l)^T Sigma^-1 (d_i l)
//! L_i  = sum_{gk} Y_gk (A_g A_k - Sigma_gk),   Y = M^-1 (d_i Sigma) / 2
//! ```
//!
//! All contractions are bilinear (plain transpose). The closed forms for the
//! two-telescope state are used as regression oracles for the numeric path.

use nalgebra::{DMatrix, DVector, LU};
use nalgebra::Dyn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{partner, symplectic_form, two_telescope_state, GaussianState, ModeTransform};
use crate::scene::SceneParams;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Central-difference step, in phase units.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A mode whose occupation eigenvalue falls below this is treated as pure.
pub const PURE_MODE_TOL: f64 = 1e-13;

/// Below this distance from a multiple of 2 pi the closed-form QFI returns its
/// zero-separation limit.
pub const QFI_LIMIT_BRANCH: f64 = 1e-6;

/// Below this distance from a multiple of 2 pi the separation SLD
/// coefficients are refused.
pub const SLD_SINGULAR_TOL: f64 = 1e-8;

/// Symmetric, positive semidefinite Fisher-information matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QfiMatrix {
    entries: DMatrix<f64>,
}

impl QfiMatrix {
    pub fn new(entries: DMatrix<f64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Reparametrize with the Jacobian `J_ab = d(old_a) / d(new_b)`.
    pub fn reparametrize(&self, jacobian: &DMatrix<f64>) -> Self {
        Self::new(jacobian.transpose() * &self.entries * jacobian)
    }

    /// Quantum Cramér-Rao bound on the estimator covariance (per copy).
    pub fn cramer_rao_bound(&self) -> Option<DMatrix<f64>> {
        self.entries.clone().try_inverse()
    }
}

/// LU factorization of the 4n^2 x 4n^2 metric `Sigma (x) Sigma + Omega (x) Omega / 4`.
pub struct MetricSolver {
    dim: usize,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl MetricSolver {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let min_eigenvalue = state.min_occupation_eigenvalue();
        if min_eigenvalue < PURE_MODE_TOL {
            return Err(Error::SingularMetric { min_eigenvalue });
        }
        let dim = state.dim();
        let sigma = state.cov();
        let omega = symplectic_form(state.n_modes());
        let n2 = dim * dim;
        let metric = DMatrix::from_fn(n2, n2, |row, col| {
            let (a, b) = (row / dim, row % dim);
            let (m, n) = (col / dim, col % dim);
            sigma[(a, m)] * sigma[(b, n)] + 0.25 * omega[(a, m)] * omega[(b, n)]
        });
        Ok(Self {
            dim,
            lu: metric.lu(),
        })
    }

    /// Solves `M vec(Y) = vec(rhs)` and returns `Y`.
    pub fn solve(&self, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if rhs.nrows() != self.dim || rhs.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.nrows(),
            });
        }
        let vec = DVector::from_iterator(self.dim * self.dim, rhs.transpose().iter().copied());
        let sol = self
            .lu
            .solve(&vec)
            .ok_or(Error::SingularMetric { min_eigenvalue: 0.0 })?;
        Ok(DMatrix::from_row_slice(self.dim, self.dim, sol.as_slice()))
    }
}

fn bilinear(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// QFI matrix from precomputed derivatives of the covariance and the mean.
pub fn qfi_from_derivatives(
    state: &GaussianState,
    d_cov: &[DMatrix<Complex64>],
    d_mean: &[DVector<Complex64>],
) -> Result<QfiMatrix> {
    let solver = MetricSolver::new(state)?;
    let solved = d_cov
        .iter()
        .map(|d| solver.solve(d))
        .collect::<Result<Vec<_>>>()?;
    let k = d_cov.len();
    let mean_moving = d_mean.iter().any(|d| d.iter().any(|z| z.norm() > 0.0));
    let cov_inv = if mean_moving {
        Some(state.cov().clone().try_inverse().ok_or(Error::SingularMetric {
            min_eigenvalue: 0.0,
        })?)
    } else {
        None
    };
    let mut f = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut value = 0.5 * bilinear(&d_cov[j], &solved[i]);
            if let Some(inv) = &cov_inv {
                value += (d_mean[j].transpose() * inv * &d_mean[i])[(0, 0)];
            }
            f[(i, j)] = value.re;
        }
    }
    let f = (&f + f.transpose()) * 0.5;
    Ok(QfiMatrix::new(f))
}

/// QFI matrix of a parametrized Gaussian family, differentiating the
/// covariance and mean by central differences with the given step.
pub fn qfi_numeric<F>(state_at: F, params: &[f64], step: f64) -> Result<QfiMatrix>
where
    F: Fn(&[f64]) -> Result<GaussianState>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let center = state_at(params)?;
    let mut d_cov = Vec::with_capacity(params.len());
    let mut d_mean = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let mut plus = params.to_vec();
        let mut minus = params.to_vec();
        plus[i] += step;
        minus[i] -= step;
        let (sp, sm) = (state_at(&plus)?, state_at(&minus)?);
        let scale = Complex64::new(0.5 / step, 0.0);
        d_cov.push((sp.cov() - sm.cov()) * scale);
        d_mean.push((sp.mean() - sm.mean()) * scale);
    }
    qfi_from_derivatives(&center, &d_cov, &d_mean)
}

/// Two-telescope state family over `(theta1, theta2)` = (centroid, separation).
pub fn two_telescope_family(scene: SceneParams) -> impl Fn(&[f64]) -> Result<GaussianState> {
    move |theta: &[f64]| two_telescope_state(&scene.with_centroid_separation(theta[0], theta[1]))
}

/// Numeric QFI matrix over `(theta1, theta2)` with the default step.
pub fn qfi_two_telescope_numeric(scene: &SceneParams) -> Result<QfiMatrix> {
    let step = DEFAULT_FD_STEP / scene.scale().abs();
    qfi_numeric(
        two_telescope_family(*scene),
        &[scene.centroid(), scene.separation()],
        step,
    )
}

fn distance_to_multiple_of_two_pi(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    r.min(TWO_PI - r)
}

/// Closed-form QFI for the separation `theta2`.
pub fn qfi_separation_closed(scene: &SceneParams) -> f64 {
    let e = scene.strength();
    let u0 = scene.scale();
    let dphi = scene.phases().dphi();
    if distance_to_multiple_of_two_pi(dphi) < QFI_LIMIT_BRANCH {
        return u0 * u0 * e;
    }
    let c = dphi.cos();
    let num = e * (1.0 + 3.0 * e + e * c);
    let den = -1.0 - 2.0 * e * (2.0 + e) + 2.0 * e * e * c;
    -u0 * u0 * num / den
}

/// Closed-form QFI for the centroid `theta1`.
pub fn qfi_centroid_closed(scene: &SceneParams) -> f64 {
    let e = scene.strength();
    let u0 = scene.scale();
    let dphi = scene.phases().dphi();
    if distance_to_multiple_of_two_pi(dphi) < QFI_LIMIT_BRANCH {
        return 4.0 * u0 * u0 * e;
    }
    let c = dphi.cos();
    -2.0 * u0 * u0 * e * (1.0 + c) / (-1.0 - e + e * c)
}

/// Quadratic operator `sum_{gk} coeff_gk A_g A_k + constant` over the ladder
/// vector `A = (a1, a1†, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticObservable {
    pub coeff: DMatrix<Complex64>,
    pub constant: f64,
}

impl QuadraticObservable {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            coeff: DMatrix::zeros(2 * n_modes, 2 * n_modes),
            constant: 0.0,
        }
    }

    /// `Tr(rho O)` for a Gaussian state.
    pub fn expectation(&self, state: &GaussianState) -> Complex64 {
        let omega = symplectic_form(state.n_modes());
        let mean = state.mean();
        let moments = state.cov() + omega * Complex64::new(0.5, 0.0) + mean * mean.transpose();
        bilinear(&self.coeff, &moments) + self.constant
    }

    /// Largest violation of the pairing `coeff(partner k, partner g) = conj coeff(g, k)`
    /// that makes the operator Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.coeff.nrows();
        let mut worst: f64 = 0.0;
        for g in 0..n {
            for k in 0..n {
                let d = self.coeff[(partner(k), partner(g))] - self.coeff[(g, k)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Same operator expressed in the output modes `d = U a`.
    pub fn in_modes(&self, t: &ModeTransform) -> Self {
        let s = t.ladder_matrix();
        let s_inv = s.adjoint();
        Self {
            coeff: s_inv.transpose() * &self.coeff * &s_inv,
            constant: self.constant,
        }
    }

    /// Largest coefficient outside the number-operator pairs `(a_i, a_i†)`.
    pub fn off_number_basis(&self) -> f64 {
        let n = self.coeff.nrows();
        let mut worst: f64 = 0.0;
        for g in 0..n {
            for k in 0..n {
                if partner(g) != k {
                    worst = worst.max(self.coeff[(g, k)].norm());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let c = (&self.coeff - &other.coeff)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        c.max((self.constant - other.constant).abs())
    }
}

/// SLD of a zero-mean Gaussian state for the covariance derivative `d_cov`.
pub fn sld_numeric(state: &GaussianState, d_cov: &DMatrix<Complex64>) -> Result<QuadraticObservable> {
    if state.mean().iter().any(|z| z.norm() > 0.0) {
        return Err(Error::InvalidParameter(
            "quadratic SLD requires a zero-mean state".into(),
        ));
    }
    let solver = MetricSolver::new(state)?;
    let coeff = solver.solve(d_cov)? * Complex64::new(0.5, 0.0);
    let coeff = (&coeff + coeff.transpose()) * Complex64::new(0.5, 0.0);
    let constant = -bilinear(&coeff, state.cov()).re;
    Ok(QuadraticObservable { coeff, constant })
}

/// Closed-form SLD coefficients for the separation:
/// `L = 2 l1 (a1† a1 + a2† a2) + 2 l2 a1 a2† + 2 l2* a1† a2 + C`.
///
/// Signs are those of the derivative with respect to `theta2 = x1 - x2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationSld {
    pub l1: f64,
    pub l2: Complex64,
    pub constant: f64,
}

/// Closed-form SLD coefficients for the centroid:
/// `L = 2 l3 a1 a2† + 2 l3* a1† a2 + C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidSld {
    pub l3: Complex64,
    pub constant: f64,
}

fn interference_sum(phi1: f64, phi2: f64) -> Complex64 {
    Complex64::cis(phi1) + Complex64::cis(phi2)
}

pub fn sld_separation_coeffs(scene: &SceneParams) -> Result<SeparationSld> {
    let e = scene.strength();
    let u0 = scene.scale();
    let ph = scene.phases();
    let dphi = ph.dphi();
    if distance_to_multiple_of_two_pi(dphi) < SLD_SINGULAR_TOL {
        return Err(Error::Singularity { dphi });
    }
    let c = dphi.cos();
    let half = 0.5 * dphi;
    let den = -1.0 - 2.0 * e * (2.0 + e) + 2.0 * e * e * c;
    let l1 = -u0 * (1.0 + 4.0 * e) / half.tan() / (4.0 * den);
    let l2 = Complex64::cis(-ph.centroid_phase()) * (u0 * (1.0 + 3.0 * e + e * c) / half.sin() / (4.0 * den));
    let s = interference_sum(ph.phi1, ph.phi2);
    let constant = -e * (8.0 * l1 + 2.0 * (l2 * s).re * 2.0);
    Ok(SeparationSld { l1, l2, constant })
}

impl SeparationSld {
    pub fn observable(&self) -> QuadraticObservable {
        let mut obs = QuadraticObservable::zero(2);
        let l1 = Complex64::new(self.l1, 0.0);
        for (g, k) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            obs.coeff[(g, k)] = l1;
        }
        obs.coeff[(0, 3)] = self.l2;
        obs.coeff[(3, 0)] = self.l2;
        obs.coeff[(1, 2)] = self.l2.conj();
        obs.coeff[(2, 1)] = self.l2.conj();
        // a† a = {a, a†}/2 - 1/2 for each of the two number operators
        obs.constant = self.constant - 2.0 * self.l1;
        obs
    }
}

pub fn sld_centroid_coeffs(scene: &SceneParams) -> CentroidSld {
    let e = scene.strength();
    let u0 = scene.scale();
    let ph = scene.phases();
    let c = ph.dphi().cos();
    let s = interference_sum(ph.phi1, ph.phi2);
    let l3 = Complex64::i() * u0 * s.conj() / (-4.0 - 4.0 * e + 4.0 * e * c);
    let constant = -e * 2.0 * (2.0 * (l3 * s).re);
    CentroidSld { l3, constant }
}

impl CentroidSld {
    pub fn observable(&self) -> QuadraticObservable {
        let mut obs = QuadraticObservable::zero(2);
        obs.coeff[(0, 3)] = self.l3;
        obs.coeff[(3, 0)] = self.l3;
        obs.coeff[(1, 2)] = self.l3.conj();
        obs.coeff[(2, 1)] = self.l3.conj();
        obs.constant = self.constant;
        obs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Separation,
    Centroid,
}

/// Beam-splitter delay whose number basis diagonalizes the SLD, in `[0, 2 pi)`.
pub fn optimal_delay(scene: &SceneParams, which: Target) -> f64 {
    let mid = scene.phases().centroid_phase();
    let delta = match which {
        Target::Separation => mid,
        Target::Centroid => mid - 0.5 * std::f64::consts::PI,
    };
    delta.rem_euclid(TWO_PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::apply_transform;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// `Tr(rho L^2)` for a zero-mean Gaussian state by Wick contraction of the
    /// ordered two-point function `G = Sigma + Omega / 2`.
    fn wick_second_moment(obs: &QuadraticObservable, state: &GaussianState) -> f64 {
        let omega = symplectic_form(state.n_modes());
        let g = state.cov() + omega * Complex64::new(0.5, 0.0);
        let y = &obs.coeff;
        let n = y.nrows();
        let mut quartic = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let w = y[(a, b)] * y[(c, d)];
                        if w.norm() == 0.0 {
                            continue;
                        }
                        quartic += w * (g[(a, b)] * g[(c, d)] + g[(a, c)] * g[(b, d)] + g[(a, d)] * g[(b, c)]);
                    }
                }
            }
        }
        let first: Complex64 = bilinear(y, &g);
        let k = obs.constant;
        (quartic + 2.0 * k * first + k * k).re
    }

    /// Covariance derivative from `dq/d theta = eps * (c1 e^{i phi1} + c2 e^{i phi2})`.
    fn cov_derivative(scene: &SceneParams, c1: f64, c2: f64) -> (GaussianState, DMatrix<Complex64>) {
        let ph = scene.phases();
        let u0 = scene.scale();
        let dq = (Complex64::cis(ph.phi1) * c1 + Complex64::cis(ph.phi2) * c2) * Complex64::new(0.0, u0 * scene.strength());
        let mut d = DMatrix::zeros(4, 4);
        d[(0, 3)] = dq;
        d[(3, 0)] = dq;
        d[(1, 2)] = dq.conj();
        d[(2, 1)] = dq.conj();
        (two_telescope_state(scene).unwrap(), d)
    }

    fn separation_derivative(scene: &SceneParams) -> (GaussianState, DMatrix<Complex64>) {
        cov_derivative(scene, 0.5, -0.5)
    }

    fn centroid_derivative(scene: &SceneParams) -> (GaussianState, DMatrix<Complex64>) {
        cov_derivative(scene, 1.0, 1.0)
    }

    fn random_scene(rng: &mut impl Rng) -> SceneParams {
        SceneParams::reduced(1.0, rng.random_range(0.01..5.0), rng.random_range(-3.0..3.0), rng.random_range(0.1..TWO_PI - 0.1))
    }

    #[test]
    fn separation_closed_form_values() {
        assert_relative_eq!(qfi_separation_closed(&SceneParams::reduced(1.0, 0.1, 0.0, 0.0)), 0.1, max_relative = 1e-15);
        assert_relative_eq!(qfi_separation_closed(&SceneParams::reduced(1.0, 0.1, 0.0, PI)), 0.1 / 1.2, max_relative = 1e-12);
        for &t in &[0.3, 1.7, 4.0] {
            let a = qfi_separation_closed(&SceneParams::reduced(1.0, 0.6, 0.0, t));
            let b = qfi_separation_closed(&SceneParams::reduced(1.0, 0.6, 0.0, t + TWO_PI));
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn centroid_closed_form_values() {
        assert_relative_eq!(qfi_centroid_closed(&SceneParams::reduced(1.0, 0.1, 0.0, 0.0)), 0.4, max_relative = 1e-15);
        assert!(qfi_centroid_closed(&SceneParams::reduced(1.0, 0.1, 0.0, PI)).abs() < 1e-15);
        // linear in strength for weak sources
        let f = |e: f64| qfi_centroid_closed(&SceneParams::reduced(1.0, e, 0.0, 1.2));
        assert_relative_eq!(f(2e-6) / f(1e-6), 2.0, max_relative = 1e-5);
    }

    #[test]
    fn separation_qfi_grows_with_strength() {
        for i in 0..60 {
            let dphi = 0.05 + i as f64 * (TWO_PI - 0.1) / 59.0;
            let mut prev = 0.0;
            for j in 0..=40 {
                let e = 1e-3 * 10f64.powf(4.0 * j as f64 / 40.0);
                let f = qfi_separation_closed(&SceneParams::reduced(1.0, e, 0.0, dphi));
                assert!(f > prev);
                prev = f;
            }
        }
    }

    #[test]
    fn per_photon_qfi_falls_with_strength_at_half_period() {
        let mut prev = f64::INFINITY;
        for &e in &[0.01, 0.1, 0.2, 1.0, 5.0] {
            let per_photon = qfi_separation_closed(&SceneParams::reduced(1.0, e, 0.0, PI)) / e;
            assert!(per_photon < prev);
            prev = per_photon;
        }
    }

    #[test]
    fn separation_qfi_symmetries() {
        for &t in &[0.2, 1.0, 2.9] {
            let f = |x: f64| qfi_separation_closed(&SceneParams::reduced(1.0, 0.8, 0.4, x));
            assert_relative_eq!(f(t), f(-t), max_relative = 1e-13);
            assert_relative_eq!(f(TWO_PI - t), f(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn numeric_qfi_matches_closed_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let scene = random_scene(&mut rng);
            let f = qfi_two_telescope_numeric(&scene).unwrap();
            assert_relative_eq!(f.get(1, 1), qfi_separation_closed(&scene), max_relative = 1e-7);
            assert_relative_eq!(f.get(0, 0), qfi_centroid_closed(&scene), max_relative = 1e-7);
            assert!(f.get(0, 1).abs() <= 1e-9 * f.get(1, 1));
        }
    }

    #[test]
    fn pure_modes_are_rejected() {
        let scene = SceneParams::reduced(1.0, 0.3, 0.0, 0.0);
        let st = two_telescope_state(&scene).unwrap();
        assert!(matches!(MetricSolver::new(&st), Err(Error::SingularMetric { .. })));
        assert!(MetricSolver::new(&st.with_thermal_floor(1e-12)).is_ok());
        assert!(matches!(MetricSolver::new(&GaussianState::vacuum(2)), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn sld_properties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let scene = random_scene(&mut rng);
            let (st, d2) = separation_derivative(&scene);
            let l = sld_numeric(&st, &d2).unwrap();
            assert!(l.expectation(&st).norm() < 1e-10);
            assert!(l.hermiticity_defect() < 1e-10);
            let f22 = qfi_separation_closed(&scene);
            assert_relative_eq!(wick_second_moment(&l, &st), f22, max_relative = 1e-7);

            let (st, d1) = centroid_derivative(&scene);
            let l = sld_numeric(&st, &d1).unwrap();
            assert_relative_eq!(wick_second_moment(&l, &st), qfi_centroid_closed(&scene), max_relative = 1e-7);
        }
        let st = two_telescope_state(&SceneParams::reduced(1.0, 0.4, 0.0, 1.0)).unwrap();
        let zero = sld_numeric(&st, &DMatrix::zeros(4, 4)).unwrap();
        assert!(zero.max_abs_diff(&QuadraticObservable::zero(2)) == 0.0);
    }

    #[test]
    fn separation_coefficients_match_numeric_sld() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let scene = random_scene(&mut rng);
            let (st, d2) = separation_derivative(&scene);
            let numeric = sld_numeric(&st, &d2).unwrap();
            let closed = sld_separation_coeffs(&scene).unwrap();
            assert!(closed.observable().max_abs_diff(&numeric) < 1e-9);
            // constant pinned by the zero-mean condition
            let ph = scene.phases();
            let s = interference_sum(ph.phi1, ph.phi2);
            let e = scene.strength();
            let expected = -e * (8.0 * closed.l1 + (2.0 * closed.l2 * s + 2.0 * closed.l2.conj() * s.conj()).re);
            assert_relative_eq!(closed.constant, expected, max_relative = 1e-14);
            assert_relative_eq!(wick_second_moment(&closed.observable(), &st), qfi_separation_closed(&scene), max_relative = 1e-9);
        }
    }

    #[test]
    fn separation_coefficients_at_half_period() {
        let closed = sld_separation_coeffs(&SceneParams::reduced(1.0, 0.2, 0.0, PI)).unwrap();
        assert!(closed.l2.im.abs() < 1e-15);
        assert!(matches!(
            sld_separation_coeffs(&SceneParams::reduced(1.0, 0.2, 0.0, 1e-9)),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn centroid_coefficients_match_numeric_sld() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let scene = random_scene(&mut rng);
            let (st, d1) = centroid_derivative(&scene);
            let numeric = sld_numeric(&st, &d1).unwrap();
            let closed = sld_centroid_coeffs(&scene).observable();
            assert!(closed.max_abs_diff(&numeric) < 1e-9);
            assert_relative_eq!(wick_second_moment(&closed, &st), qfi_centroid_closed(&scene), max_relative = 1e-7);
        }
        let at_pi = sld_centroid_coeffs(&SceneParams::reduced(1.0, 0.2, 0.3, PI));
        assert!(at_pi.l3.norm() < 1e-15);
    }

    #[test]
    fn optimal_delays() {
        let at = |phi1: f64, phi2: f64| SceneParams::reduced(1.0, 0.1, 0.5 * (phi1 + phi2), phi1 - phi2);
        assert!(optimal_delay(&at(0.0, 0.0), Target::Separation).abs() < 1e-15);
        assert_relative_eq!(optimal_delay(&at(0.3, 0.5), Target::Separation), 0.4, max_relative = 1e-12);
        assert_relative_eq!(
            optimal_delay(&at(0.3, 0.5), Target::Centroid),
            (0.4 - PI / 2.0).rem_euclid(TWO_PI),
            max_relative = 1e-12
        );
    }

    #[test]
    fn optimal_delay_diagonalizes_slds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let scene = random_scene(&mut rng);
            let t = ModeTransform::beam_splitter(optimal_delay(&scene, Target::Separation));
            let l = sld_separation_coeffs(&scene).unwrap().observable().in_modes(&t);
            assert!(l.off_number_basis() < 1e-10);

            let t = ModeTransform::beam_splitter(optimal_delay(&scene, Target::Centroid));
            let l = sld_centroid_coeffs(&scene).observable().in_modes(&t);
            assert!(l.off_number_basis() < 1e-10);
            // transformed observable keeps its expectation
            let st = apply_transform(&two_telescope_state(&scene).unwrap(), &t).unwrap();
            assert!(l.expectation(&st).norm() < 1e-10);
        }
    }
}
