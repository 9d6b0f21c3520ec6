//! Photon-count statistics of the beam-splitter + number-resolving
//! measurement and the classical Fisher information they carry.
//!
//! The telescope modes are combined on a 50:50 beam splitter with delay
//! `delta` on the second arm and both outputs are counted. At the optimal
//! delay (the centroid phase) the outputs are independent thermal modes and
//! the count distribution is a product of Bose-Einstein laws. Away from it
//! the distribution is evaluated by quadrature over the coherent-state
//! mixture that defines the received state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, periodic_trapezoid};
use crate::scene::{PhasePair, SceneParams};

/// Tail probability targeted by the default amplitude cutoff.
pub const CUTOFF_TAIL: f64 = 1e-12;

/// Relative change tolerated when the radial nodes are doubled.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Product of Bose-Einstein laws at the optimal delay.
    Aligned,
    /// Quadrature over the coherent-state mixture.
    Quadrature,
    /// Relative frequencies of sampled counts.
    Empirical,
}

/// Probabilities `P(m, n)` for `m <= m_max`, `n <= n_max` plus the mass that
/// falls outside the window.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonCountDistribution {
    probs: DMatrix<f64>,
    tail_mass: f64,
    pub delta: f64,
    pub method: Method,
}

impl PhotonCountDistribution {
    pub fn new(probs: DMatrix<f64>, tail_mass: f64, delta: f64, method: Method) -> Self {
        Self {
            probs,
            tail_mass,
            delta,
            method,
        }
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.probs[(m, n)]
    }

    pub fn m_max(&self) -> usize {
        self.probs.nrows() - 1
    }

    pub fn n_max(&self) -> usize {
        self.probs.ncols() - 1
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn retained_mass(&self) -> f64 {
        self.probs.sum()
    }

    /// Mean of `m` over the window (exact when the tail is negligible).
    pub fn mean_counts(&self) -> (f64, f64) {
        let mut mm = 0.0;
        let mut mn = 0.0;
        for ((m, n), p) in self.iter() {
            mm += m as f64 * p;
            mn += n as f64 * p;
        }
        (mm, mn)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let rows = self.probs.nrows();
        (0..rows).flat_map(move |m| (0..self.probs.ncols()).map(move |n| ((m, n), self.probs[(m, n)])))
    }
}

/// Quadrature settings for [`misaligned_pmn`] and the finite-difference
/// step used for Fisher information.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    /// Amplitude cutoff `b`; `None` picks [`default_cutoff`].
    pub cutoff: Option<f64>,
    pub radial_nodes: usize,
    pub phase_nodes: usize,
    /// Finite-difference step for `dP / d theta2`, in phase units.
    pub fd_step: f64,
    /// Outcomes below `prob_floor * sum(P)` are left out of Fisher sums.
    pub prob_floor: f64,
    /// Re-run with doubled radial nodes and fail if any retained `P(m, n)`
    /// moves by more than [`CONVERGENCE_TOL`].
    pub check_convergence: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            cutoff: None,
            radial_nodes: 64,
            phase_nodes: 128,
            fd_step: 1e-5,
            prob_floor: 1e-15,
            check_convergence: true,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.cutoff {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("cutoff b must be positive, got {b}")));
            }
        }
        if self.radial_nodes < 8 || self.phase_nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 quadrature nodes per axis, got radial {} / phase {}",
                self.radial_nodes, self.phase_nodes
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "fd_step must lie in (0, 1e-2], got {}",
                self.fd_step
            )));
        }
        if !(self.prob_floor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prob_floor must be non-negative, got {}",
                self.prob_floor
            )));
        }
        Ok(())
    }

    pub fn cutoff_for(&self, strength: f64) -> f64 {
        self.cutoff.unwrap_or_else(|| default_cutoff(strength))
    }
}

/// `b = sqrt(strength * ln(1 / tail))`, floored at 0.5: the mixture weight
/// beyond `|alpha| = b` is `exp(-b^2 / strength) = tail`.
pub fn default_cutoff(strength: f64) -> f64 {
    (strength * (1.0 / CUTOFF_TAIL).ln()).sqrt().max(0.5)
}

/// Bose-Einstein probability `x^j / (1 + x)^(j + 1)` of `j` photons in a
/// thermal mode with mean `x`.
pub fn bose_einstein(x: f64, j: usize) -> f64 {
    if x == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let r = x / (1.0 + x);
    r.powi(j as i32) / (1.0 + x)
}

fn bose_einstein_row(x: f64, max: usize) -> Vec<f64> {
    let r = x / (1.0 + x);
    let mut row = Vec::with_capacity(max + 1);
    let mut p = 1.0 / (1.0 + x);
    for _ in 0..=max {
        row.push(p);
        p *= r;
    }
    row
}

/// Mean occupations of the two output modes for misalignment `c`:
/// `2 eps (1 +/- cos(dphi / 2) cos c)`.
pub fn output_occupations(strength: f64, dphi: f64, c: f64) -> (f64, f64) {
    let k = (0.5 * dphi).cos() * c.cos();
    (2.0 * strength * (1.0 + k), 2.0 * strength * (1.0 - k))
}

/// Count distribution at the optimal delay.
pub fn aligned_pmn(scene: &SceneParams, m_max: usize, n_max: usize) -> PhotonCountDistribution {
    let ph = scene.phases();
    let (n1, n2) = output_occupations(scene.strength(), ph.dphi(), 0.0);
    let row1 = bose_einstein_row(n1, m_max);
    let row2 = bose_einstein_row(n2, n_max);
    let probs = DMatrix::from_fn(m_max + 1, n_max + 1, |m, n| row1[m] * row2[n]);
    let t1 = (n1 / (1.0 + n1)).powi(m_max as i32 + 1);
    let t2 = (n2 / (1.0 + n2)).powi(n_max as i32 + 1);
    let tail_mass = t1 + t2 - t1 * t2;
    PhotonCountDistribution::new(probs, tail_mass, ph.centroid_phase(), Method::Aligned)
}

/// Linear map from source amplitudes `(alpha1, alpha2)` to the coherent
/// amplitudes of the two beam-splitter outputs.
#[derive(Clone, Copy, Debug)]
pub struct AmplitudeMap {
    rows: [[Complex64; 2]; 2],
}

impl AmplitudeMap {
    pub fn new(phases: &PhasePair, delta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // 1 +/- e^{ix} written through half angles to stay accurate near x = 0
        let plus = |x: f64| Complex64::cis(0.5 * x) * (2.0 * (0.5 * x).cos() * s);
        let minus = |x: f64| Complex64::cis(0.5 * x) * Complex64::new(0.0, -2.0 * (0.5 * x).sin() * s);
        let x1 = delta - phases.phi1;
        let x2 = delta - phases.phi2;
        Self {
            rows: [[plus(x1), plus(x2)], [minus(x1), minus(x2)]],
        }
    }

    pub fn apply(&self, a1: Complex64, a2: Complex64) -> (Complex64, Complex64) {
        (
            self.rows[0][0] * a1 + self.rows[0][1] * a2,
            self.rows[1][0] * a1 + self.rows[1][1] * a2,
        )
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Overlap `<m, n|_d (|alpha1 + alpha2> (x) |alpha1 e^{-i phi1} + alpha2 e^{-i phi2}>)`
/// with the normalized output Fock state, by binomial expansion of
/// `(d1†)^m (d2†)^n |0>` in the telescope modes.
pub fn fock_amplitude(m: usize, n: usize, alpha1: Complex64, alpha2: Complex64, phases: &PhasePair, delta: f64) -> Complex64 {
    let a1 = alpha1 + alpha2;
    let a2 = alpha1 * Complex64::cis(-phases.phi1) + alpha2 * Complex64::cis(-phases.phi2);
    let envelope = (-0.5 * (a1.norm_sqr() + a2.norm_sqr())).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..=m {
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let weight = binomial(m, j) * binomial(n, k) * sign;
            let power = (j + k) as i32;
            sum += Complex64::cis(power as f64 * delta) * weight * a1.powi((m + n) as i32 - power) * a2.powi(power);
        }
    }
    sum * envelope * 2f64.powf(-0.5 * (m + n) as f64) / (factorial(m) * factorial(n)).sqrt()
}

/// `|<m, n|_d psi>|^2` for all `m <= m_max`, `n <= n_max` from the output
/// coherent amplitudes, accumulated with weight `w` into `acc`.
fn accumulate_counts(acc: &mut [f64], b1: Complex64, b2: Complex64, w: f64, m_max: usize, n_max: usize, pn: &mut [f64]) {
    let x = b1.norm_sqr();
    let y = b2.norm_sqr();
    let mut pm = w * (-x - y).exp();
    pn[0] = 1.0;
    for n in 1..=n_max {
        pn[n] = pn[n - 1] * y / n as f64;
    }
    let cols = n_max + 1;
    for m in 0..=m_max {
        let row = &mut acc[m * cols..(m + 1) * cols];
        for (slot, &q) in row.iter_mut().zip(pn.iter()) {
            *slot += pm * q;
        }
        pm *= x / (m + 1) as f64;
    }
}

/// Phase integral `g(m, n, r1, r2)` over both source phases on an
/// `phase_nodes x phase_nodes` periodic trapezoid grid.
///
/// `|f|^2` is invariant under a common rotation of both amplitudes, so the
/// double sum collapses exactly to `2 pi` times a single sum over the relative
/// phase on the same grid.
pub fn phase_integral(map: &AmplitudeMap, r1: f64, r2: f64, phase_nodes: usize, m_max: usize, n_max: usize) -> DMatrix<f64> {
    let mut acc = vec![0.0; (m_max + 1) * (n_max + 1)];
    let mut pn = vec![0.0; n_max + 1];
    let a1 = Complex64::new(r1, 0.0);
    for (theta, w) in periodic_trapezoid(phase_nodes) {
        let (b1, b2) = map.apply(a1, Complex64::from_polar(r2, theta));
        accumulate_counts(&mut acc, b1, b2, 2.0 * std::f64::consts::PI * w, m_max, n_max, &mut pn);
    }
    DMatrix::from_row_slice(m_max + 1, n_max + 1, &acc)
}

/// Phase integral evaluated on the full two-dimensional grid with the
/// binomial-expansion amplitude. Slow; kept as a cross-check of
/// [`phase_integral`].
pub fn phase_integral_2d(phases: &PhasePair, delta: f64, r1: f64, r2: f64, phase_nodes: usize, m_max: usize, n_max: usize) -> DMatrix<f64> {
    let grid = periodic_trapezoid(phase_nodes);
    DMatrix::from_fn(m_max + 1, n_max + 1, |m, n| {
        let mut total = 0.0;
        for &(t1, w1) in &grid {
            for &(t2, w2) in &grid {
                let f = fock_amplitude(m, n, Complex64::from_polar(r1, t1), Complex64::from_polar(r2, t2), phases, delta);
                total += w1 * w2 * f.norm_sqr();
            }
        }
        total
    })
}

fn quadrature_pmn(strength: f64, map: &AmplitudeMap, cutoff: f64, radial_nodes: usize, phase_nodes: usize, m_max: usize, n_max: usize) -> DMatrix<f64> {
    let radial = gauss_legendre_on(radial_nodes, 0.0, cutoff);
    let norm = 1.0 / (std::f64::consts::PI * strength).powi(2);
    let radial_weight = |r: f64, w: f64| w * r * (-r * r / strength).exp();
    // collected in node order and summed serially so results do not depend
    // on how the work was split between threads
    let rows: Vec<DMatrix<f64>> = radial
        .par_iter()
        .map(|&(r1, w1)| {
            let mut acc = DMatrix::zeros(m_max + 1, n_max + 1);
            let wr1 = radial_weight(r1, w1);
            for &(r2, w2) in &radial {
                let w = wr1 * radial_weight(r2, w2);
                if w == 0.0 {
                    continue;
                }
                acc += phase_integral(map, r1, r2, phase_nodes, m_max, n_max) * w;
            }
            acc
        })
        .collect();
    rows.into_iter().fold(DMatrix::zeros(m_max + 1, n_max + 1), |a, b| a + b) * norm
}

/// Count distribution at an arbitrary delay, by Gauss-Legendre quadrature
/// over the source amplitudes on `[0, b]` and trapezoid quadrature over their
/// phases.
pub fn misaligned_pmn(scene: &SceneParams, delta: f64, cfg: &IntegrationConfig, m_max: usize, n_max: usize) -> Result<PhotonCountDistribution> {
    scene.validate()?;
    cfg.validate()?;
    let strength = scene.strength();
    if strength == 0.0 {
        let mut probs = DMatrix::zeros(m_max + 1, n_max + 1);
        probs[(0, 0)] = 1.0;
        return Ok(PhotonCountDistribution::new(probs, 0.0, delta, Method::Quadrature));
    }
    let map = AmplitudeMap::new(&scene.phases(), delta);
    let b = cfg.cutoff_for(strength);
    let probs = quadrature_pmn(strength, &map, b, cfg.radial_nodes, cfg.phase_nodes, m_max, n_max);
    if cfg.check_convergence {
        let fine = quadrature_pmn(strength, &map, b, 2 * cfg.radial_nodes, cfg.phase_nodes, m_max, n_max);
        let floor = cfg.prob_floor * fine.sum();
        for m in 0..=m_max {
            for n in 0..=n_max {
                let (p, q) = (probs[(m, n)], fine[(m, n)]);
                if q > floor {
                    let relative_change = (p - q).abs() / q;
                    if relative_change > CONVERGENCE_TOL {
                        return Err(Error::Convergence { m, n, relative_change });
                    }
                }
            }
        }
    }
    let tail_mass = 1.0 - probs.sum();
    Ok(PhotonCountDistribution::new(probs, tail_mass, delta, Method::Quadrature))
}

/// What happens to outcomes beyond the resolved window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IgnoredEvents {
    /// Dropped: the retained sub-distribution enters the Fisher sum as is.
    #[default]
    Discard,
    /// Lumped into one extra "overflow" outcome.
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub m_max: usize,
    pub n_max: usize,
    #[serde(default)]
    pub ignored: IgnoredEvents,
}

impl Truncation {
    pub fn new(m_max: usize, n_max: usize) -> Self {
        Self {
            m_max,
            n_max,
            ignored: IgnoredEvents::Discard,
        }
    }

    pub fn with_overflow(self) -> Self {
        Self {
            ignored: IgnoredEvents::Overflow,
            ..self
        }
    }
}

/// Classical Fisher information about `theta2` of a parametrized count
/// distribution, `sum (dP / d theta2)^2 / P` over the truncation window.
///
/// `step` is the central-difference step in `theta2` units; outcomes with
/// `P < prob_floor * sum(P)` are skipped.
pub fn classical_fi<F>(dist_at: F, theta2: f64, step: f64, prob_floor: f64, truncation: &Truncation) -> Result<f64>
where
    F: Fn(f64) -> Result<PhotonCountDistribution>,
{
    let center = dist_at(theta2)?;
    let plus = dist_at(theta2 + step)?;
    let minus = dist_at(theta2 - step)?;
    for d in [&center, &plus, &minus] {
        if d.m_max() < truncation.m_max || d.n_max() < truncation.n_max {
            return Err(Error::InvalidParameter(format!(
                "distribution window {}x{} is smaller than the truncation {}x{}",
                d.m_max(),
                d.n_max(),
                truncation.m_max,
                truncation.n_max
            )));
        }
    }
    let window = |d: &PhotonCountDistribution| d.probs().view((0, 0), (truncation.m_max + 1, truncation.n_max + 1)).sum();
    let floor = prob_floor * window(&center);
    let mut fi = 0.0;
    for m in 0..=truncation.m_max {
        for n in 0..=truncation.n_max {
            let p = center.get(m, n);
            if p <= floor || p <= 0.0 {
                continue;
            }
            let dp = (plus.get(m, n) - minus.get(m, n)) / (2.0 * step);
            fi += dp * dp / p;
        }
    }
    if truncation.ignored == IgnoredEvents::Overflow {
        let overflow = |d: &PhotonCountDistribution| 1.0 - window(d);
        let p = overflow(&center);
        if p > floor && p > 0.0 {
            let dp = (overflow(&plus) - overflow(&minus)) / (2.0 * step);
            fi += dp * dp / p;
        }
    }
    Ok(fi)
}

/// Window size at which both aligned Bose-Einstein tails drop below `tail`.
pub fn full_window(scene: &SceneParams, tail: f64) -> usize {
    let (n1, _) = output_occupations(scene.strength(), 0.0, 0.0);
    let r = n1 / (1.0 + n1);
    if r == 0.0 {
        return 1;
    }
    ((tail.ln() / r.ln()).ceil() as usize).max(1)
}

/// Fisher information of the aligned measurement, truncated as requested.
/// `fd_step` is in phase units.
pub fn aligned_fi(scene: &SceneParams, truncation: &Truncation, fd_step: f64, prob_floor: f64) -> Result<f64> {
    let step = fd_step / scene.scale().abs();
    let (m_max, n_max) = (truncation.m_max, truncation.n_max);
    classical_fi(|t2| Ok(aligned_pmn(&scene.with_separation(t2), m_max, n_max)), scene.separation(), step, prob_floor, truncation)
}

/// Aligned Fisher information with a window wide enough that the ignored
/// tail is below `1e-12`.
pub fn aligned_fi_full(scene: &SceneParams, fd_step: f64) -> Result<f64> {
    let w = full_window(scene, 1e-12);
    aligned_fi(scene, &Truncation::new(w, w), fd_step, 0.0)
}

/// Fisher information with the delay held at `centroid phase - c` while the
/// separation varies.
pub fn misaligned_fi(scene: &SceneParams, c: f64, cfg: &IntegrationConfig, truncation: &Truncation) -> Result<f64> {
    let delta = scene.phases().centroid_phase() - c;
    let step = cfg.fd_step / scene.scale().abs();
    let (m_max, n_max) = (truncation.m_max, truncation.n_max);
    classical_fi(
        |t2| misaligned_pmn(&scene.with_separation(t2), delta, cfg, m_max, n_max),
        scene.separation(),
        step,
        cfg.prob_floor,
        truncation,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiRow {
    pub parameter: f64,
    pub fi: f64,
}

/// Aligned Fisher information over separations with only `m <= M`, `n <= N`
/// resolved.
pub fn truncated_fi_scan(scene: &SceneParams, separations: &[f64], truncation: &Truncation, fd_step: f64) -> Result<Vec<FiRow>> {
    separations
        .par_iter()
        .map(|&t2| {
            Ok(FiRow {
                parameter: t2,
                fi: aligned_fi(&scene.with_separation(t2), truncation, fd_step, 0.0)?,
            })
        })
        .collect()
}

/// Which quantity a misalignment scan sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    /// FI against separation at fixed misalignment.
    Separation { c: f64, values: Vec<f64> },
    /// FI against misalignment at fixed separation.
    Misalignment { theta2: f64, values: Vec<f64> },
    /// FI against the amplitude cutoff `b`.
    Cutoff { c: f64, theta2: f64, values: Vec<f64> },
}

pub fn misalignment_scan(scene: &SceneParams, axis: &ScanAxis, cfg: &IntegrationConfig, truncation: &Truncation) -> Result<Vec<FiRow>> {
    let row = |param: f64| -> Result<FiRow> {
        let fi = match axis {
            ScanAxis::Separation { c, .. } => misaligned_fi(&scene.with_separation(param), *c, cfg, truncation)?,
            ScanAxis::Misalignment { theta2, .. } => misaligned_fi(&scene.with_separation(*theta2), param, cfg, truncation)?,
            ScanAxis::Cutoff { c, theta2, .. } => {
                let cfg = IntegrationConfig { cutoff: Some(param), ..*cfg };
                misaligned_fi(&scene.with_separation(*theta2), *c, &cfg, truncation)?
            }
        };
        Ok(FiRow { parameter: param, fi })
    };
    let values = match axis {
        ScanAxis::Separation { values, .. } | ScanAxis::Misalignment { values, .. } | ScanAxis::Cutoff { values, .. } => values,
    };
    values.par_iter().map(|&v| row(v)).collect()
}
