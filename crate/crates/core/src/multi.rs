//! Several thermal point sources observed by an array of detectors.
//!
//! Source `s` reaches detector `j` with transmissivity `eta[s][j]` and the
//! far-field phase `phi_sj = k (u_j x_s + v_j y_s) / s0`. The received state
//! is Gaussian with zero mean and
//! `<a_l a_m†>_sym = delta_lm / 2 + sum_s sqrt(eta_sl eta_sm) N_s e^{i (phi_sm - phi_sl)}`.
//!
//! A scene is read from JSON:
//!
//! ```json
//! {
//!   "sources":   [{"x": 1e-3, "y": 0.0, "n": 0.02}, {"x": -1e-3, "y": 0.0, "n": 0.02}],
//!   "detectors": [{"u": 0.0, "v": 0.0}, {"u": 10.0, "v": 0.0}],
//!   "eta":       [[0.5, 0.5], [0.5, 0.5]],
//!   "k": 1256.6,
//!   "s0": 1.0e4,
//!   "thermal_floor": 0.0
//! }
//! ```
//!
//! `eta` has one row per source and one column per detector. When there are
//! more detectors than sources some output combination is exactly vacuum and
//! the QFI metric is singular; `thermal_floor` adds that many background
//! photons to every detector mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{qfi_numeric, QfiMatrix, DEFAULT_FD_STEP};
use crate::gaussian::GaussianState;
use crate::scene::SceneParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub x: f64,
    pub y: f64,
    /// Mean photon number `N_s`.
    pub n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub u: f64,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiScene {
    pub sources: Vec<Source>,
    pub detectors: Vec<Detector>,
    pub eta: Vec<Vec<f64>>,
    pub k: f64,
    pub s0: f64,
    #[serde(default)]
    pub thermal_floor: f64,
}

/// Slack on the per-source loss budget `sum_j eta_sj <= 1`.
const LOSS_SLACK: f64 = 1e-12;

impl MultiScene {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.sources.is_empty() {
            return bad("at least one source is required".into());
        }
        if self.detectors.len() < 2 {
            return bad(format!("at least two detectors are required, got {}", self.detectors.len()));
        }
        if self.eta.len() != self.sources.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sources.len(),
                got: self.eta.len(),
            });
        }
        for (s, row) in self.eta.iter().enumerate() {
            if row.len() != self.detectors.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.detectors.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|&e| !(e >= 0.0)) {
                return bad(format!("transmissivities of source {s} must be non-negative"));
            }
            let total: f64 = row.iter().sum();
            if total > 1.0 + LOSS_SLACK {
                return bad(format!("source {s} has total transmissivity {total} > 1"));
            }
        }
        for (s, src) in self.sources.iter().enumerate() {
            if !(src.n >= 0.0) || !src.x.is_finite() || !src.y.is_finite() {
                return bad(format!("source {s} must have finite position and N >= 0"));
            }
        }
        if !(self.k > 0.0 && self.s0 > 0.0) {
            return bad("k and s0 must be positive".into());
        }
        if !(self.thermal_floor >= 0.0) {
            return bad("thermal_floor must be non-negative".into());
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_detectors(&self) -> usize {
        self.detectors.len()
    }

    /// `phi_sm - phi_sl`, formed from coordinate differences so that a
    /// shared `v` contributes exactly nothing.
    pub fn phase_difference(&self, s: usize, l: usize, m: usize) -> f64 {
        let (dl, dm) = (self.detectors[l], self.detectors[m]);
        let src = self.sources[s];
        self.k * ((dm.u - dl.u) * src.x + (dm.v - dl.v) * src.y) / self.s0
    }

    /// Largest phase gradient `k |baseline| / s0` over detector pairs, the
    /// scale used to convert finite-difference steps to length units.
    pub fn phase_scale(&self) -> f64 {
        let mut longest: f64 = 0.0;
        for a in &self.detectors {
            for b in &self.detectors {
                longest = longest.max((a.u - b.u).hypot(a.v - b.v));
            }
        }
        self.k * longest / self.s0
    }

    /// Two sources and two detectors equivalent to a two-telescope scene:
    /// detector 1 at the origin, detector 2 at the projected baseline.
    pub fn from_two_telescope(scene: &SceneParams) -> Self {
        let b = scene.baseline * scene.tilt.cos();
        Self {
            sources: vec![
                Source { x: scene.x1, y: 0.0, n: scene.nbar },
                Source { x: scene.x2, y: 0.0, n: scene.nbar },
            ],
            detectors: vec![Detector { u: 0.0, v: 0.0 }, Detector { u: b, v: 0.0 }],
            eta: vec![vec![scene.eta; 2]; 2],
            k: scene.k,
            s0: scene.s0,
            thermal_floor: 0.0,
        }
    }

    pub fn coordinate(&self, c: Coordinate) -> f64 {
        match c {
            Coordinate::X(s) => self.sources[s].x,
            Coordinate::Y(s) => self.sources[s].y,
        }
    }

    pub fn with_coordinate(&self, c: Coordinate, value: f64) -> Self {
        let mut out = self.clone();
        match c {
            Coordinate::X(s) => out.sources[s].x = value,
            Coordinate::Y(s) => out.sources[s].y = value,
        }
        out
    }
}

/// Source coordinate selected as an estimation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    X(usize),
    Y(usize),
}

/// `<a_l a_m†>_sym` block, without the thermal floor.
pub fn photon_number_block(ms: &MultiScene) -> DMatrix<Complex64> {
    let n = ms.n_detectors();
    DMatrix::from_fn(n, n, |l, m| {
        let mut c = Complex64::new(if l == m { 0.5 } else { 0.0 }, 0.0);
        for (s, src) in ms.sources.iter().enumerate() {
            let w = (ms.eta[s][l] * ms.eta[s][m]).sqrt() * src.n;
            if w != 0.0 {
                c += Complex64::from_polar(w, ms.phase_difference(s, l, m));
            }
        }
        c
    })
}

pub fn multi_covariance(ms: &MultiScene) -> Result<GaussianState> {
    ms.validate()?;
    let n = ms.n_detectors();
    let block = photon_number_block(ms);
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for l in 0..n {
        for m in 0..n {
            let c = block[(l, m)];
            cov[(2 * l, 2 * m + 1)] = c;
            cov[(2 * m + 1, 2 * l)] = c;
        }
    }
    let state = GaussianState::new(DVector::zeros(2 * n), cov)?;
    Ok(if ms.thermal_floor > 0.0 {
        state.with_thermal_floor(ms.thermal_floor)
    } else {
        state
    })
}

/// QFI matrix over the selected source coordinates, from central-difference
/// covariance derivatives with a step of `1e-5` in phase units.
pub fn multi_qfi(ms: &MultiScene, params: &[Coordinate]) -> Result<QfiMatrix> {
    ms.validate()?;
    for &c in params {
        let s = match c {
            Coordinate::X(s) | Coordinate::Y(s) => s,
        };
        if s >= ms.n_sources() {
            return Err(Error::InvalidParameter(format!("no source {s}")));
        }
    }
    let values: Vec<f64> = params.iter().map(|&c| ms.coordinate(c)).collect();
    let step = DEFAULT_FD_STEP / ms.phase_scale();
    let family = |p: &[f64]| {
        let mut scene = ms.clone();
        for (&c, &v) in params.iter().zip(p) {
            scene = scene.with_coordinate(c, v);
        }
        multi_covariance(&scene)
    };
    qfi_numeric(family, &values, step)
}

/// QFI for centroid `(x1 + x2)/2` and separation `x1 - x2` of a two-source
/// scene along the x axis.
pub fn multi_qfi_centroid_separation(ms: &MultiScene) -> Result<QfiMatrix> {
    if ms.n_sources() != 2 {
        return Err(Error::InvalidParameter(format!("need exactly two sources, got {}", ms.n_sources())));
    }
    let f = multi_qfi(ms, &[Coordinate::X(0), Coordinate::X(1)])?;
    let jacobian = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, -0.5]);
    Ok(f.reparametrize(&jacobian))
}
