//! Observation geometry for two point sources and one baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio `|x_i| / s0` above which the first-order phase model is flagged.
pub const PARAXIAL_LIMIT: f64 = 0.01;

/// Physical configuration of two equal-strength thermal sources observed by a
/// two-telescope interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    /// Wavevector `k` [rad / length].
    pub k: f64,
    /// Baseline length `B`.
    pub baseline: f64,
    /// Longitudinal distance to the source plane.
    pub s0: f64,
    /// Angle between the image plane and the source plane [rad].
    #[serde(default)]
    pub tilt: f64,
    /// Per-telescope transmissivity, at most 1/2.
    pub eta: f64,
    /// Mean photon number per source.
    pub nbar: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Interferometer phases of the two sources. Never wrapped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePair {
    pub phi1: f64,
    pub phi2: f64,
    /// Set when a source sits outside the paraxial regime (`|x| / s0 > 0.01`).
    pub beyond_paraxial: bool,
}

impl PhasePair {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        Self {
            phi1,
            phi2,
            beyond_paraxial: false,
        }
    }

    pub fn dphi(&self) -> f64 {
        self.phi1 - self.phi2
    }

    pub fn centroid_phase(&self) -> f64 {
        0.5 * (self.phi1 + self.phi2)
    }

    pub fn cos_half_dphi(&self) -> f64 {
        (0.5 * self.dphi()).cos()
    }
}

impl SceneParams {
    /// Scene in reduced units: phases are `u0 * x_i`, `eta * nbar = strength`,
    /// and the sources sit at centroid `theta1` with separation `theta2`.
    ///
    /// The geometry behind it is a unit baseline with `s0 = 1e4`, so positions
    /// up to 100 stay inside the paraxial regime.
    pub fn reduced(u0: f64, strength: f64, theta1: f64, theta2: f64) -> Self {
        const S0: f64 = 1.0e4;
        let (x1, x2) = positions_from_centroid_separation(theta1, theta2);
        Self {
            k: u0 * S0,
            baseline: 1.0,
            s0: S0,
            tilt: 0.0,
            eta: 0.5,
            nbar: 2.0 * strength,
            x1,
            x2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("k", self.k), ("baseline", self.baseline), ("s0", self.s0)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(0.0..=0.5).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in [0, 0.5], got {}",
                self.eta
            )));
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nbar must be non-negative, got {}",
                self.nbar
            )));
        }
        if !(self.x1.is_finite() && self.x2.is_finite() && self.tilt.is_finite()) {
            return Err(Error::InvalidParameter(
                "positions and tilt must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Effective source strength `eta * nbar`.
    pub fn strength(&self) -> f64 {
        self.eta * self.nbar
    }

    /// Phase gradient `u0 = k B cos(tilt) / s0`.
    pub fn scale(&self) -> f64 {
        self.k * self.baseline * self.tilt.cos() / self.s0
    }

    pub fn centroid(&self) -> f64 {
        0.5 * (self.x1 + self.x2)
    }

    pub fn separation(&self) -> f64 {
        self.x1 - self.x2
    }

    pub fn phases(&self) -> PhasePair {
        phases_from_positions(self)
    }

    /// Same scene with the sources moved to centroid `theta1` and separation
    /// `theta2`.
    pub fn with_centroid_separation(&self, theta1: f64, theta2: f64) -> Self {
        let (x1, x2) = positions_from_centroid_separation(theta1, theta2);
        Self { x1, x2, ..*self }
    }

    pub fn with_separation(&self, theta2: f64) -> Self {
        self.with_centroid_separation(self.centroid(), theta2)
    }

    /// Same geometry with `eta * nbar = strength` (eta is kept unless it is 0).
    pub fn with_strength(&self, strength: f64) -> Self {
        let eta = if self.eta > 0.0 { self.eta } else { 0.5 };
        Self {
            eta,
            nbar: strength / eta,
            ..*self
        }
    }
}

/// First-order phases `phi_i = k B sin(tilt) + k B cos(tilt) x_i / s0`.
pub fn phases_from_positions(scene: &SceneParams) -> PhasePair {
    let kb = scene.k * scene.baseline;
    let offset = kb * scene.tilt.sin();
    let slope = kb * scene.tilt.cos();
    let beyond_paraxial =
        scene.x1.abs() / scene.s0 > PARAXIAL_LIMIT || scene.x2.abs() / scene.s0 > PARAXIAL_LIMIT;
    PhasePair {
        phi1: offset + slope * scene.x1 / scene.s0,
        phi2: offset + slope * scene.x2 / scene.s0,
        beyond_paraxial,
    }
}

pub fn positions_from_centroid_separation(theta1: f64, theta2: f64) -> (f64, f64) {
    (theta1 + 0.5 * theta2, theta1 - 0.5 * theta2)
}

pub fn centroid_separation_from_positions(x1: f64, x2: f64) -> (f64, f64) {
    (0.5 * (x1 + x2), x1 - x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_scene(x1: f64, x2: f64) -> SceneParams {
        SceneParams {
            k: 1.0,
            baseline: 1.0,
            s0: 1.0,
            tilt: 0.0,
            eta: 0.5,
            nbar: 0.2,
            x1,
            x2,
        }
    }

    #[test]
    fn on_axis_sources_have_zero_phase() {
        let p = phases_from_positions(&unit_scene(0.0, 0.0));
        assert_eq!((p.phi1, p.phi2), (0.0, 0.0));
    }

    #[test]
    fn symmetric_sources() {
        let p = phases_from_positions(&unit_scene(0.5, -0.5));
        assert_eq!((p.phi1, p.phi2), (0.5, -0.5));
        assert!(p.beyond_paraxial);
    }

    #[test]
    fn tilted_image_plane() {
        let scene = SceneParams {
            k: 2.0,
            s0: 1.0,
            tilt: std::f64::consts::FRAC_PI_6,
            x1: 0.1,
            ..unit_scene(0.1, 0.0)
        };
        let p = phases_from_positions(&scene);
        assert_abs_diff_eq!(p.phi1, 1.0 + 0.1 * 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.phi2, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn centroid_separation_map() {
        assert_eq!(positions_from_centroid_separation(0.0, 0.0), (0.0, 0.0));
        assert_eq!(positions_from_centroid_separation(0.0, 1.0), (0.5, -0.5));
        let (x1, x2) = positions_from_centroid_separation(2.0, 0.4);
        assert_abs_diff_eq!(x1, 2.2, epsilon = 1e-15);
        assert_abs_diff_eq!(x2, 1.8, epsilon = 1e-15);
    }

    #[test]
    fn validation_rejects_bad_eta() {
        let mut s = unit_scene(0.0, 0.0);
        s.eta = 0.6;
        assert!(s.validate().is_err());
        s.eta = 0.5;
        s.nbar = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn reduced_scene_units() {
        let s = SceneParams::reduced(1.0, 0.1, 0.3, 0.7);
        assert_abs_diff_eq!(s.strength(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.scale(), 1.0, epsilon = 1e-15);
        let p = s.phases();
        assert_abs_diff_eq!(p.dphi(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.centroid_phase(), 0.3, epsilon = 1e-12);
        assert!(!p.beyond_paraxial);
    }

    proptest! {
        #[test]
        fn dphi_is_scale_times_separation(
            k in 0.1f64..10.0, b in 0.1f64..10.0, s0 in 1.0f64..100.0,
            tilt in -1.0f64..1.0, t1 in -0.5f64..0.5, t2 in -0.5f64..0.5,
        ) {
            let (x1, x2) = positions_from_centroid_separation(t1, t2);
            let scene = SceneParams { k, baseline: b, s0, tilt, x1, x2, ..unit_scene(0.0, 0.0) };
            let p = scene.phases();
            let expected = k * b * tilt.cos() * t2 / s0;
            prop_assert!((p.dphi() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
            let (c, s) = centroid_separation_from_positions(x1, x2);
            prop_assert!((c - t1).abs() < 1e-14 && (s - t2).abs() < 1e-14);
        }

        #[test]
        fn coincident_sources_have_zero_dphi(x in -1.0f64..1.0, tilt in -1.0f64..1.0) {
            let scene = SceneParams { tilt, ..unit_scene(x, x) };
            prop_assert_eq!(scene.phases().dphi(), 0.0);
        }
    }
}
