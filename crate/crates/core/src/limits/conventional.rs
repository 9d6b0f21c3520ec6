//! The fixed-delay photon-counting measurement used to sample the coherence
//! function, against which the optimal measurement is compared.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::qfi_separation_closed;
use crate::povm::{misaligned_fi, IntegrationConfig, Truncation};
use crate::scene::SceneParams;

/// One arcsecond in radians.
pub const ARCSEC: f64 = PI / (180.0 * 3600.0);

/// Misalignments `c = (phi1 + phi2)/2 - delta` of the measurement settings
/// whose Fisher informations are averaged, plus the resolved window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionalSettings {
    pub misalignments: Vec<f64>,
    pub truncation: Truncation,
}

impl Default for ConventionalSettings {
    /// Centroid phase `2 pi / 3` with the two settings at `c = 2 pi / 3` and
    /// `c = -pi / 3`, counting up to three photons per output.
    fn default() -> Self {
        Self {
            misalignments: vec![2.0 * PI / 3.0, -PI / 3.0],
            truncation: Truncation::new(3, 3),
        }
    }
}

impl ConventionalSettings {
    /// Settings given as beam-splitter delays at a known centroid phase.
    pub fn from_delays(centroid_phase: f64, delays: &[f64]) -> Self {
        Self {
            misalignments: delays.iter().map(|d| centroid_phase - d).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.misalignments.is_empty() {
            return Err(Error::InvalidParameter("at least one measurement setting is required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionalFi {
    pub per_setting: Vec<f64>,
    /// Average over settings: an equal split of the samples.
    pub combined: f64,
}

pub fn conventional_fi(scene: &SceneParams, settings: &ConventionalSettings, cfg: &IntegrationConfig) -> Result<ConventionalFi> {
    settings.validate()?;
    let per_setting = settings
        .misalignments
        .iter()
        .map(|&c| misaligned_fi(scene, c, cfg, &settings.truncation))
        .collect::<Result<Vec<_>>>()?;
    let combined = per_setting.iter().sum::<f64>() / per_setting.len() as f64;
    Ok(ConventionalFi { per_setting, combined })
}

/// Quantum Fisher information over the conventional one: the factor by which
/// the optimal measurement shortens the observation at equal precision.
pub fn observation_time_ratio(scene: &SceneParams, settings: &ConventionalSettings, cfg: &IntegrationConfig) -> Result<f64> {
    Ok(qfi_separation_closed(scene) / conventional_fi(scene, settings, cfg)?.combined)
}

/// Two sources at angular separation `angle` (radians) whose mean phase is
/// `centroid_phase`, seen at wavelength `wavelength` on baseline `baseline`.
pub fn angular_scene(wavelength: f64, baseline: f64, strength: f64, centroid_phase: f64, angle: f64) -> SceneParams {
    let k = 2.0 * PI / wavelength;
    let theta1 = centroid_phase / (k * baseline);
    let (x1, x2) = (theta1 + 0.5 * angle, theta1 - 0.5 * angle);
    SceneParams {
        k,
        baseline,
        s0: 1.0,
        tilt: 0.0,
        eta: 0.5,
        nbar: 2.0 * strength,
        x1,
        x2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegrationConfig {
        IntegrationConfig {
            radial_nodes: 32,
            phase_nodes: 64,
            ..Default::default()
        }
    }

    #[test]
    fn from_delays_matches_default_at_zero_delay() {
        let s = ConventionalSettings::from_delays(2.0 * PI / 3.0, &[0.0, PI / 2.0]);
        assert!((s.misalignments[0] - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((s.misalignments[1] - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn angular_scene_geometry() {
        let s = angular_scene(5e-3, 1e4, 0.01, 2.0 * PI / 3.0, 0.01 * ARCSEC);
        let ph = s.phases();
        assert!((ph.centroid_phase() - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((ph.dphi() - s.scale() * 0.01 * ARCSEC).abs() < 1e-15);
    }

    #[test]
    fn even_in_separation() {
        let s = SceneParams::reduced(1.0, 0.01, 2.0 * PI / 3.0, 0.4);
        let a = conventional_fi(&s, &ConventionalSettings::default(), &cfg()).unwrap();
        let b = conventional_fi(&s.with_separation(-0.4), &ConventionalSettings::default(), &cfg()).unwrap();
        assert!((a.combined - b.combined).abs() < 1e-8 * a.combined);
    }

    #[test]
    fn bounded_by_qfi_and_vanishing() {
        let settings = ConventionalSettings::default();
        let mut prev = f64::INFINITY;
        for &t2 in &[1.0, 0.3, 0.1, 0.03] {
            let s = SceneParams::reduced(1.0, 0.01, 2.0 * PI / 3.0, t2);
            let c = conventional_fi(&s, &settings, &cfg()).unwrap();
            assert!(c.combined <= qfi_separation_closed(&s) + 1e-6);
            assert!(c.combined < prev);
            prev = c.combined;
        }
        assert!(prev < 1e-3 * qfi_separation_closed(&SceneParams::reduced(1.0, 0.01, 0.0, 0.03)));
    }
}
