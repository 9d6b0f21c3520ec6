//! Run configuration: an optional JSON document merged with command-line
//! flags. Flags win over the file, the file wins over built-in defaults.

use std::path::Path;

use serde::Deserialize;
use superres::multi::{Coordinate, MultiScene};
use superres::povm::{IgnoredEvents, IntegrationConfig};
use superres::scene::SceneParams;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub log: Option<bool>,
}

impl RangeSpec {
    /// Fields of `self` take precedence over `other`.
    pub fn or(self, other: RangeSpec) -> RangeSpec {
        RangeSpec {
            start: self.start.or(other.start),
            stop: self.stop.or(other.stop),
            points: self.points.or(other.points),
            log: self.log.or(other.log),
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let (start, stop) = match (self.start, self.stop) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::Config("scan range needs start and stop".into())),
        };
        let points = self.points.unwrap_or(2);
        if points < 2 {
            return Err(CliError::Config(format!("scan needs at least 2 points, got {points}")));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(CliError::Config("scan bounds must be finite".into()));
        }
        let log = self.log.unwrap_or(false);
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::Config("log scans need positive bounds".into()));
        }
        let last = (points - 1) as f64;
        Ok((0..points)
            .map(|i| {
                let t = i as f64 / last;
                if log {
                    (start.ln() + t * (stop.ln() - start.ln())).exp()
                } else {
                    start + t * (stop - start)
                }
            })
            .collect())
    }
}

/// Contents of the `--config` document. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scene: Option<SceneParams>,
    pub strength: Option<f64>,
    pub strengths: Option<Vec<f64>>,
    pub u0: Option<f64>,
    pub theta1: Option<f64>,
    pub range: Option<RangeSpec>,
    pub integration: Option<IntegrationConfig>,
    pub m_max: Option<usize>,
    pub n_max: Option<usize>,
    pub windows: Option<Vec<usize>>,
    pub ignored: Option<IgnoredEvents>,
    pub c: Option<f64>,
    pub theta2: Option<f64>,
    pub axis: Option<String>,
    pub wavelength: Option<f64>,
    pub baseline: Option<f64>,
    pub centroid_phase: Option<f64>,
    pub angles_arcsec: Option<Vec<f64>>,
    pub delays: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub table: Option<String>,
    pub multi: Option<MultiScene>,
    /// Coordinate selectors such as `"x0"`.
    pub params: Option<Vec<String>>,
    pub grid: Option<usize>,
    pub spacing: Option<f64>,
    pub half_width: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Integration overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrationOverrides {
    pub cutoff: Option<f64>,
    pub radial_nodes: Option<usize>,
    pub phase_nodes: Option<usize>,
    pub fd_step: Option<f64>,
    pub prob_floor: Option<f64>,
    pub no_convergence_check: bool,
}

pub fn integration(file: &FileConfig, flags: &IntegrationOverrides) -> Result<IntegrationConfig, CliError> {
    let base = file.integration.unwrap_or_default();
    let cfg = IntegrationConfig {
        cutoff: flags.cutoff.or(base.cutoff),
        radial_nodes: flags.radial_nodes.unwrap_or(base.radial_nodes),
        phase_nodes: flags.phase_nodes.unwrap_or(base.phase_nodes),
        fd_step: flags.fd_step.unwrap_or(base.fd_step),
        prob_floor: flags.prob_floor.unwrap_or(base.prob_floor),
        check_convergence: base.check_convergence && !flags.no_convergence_check,
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Scene flags shared by the two-telescope subcommands.
#[derive(Clone, Copy, Debug, Default)]
pub struct SceneOverrides {
    pub strength: Option<f64>,
    pub u0: Option<f64>,
    pub theta1: Option<f64>,
}

/// Base scene: the `scene` document if present, otherwise reduced units with
/// phase gradient `u0`; the strength flag overrides either.
pub fn scene(file: &FileConfig, flags: &SceneOverrides, default_strength: f64) -> Result<SceneParams, CliError> {
    let strength = flags.strength.or(file.strength);
    let scene = match file.scene {
        Some(s) => match strength {
            Some(e) => s.with_strength(e),
            None => s,
        },
        None => SceneParams::reduced(
            flags.u0.or(file.u0).unwrap_or(1.0),
            strength.unwrap_or(default_strength),
            flags.theta1.or(file.theta1).unwrap_or(0.0),
            0.0,
        ),
    };
    scene.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if scene.scale() == 0.0 {
        return Err(CliError::Config("scene has zero phase gradient".into()));
    }
    Ok(scene)
}

/// Parses `x0,y1,...` into coordinate selectors.
pub fn parse_params(text: &str) -> Result<Vec<Coordinate>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            let (axis, idx) = t.split_at(1.min(t.len()));
            let idx: usize = idx
                .parse()
                .map_err(|_| CliError::Config(format!("bad parameter selector '{t}' (expected x0, y1, ...)")))?;
            match axis {
                "x" => Ok(Coordinate::X(idx)),
                "y" => Ok(Coordinate::Y(idx)),
                _ => Err(CliError::Config(format!("bad parameter selector '{t}' (expected x0, y1, ...)"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_ranges() {
        let r = RangeSpec { start: Some(0.0), stop: Some(1.0), points: Some(5), log: None };
        assert_eq!(r.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = RangeSpec { start: Some(1e-3), stop: Some(1.0), points: Some(4), log: Some(true) };
        let v = r.values().unwrap();
        assert!((v[1] - 1e-2).abs() < 1e-15 && (v[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bad_ranges() {
        assert!(RangeSpec { start: Some(0.0), stop: Some(1.0), points: Some(1), log: None }.values().is_err());
        assert!(RangeSpec { start: Some(0.0), stop: Some(1.0), points: Some(3), log: Some(true) }.values().is_err());
        assert!(RangeSpec::default().values().is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let flags = RangeSpec { points: Some(7), ..Default::default() };
        let file = RangeSpec { start: Some(1.0), stop: Some(2.0), points: Some(3), log: None };
        let r = flags.or(file);
        assert_eq!((r.start, r.points), (Some(1.0), Some(7)));
    }

    #[test]
    fn coordinate_selectors() {
        assert_eq!(parse_params("x0, y1").unwrap(), vec![Coordinate::X(0), Coordinate::Y(1)]);
        assert!(parse_params("z0").is_err());
        assert!(parse_params("x").is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"strenght": 0.1}"#).is_err());
        let f: FileConfig = serde_json::from_str(r#"{"strength": 0.1, "range": {"start": 0.1, "stop": 1, "points": 3}}"#).unwrap();
        assert_eq!(f.strength, Some(0.1));
    }
}
