//! Weak thermal sources: at most one photon shared between the telescopes.

use serde::{Deserialize, Serialize};

use crate::fisher::{qfi_centroid_closed, qfi_separation_closed, QfiMatrix};
use crate::povm::aligned_pmn;
use crate::scene::SceneParams;

/// Weights of the two single-photon outcomes `|e1>`, `|e2>`:
/// `1/2 +/- 1/4 e^{-i (phi1 + phi2)/2} (e^{i phi1} + e^{i phi2})`.
pub fn eigenweights(scene: &SceneParams) -> (f64, f64) {
    let half = 0.5 * scene.phases().cos_half_dphi();
    (0.5 + half, 0.5 - half)
}

/// QFI per photon, `u0^2 diag(cos^2(dphi/2), 1/4)`.
pub fn weak_qfi(scene: &SceneParams) -> QfiMatrix {
    let u2 = scene.scale().powi(2);
    let c = scene.phases().cos_half_dphi();
    QfiMatrix::new(nalgebra::DMatrix::from_row_slice(2, 2, &[u2 * c * c, 0.0, 0.0, 0.25 * u2]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakFi {
    pub i11: f64,
    pub i22: f64,
    pub i12: f64,
}

/// Fisher information of the single-photon projections rotated by `xi` away
/// from the optimal ones. `i12` is evaluated at delay `(phi1 + phi2)/2 + xi`.
pub fn weak_fi_misaligned(scene: &SceneParams, xi: f64) -> WeakFi {
    let u2 = scene.scale().powi(2);
    let ph = scene.phases();
    let half = 0.5 * ph.dphi();
    let (s2, c2) = (half.sin().powi(2), half.cos().powi(2));
    let (sx2, cx2) = (xi.sin().powi(2), xi.cos().powi(2));
    // 1 - cos^2 xi cos^2 h, expanded so that xi = 0 gives sin^2 h / sin^2 h = 1
    let d22 = sx2 + cx2 * s2;
    let i22 = if d22 == 0.0 { 0.25 * u2 } else { cx2 * s2 / d22 * 0.25 * u2 };
    let d11 = cx2 + sx2 * s2;
    let i11 = if d11 == 0.0 { 0.0 } else { cx2 * c2 / d11 * u2 };
    WeakFi {
        i11,
        i22,
        i12: weak_fi_offdiag(scene, ph.centroid_phase() + xi),
    }
}

/// Off-diagonal Fisher information of the projections `(+/- e^{i delta}|01> + |10>)/sqrt 2`.
pub fn weak_fi_offdiag(scene: &SceneParams, delta: f64) -> f64 {
    let u2 = scene.scale().powi(2);
    let ph = scene.phases();
    let dphi = ph.dphi();
    let num = dphi.sin() * (ph.phi1 + ph.phi2 - 2.0 * delta).sin();
    if num == 0.0 {
        return 0.0;
    }
    let den = 1.0 - (0.5 * dphi).cos().powi(2) * (ph.centroid_phase() - delta).cos().powi(2);
    u2 / 8.0 * num / den
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSourceResult {
    pub d1: f64,
    pub d2: f64,
    pub qfi: [[f64; 2]; 2],
    pub fi_misaligned: Vec<(f64, WeakFi)>,
}

impl WeakSourceResult {
    pub fn evaluate(scene: &SceneParams, xis: &[f64]) -> Self {
        let (d1, d2) = eigenweights(scene);
        let q = weak_qfi(scene);
        Self {
            d1,
            d2,
            qfi: [[q.get(0, 0), q.get(0, 1)], [q.get(1, 0), q.get(1, 1)]],
            fi_misaligned: xis.iter().map(|&xi| (xi, weak_fi_misaligned(scene, xi))).collect(),
        }
    }
}

/// Comparison of the arbitrary-strength results with the weak-source ones at
/// one `(strength, dphi)` point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub strength: f64,
    pub dphi: f64,
    /// `F22 / (strength u0^2)`, which tends to 1.
    pub f22_ratio: f64,
    /// `F22 / (strength * weak F22)`: photons per weak-limit event.
    pub kappa22: f64,
    /// `F11 / (strength * weak F11)`; NaN where the weak F11 vanishes.
    pub kappa11: f64,
    /// `P(1,0) / (P(1,0) + P(0,1))` from the aligned count distribution.
    pub conditional_d1: f64,
    pub d1: f64,
}

pub fn strong_weak_consistency(u0: f64, strengths: &[f64], dphis: &[f64]) -> Vec<ConsistencyRow> {
    let mut rows = Vec::with_capacity(strengths.len() * dphis.len());
    for &e in strengths {
        for &dphi in dphis {
            let scene = SceneParams::reduced(u0, e, 0.0, dphi / u0);
            let weak = weak_qfi(&scene);
            let f22 = qfi_separation_closed(&scene);
            let f11 = qfi_centroid_closed(&scene);
            let p = aligned_pmn(&scene, 1, 1);
            rows.push(ConsistencyRow {
                strength: e,
                dphi,
                f22_ratio: f22 / (e * u0 * u0),
                kappa22: f22 / (e * weak.get(1, 1)),
                kappa11: f11 / (e * weak.get(0, 0)),
                conditional_d1: p.get(1, 0) / (p.get(1, 0) + p.get(0, 1)),
                d1: eigenweights(&scene).0,
            });
        }
    }
    rows
}
