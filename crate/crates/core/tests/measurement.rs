use std::f64::consts::PI;

use superres::fisher::qfi_separation_closed;
use superres::oracle::{empirical_distribution, sample_counts};
use superres::povm::{
    aligned_fi, aligned_pmn, misaligned_fi, misaligned_pmn, misalignment_scan, truncated_fi_scan, IntegrationConfig,
    ScanAxis, Truncation,
};
use superres::scene::SceneParams;

fn cfg() -> IntegrationConfig {
    IntegrationConfig {
        radial_nodes: 32,
        phase_nodes: 64,
        ..Default::default()
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    for &e in &[0.05, 0.3] {
        for &c in &[0.0, 0.5] {
            let scene = SceneParams::reduced(1.0, e, 0.4, 1.1);
            let delta = scene.phases().centroid_phase() - c;
            let model = misaligned_pmn(&scene, delta, &IntegrationConfig::default(), 6, 6).unwrap();
            let batch = sample_counts(&scene, delta, 1_000_000, 2024).unwrap();
            let z = empirical_distribution(&batch, 6, 6).max_z_score(&model, 1e-4);
            assert!(z < 4.0, "eps {e}, c {c}: z = {z}");
        }
    }
}

#[test]
fn monte_carlo_second_moments_are_thermal() {
    let scene = SceneParams::reduced(1.0, 0.3, 0.0, 0.9);
    let n = 1_000_000u64;
    let m = sample_counts(&scene, scene.phases().centroid_phase(), n, 77).unwrap().moments();
    let ph = scene.phases();
    let n1 = 2.0 * 0.3 * (1.0 + ph.cos_half_dphi());
    let n2 = 2.0 * 0.3 * (1.0 - ph.cos_half_dphi());
    for (var, fourth, x) in [(m.variance.0, m.fourth.0, n1), (m.variance.1, m.fourth.1, n2)] {
        let expected = x * (1.0 + x);
        let se = ((fourth - var * var) / n as f64).sqrt();
        assert!((var - expected).abs() < 5.0 * se, "{var} vs {expected} (se {se})");
    }
}

#[test]
fn monte_carlo_respects_phase_reflection() {
    let n = 1_000_000u64;
    let a = SceneParams::reduced(1.0, 0.1, 0.0, 2.0 * PI - 0.7);
    let b = SceneParams::reduced(1.0, 0.1, 0.0, 2.0 * PI + 0.7);
    let ea = empirical_distribution(&sample_counts(&a, 0.3, n, 1).unwrap(), 3, 3);
    let eb = empirical_distribution(&sample_counts(&b, 0.3, n, 2).unwrap(), 3, 3);
    for m in 0..=3 {
        for n_ in 0..=3 {
            let (p, q) = (ea.distribution.get(m, n_), eb.distribution.get(m, n_));
            let se = (ea.std_errors[(m, n_)].powi(2) + eb.std_errors[(m, n_)].powi(2)).sqrt();
            assert!((p - q).abs() <= 5.0 * se + 1e-12);
        }
    }
}

#[test]
fn classical_information_never_exceeds_quantum() {
    for &(e, t2) in &[(0.01, 0.05), (0.1, 1.0), (0.5, 2.5), (1.0, 4.0)] {
        let scene = SceneParams::reduced(1.0, e, 0.3, t2);
        let bound = qfi_separation_closed(&scene) + 1e-6;
        for t in [Truncation::new(1, 1), Truncation::new(3, 3), Truncation::new(2, 5).with_overflow()] {
            assert!(aligned_fi(&scene, &t, 1e-5, 0.0).unwrap() <= bound);
        }
        for &c in &[0.0, 0.1, 1.0] {
            assert!(misaligned_fi(&scene, c, &cfg(), &Truncation::new(3, 3)).unwrap() <= bound);
        }
    }
}

#[test]
fn aligned_normalization_up_to_twenty_photons() {
    for &e in &[0.01, 0.2, 0.7, 1.0] {
        let d = aligned_pmn(&SceneParams::reduced(1.0, e, 0.0, 1.0), 20, 20);
        assert!(d.retained_mass() + d.tail_mass() >= 1.0 - 1e-9);
        assert!(d.tail_mass() >= -1e-9);
    }
}

#[test]
fn four_photon_window_captures_weak_source_information() {
    let scene = SceneParams::reduced(1.0, 0.1, 0.0, 0.05);
    let fi = aligned_fi(&scene, &Truncation::new(4, 4), 1e-5, 0.0).unwrap();
    assert!(fi / qfi_separation_closed(&scene) >= 0.95);
}

#[test]
fn aligned_scan_equals_zero_misalignment_scan() {
    let scene = SceneParams::reduced(1.0, 0.01, 0.0, 1.0);
    let seps = [1e-3, 1e-2, 0.1, 1.0];
    let t = Truncation::new(3, 3);
    let a = truncated_fi_scan(&scene, &seps, &t, 1e-5).unwrap();
    let b = misalignment_scan(
        &scene,
        &ScanAxis::Separation {
            c: 0.0,
            values: seps.to_vec(),
        },
        &cfg(),
        &t,
    )
    .unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.parameter, y.parameter);
        assert!((x.fi - y.fi).abs() <= 1e-4 * x.fi, "{} vs {}", x.fi, y.fi);
    }
}

#[test]
fn cutoff_past_default_leaves_information_unchanged() {
    let scene = SceneParams::reduced(1.0, 0.01, 0.0, 1e-3);
    let b0 = superres::povm::default_cutoff(0.01);
    let rows = misalignment_scan(
        &scene,
        &ScanAxis::Cutoff {
            c: 1e-3,
            theta2: 1e-3,
            values: vec![0.2, b0, 2.0 * b0],
        },
        &cfg(),
        &Truncation::new(3, 3),
    )
    .unwrap();
    assert!((rows[1].fi - rows[2].fi).abs() < 1e-4 * rows[2].fi);
    assert!(rows[0].fi < rows[2].fi);
}

#[test]
fn misalignment_threshold_near_separation() {
    let scene = SceneParams::reduced(1.0, 0.01, 0.0, 1e-3);
    let rows = misalignment_scan(
        &scene,
        &ScanAxis::Misalignment {
            theta2: 1e-3,
            values: vec![1e-4, 1e-3, 1e-2],
        },
        &cfg(),
        &Truncation::new(3, 3),
    )
    .unwrap();
    assert!(rows[0].fi > 10.0 * rows[2].fi);
    assert!(rows[0].fi > rows[1].fi && rows[1].fi > rows[2].fi);
}

#[test]
fn misaligned_information_recovers_at_wide_separation() {
    let scene = SceneParams::reduced(1.0, 0.01, 0.0, 0.1);
    let fi = misaligned_fi(&scene, 1e-3, &cfg(), &Truncation::new(3, 3)).unwrap();
    assert!((fi / 0.01 - 1.0).abs() < 0.05, "{fi}");
}
