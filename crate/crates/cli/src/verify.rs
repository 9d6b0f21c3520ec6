//! Fixed-seed consistency suite: every module checked against an
//! independent computation of the same quantity.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superres::fisher::{qfi_centroid_closed, qfi_separation_closed, qfi_two_telescope_numeric};
use superres::gaussian::two_telescope_state;
use superres::limits::conventional::angular_scene;
use superres::limits::{dirty_beam, first_null, observation_time_ratio, weak_fi_misaligned, ConventionalSettings, SamplingPattern, ARCSEC};
use superres::multi::{multi_covariance, multi_qfi_centroid_separation, MultiScene};
use superres::oracle::{empirical_distribution, sample_counts};
use superres::povm::{aligned_fi, aligned_fi_full, aligned_pmn, misaligned_fi, misaligned_pmn, IntegrationConfig, Truncation};
use superres::scene::SceneParams;

use crate::error::CliError;
use crate::table::Table;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Clone, Copy)]
enum Bound {
    /// `value <= tol`
    Below(f64),
    /// `value >= tol`
    Above(f64),
    /// `|value / reference - 1| <= tol`
    Relative(f64, f64),
}

struct Suite {
    table: Table,
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, value: f64, bound: Bound) {
        let (reference, tol, pass) = match bound {
            Bound::Below(t) => (0.0, t, value <= t),
            Bound::Above(t) => (t, t, value >= t),
            Bound::Relative(r, t) => (r, t, (value / r - 1.0).abs() <= t),
        };
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![name.into(), value.into(), reference.into(), tol.into(), pass.into()]);
    }
}

fn random_scene(rng: &mut ChaCha8Rng) -> SceneParams {
    SceneParams::reduced(1.0, rng.random_range(0.01..5.0), rng.random_range(-3.0..3.0), rng.random_range(0.1..2.0 * PI - 0.1))
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn run(seed: u64, samples: u64) -> Result<(Table, usize), CliError> {
    let mut table = Table::new("verify", &["check", "value", "reference", "tolerance", "status"]);
    table.meta("seed", seed);
    table.meta("samples", samples);
    let mut s = Suite { table, failures: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Gaussian-state QFI against closed forms
    let (mut worst, mut offdiag) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let scene = random_scene(&mut rng);
        let f = qfi_two_telescope_numeric(&scene)?;
        worst = worst.max(rel(f.get(1, 1), qfi_separation_closed(&scene)));
        worst = worst.max(rel(f.get(0, 0), qfi_centroid_closed(&scene)));
        offdiag = offdiag.max(f.get(0, 1).abs() / f.get(1, 1));
    }
    s.check("qfi_numeric_vs_closed", worst, Bound::Below(1e-7));
    s.check("qfi_offdiagonal", offdiag, Bound::Below(1e-9));

    let tiny = SceneParams::reduced(1.0, 0.1, 0.0, 1e-9);
    s.check("separation_limit", qfi_separation_closed(&tiny), Bound::Relative(0.1, 1e-6));
    s.check("centroid_limit", qfi_centroid_closed(&tiny), Bound::Relative(0.4, 1e-6));
    for e in [0.1, 1.0] {
        let f = qfi_separation_closed(&SceneParams::reduced(1.0, e, 0.0, PI)) / e;
        s.check(&format!("half_period_eps_{e}"), f, Bound::Relative(1.0 / (1.0 + 2.0 * e), 1e-9));
    }

    // photon counting
    let mut sat = 0.0f64;
    for _ in 0..5 {
        let scene = SceneParams::reduced(1.0, rng.random_range(0.01..0.5), 0.0, rng.random_range(0.1..6.0));
        sat = sat.max(rel(aligned_fi_full(&scene, 1e-5)?, qfi_separation_closed(&scene)));
    }
    s.check("aligned_fi_saturates_qfi", sat, Bound::Below(1e-4));

    let cfg = IntegrationConfig::default();
    let mut paths = 0.0f64;
    for &(e, t2) in &[(0.05, 0.7), (0.3, 2.0)] {
        let scene = SceneParams::reduced(1.0, e, 0.2, t2);
        let a = aligned_pmn(&scene, 3, 3);
        let q = misaligned_pmn(&scene, scene.phases().centroid_phase(), &cfg, 3, 3)?;
        for ((m, n), p) in a.iter() {
            paths = paths.max((q.get(m, n) - p).abs() / p);
        }
    }
    s.check("quadrature_vs_aligned", paths, Bound::Below(1e-6));

    for &e in &[0.05, 0.3] {
        for &c in &[0.0, 0.5] {
            let scene = SceneParams::reduced(1.0, e, 0.4, 1.1);
            let delta = scene.phases().centroid_phase() - c;
            let model = misaligned_pmn(&scene, delta, &cfg, 6, 6)?;
            let batch = sample_counts(&scene, delta, samples, seed)?;
            let z = empirical_distribution(&batch, 6, 6).max_z_score(&model, 1e-4);
            s.check(&format!("monte_carlo_z_eps_{e}_c_{c}"), z, Bound::Below(4.0));
        }
    }

    let weak = SceneParams::reduced(1.0, 0.1, 0.0, 1e-4);
    let fi11 = aligned_fi(&weak, &Truncation::new(1, 1), 1e-5, 0.0)?;
    s.check("on_off_fraction_of_qfi", fi11 / qfi_separation_closed(&weak), Bound::Above(0.5));

    let mis = SceneParams::reduced(1.0, 0.01, 0.0, 1e-3);
    let t3 = Truncation::new(3, 3);
    let lo = misaligned_fi(&mis, 1e-4, &cfg, &t3)?;
    let hi = misaligned_fi(&mis, 1e-2, &cfg, &t3)?;
    s.check("misalignment_drop", lo / hi, Bound::Above(10.0));

    // weak sources
    let w = SceneParams::reduced(1.0, 1e-4, 0.5, 1.0);
    s.check("weak_i22_aligned", weak_fi_misaligned(&w, 0.0).i22, Bound::Relative(0.25, 1e-12));
    s.check("weak_i12_aligned", weak_fi_misaligned(&w, 0.0).i12.abs(), Bound::Below(0.0));

    // multi-source reduction
    let scene = SceneParams::reduced(1.3, 0.4, 0.2, 0.9);
    let ms = MultiScene::from_two_telescope(&scene);
    let diff = (multi_covariance(&ms)?.cov() - two_telescope_state(&scene)?.cov())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    s.check("multi_covariance_reduction", diff, Bound::Below(1e-12));
    let f = multi_qfi_centroid_separation(&ms)?;
    s.check("multi_qfi_reduction", f.get(1, 1), Bound::Relative(qfi_separation_closed(&scene), 1e-6));

    // dirty beam
    let d = 12.0;
    let beam = dirty_beam(&SamplingPattern::rectangular(256, 1.0, d)?)?;
    let null = first_null(&beam).unwrap_or(f64::INFINITY);
    s.check("dirty_beam_null_error_cells", (null - PI / d).abs() / beam.dl, Bound::Below(1.0));

    // conventional comparison
    for (angle, target) in [(0.05, 4.0), (0.01, 30.0), (0.005, 100.0)] {
        let sc = angular_scene(5e-3, 1e4, 0.01, 2.0 * PI / 3.0, angle * ARCSEC);
        let ratio = observation_time_ratio(&sc, &ConventionalSettings::default(), &cfg)?;
        s.check(&format!("conventional_ratio_{angle}arcsec"), ratio, Bound::Relative(target, 0.3));
    }

    s.table.meta("failures", s.failures);
    Ok((s.table, s.failures))
}
