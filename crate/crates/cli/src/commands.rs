use std::f64::consts::PI;

use superres::fisher::{qfi_centroid_closed, qfi_separation_closed};
use superres::limits::conventional::angular_scene;
use superres::limits::dirty_beam::to_pgm;
use superres::limits::{
    conventional_fi, dirty_beam, eigenweights, first_null, strong_weak_consistency, weak_fi_misaligned, weak_qfi,
    ConventionalSettings, SamplingPattern, ARCSEC,
};
use superres::multi::{multi_covariance, multi_qfi, multi_qfi_centroid_separation, Coordinate, Detector, MultiScene, Source};
use superres::gaussian::physicality_check;
use superres::oracle::{sample_counts, sample_raw};
use superres::povm::{
    aligned_pmn, misaligned_pmn, misalignment_scan, truncated_fi_scan, IgnoredEvents, ScanAxis, Truncation,
};
use superres::scene::SceneParams;

use crate::config::{self, FileConfig, RangeSpec};
use crate::error::CliError;
use crate::table::{Cell, Table};
use crate::{verify, Axis, Command, Ignored, WeakTable};

type Outcome = (Table, Result<(), CliError>);

fn range(flags: &crate::RangeArgs, file: &FileConfig, default: RangeSpec) -> Result<Vec<f64>, CliError> {
    flags.spec().or(file.range.unwrap_or_default()).or(default).values()
}

fn default_range(start: f64, stop: f64, points: usize, log: bool) -> RangeSpec {
    RangeSpec {
        start: Some(start),
        stop: Some(stop),
        points: Some(points),
        log: Some(log),
    }
}

fn scene_meta(t: &mut Table, scene: &SceneParams) {
    t.meta_json("scene", scene);
    t.meta("u0", crate::table::format_float(scene.scale()));
}

pub fn dispatch(cmd: &Command, file: &FileConfig, seed: u64) -> Result<Outcome, CliError> {
    let ok = |t: Table| Ok((t, Ok(())));
    match cmd {
        Command::QfiScan { scene, range: r, strengths } => ok(qfi_scan(file, scene, r, strengths.as_deref())?),
        Command::PmnScan { scene, range: r, quad, m_max, n_max, c } => {
            ok(pmn_scan(file, scene, r, quad, *m_max, *n_max, *c)?)
        }
        Command::TruncatedFi { scene, range: r, windows, ignored } => {
            ok(truncated_fi(file, scene, r, windows.as_deref(), *ignored)?)
        }
        Command::CutoffScan { scene, range: r, quad, c, dphi } => ok(cutoff_scan(file, scene, r, quad, *c, *dphi)?),
        Command::MisalignmentScan { scene, range: r, quad, axis, c, dphi } => {
            ok(misalignment(file, scene, r, quad, *axis, *c, *dphi)?)
        }
        Command::CompareConventional {
            range: r,
            quad,
            strength,
            wavelength,
            baseline,
            centroid_phase,
            angles,
            delays,
        } => ok(compare_conventional(
            file,
            r,
            quad,
            *strength,
            *wavelength,
            *baseline,
            *centroid_phase,
            angles.as_deref(),
            delays.as_deref(),
        )?),
        Command::WeakLimit { scene, range: r, table, xi, strengths } => {
            ok(weak_limit(file, scene, r, *table, xi.as_deref(), strengths.as_deref())?)
        }
        Command::DirtyBeam { grid, spacing, half_width, pgm } => ok(dirty(file, *grid, *spacing, *half_width, pgm.as_ref())?),
        Command::MultiQfi { params, centroid_separation } => ok(multi(file, params.as_deref(), *centroid_separation)?),
        Command::Sample { scene, dphi, c, samples, raw } => ok(sample(file, scene, *dphi, *c, *samples, *raw, seed)?),
        Command::Verify { samples } => {
            let (table, failures) = verify::run(seed, samples.or(file.samples).unwrap_or(verify::DEFAULT_SAMPLES))?;
            let outcome = if failures == 0 { Ok(()) } else { Err(CliError::VerifyFailed(failures)) };
            Ok((table, outcome))
        }
    }
}

fn qfi_scan(file: &FileConfig, s: &crate::SceneArgs, r: &crate::RangeArgs, strengths: Option<&[f64]>) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.2)?;
    let strengths = strengths
        .map(<[f64]>::to_vec)
        .or_else(|| file.strengths.clone())
        .unwrap_or_else(|| vec![0.2, 1.0, 5.0]);
    let dphis = range(r, file, default_range(0.01, 4.0 * PI, 200, false))?;
    let u0 = base.scale();
    let mut t = Table::new("qfi-scan", &["strength", "dphi", "theta2", "f22", "f11", "f22_normalized", "f11_normalized"]);
    scene_meta(&mut t, &base);
    t.meta("normalization", "f22 / (strength u0^2), f11 / (4 strength u0^2)");
    for &e in &strengths {
        let scene = base.with_strength(e);
        for &d in &dphis {
            let sc = scene.with_separation(d / u0);
            let (f22, f11) = (qfi_separation_closed(&sc), qfi_centroid_closed(&sc));
            let unit = e * u0 * u0;
            t.push(vec![e.into(), d.into(), (d / u0).into(), f22.into(), f11.into(), (f22 / unit).into(), (f11 / (4.0 * unit)).into()]);
        }
    }
    Ok(t)
}

fn pmn_columns(m_max: usize, n_max: usize) -> Vec<String> {
    let mut cols = vec!["dphi".to_string(), "theta2".to_string()];
    for m in 0..=m_max {
        for n in 0..=n_max {
            cols.push(format!("p_{m}_{n}"));
        }
    }
    cols.push("tail".into());
    cols
}

fn pmn_scan(
    file: &FileConfig,
    s: &crate::SceneArgs,
    r: &crate::RangeArgs,
    q: &crate::QuadArgs,
    m_max: Option<usize>,
    n_max: Option<usize>,
    c: Option<f64>,
) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.1)?;
    let m_max = m_max.or(file.m_max).unwrap_or(3);
    let n_max = n_max.or(file.n_max).unwrap_or(3);
    let c = c.or(file.c);
    let cfg = config::integration(file, &q.overrides())?;
    let dphis = range(r, file, default_range(0.01, 4.0 * PI, 200, false))?;
    let u0 = base.scale();
    let mut t = Table::new("pmn-scan", &pmn_columns(m_max, n_max));
    scene_meta(&mut t, &base);
    match c {
        Some(c) => {
            t.meta("method", "quadrature");
            t.meta("c", c);
            t.meta_json("integration", &cfg);
        }
        None => t.meta("method", "aligned"),
    }
    for &d in &dphis {
        let sc = base.with_separation(d / u0);
        let dist = match c {
            Some(c) => misaligned_pmn(&sc, sc.phases().centroid_phase() - c, &cfg, m_max, n_max)?,
            None => aligned_pmn(&sc, m_max, n_max),
        };
        let mut row: Vec<Cell> = vec![d.into(), (d / u0).into()];
        for m in 0..=m_max {
            for n in 0..=n_max {
                row.push(dist.get(m, n).into());
            }
        }
        row.push(dist.tail_mass().into());
        t.push(row);
    }
    Ok(t)
}

fn truncated_fi(
    file: &FileConfig,
    s: &crate::SceneArgs,
    r: &crate::RangeArgs,
    windows: Option<&[usize]>,
    ignored: Option<Ignored>,
) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.1)?;
    let windows = windows
        .map(<[usize]>::to_vec)
        .or_else(|| file.windows.clone())
        .unwrap_or_else(|| vec![1, 2, 3, 4]);
    let ignored = match ignored {
        Some(Ignored::Discard) => IgnoredEvents::Discard,
        Some(Ignored::Overflow) => IgnoredEvents::Overflow,
        None => file.ignored.unwrap_or_default(),
    };
    let dphis = range(r, file, default_range(0.01, 4.0 * PI - 0.01, 100, false))?;
    let u0 = base.scale();
    let fd = file.integration.unwrap_or_default().fd_step;
    let mut t = Table::new("truncated-fi", &["m_max", "n_max", "dphi", "theta2", "fi", "qfi", "ratio"]);
    scene_meta(&mut t, &base);
    t.meta_json("ignored", &ignored);
    for &w in &windows {
        let trunc = Truncation { m_max: w, n_max: w, ignored };
        let seps: Vec<f64> = dphis.iter().map(|d| d / u0).collect();
        let rows = truncated_fi_scan(&base, &seps, &trunc, fd)?;
        for (row, &d) in rows.iter().zip(&dphis) {
            let qfi = qfi_separation_closed(&base.with_separation(row.parameter));
            t.push(vec![w.into(), w.into(), d.into(), row.parameter.into(), row.fi.into(), qfi.into(), (row.fi / qfi).into()]);
        }
    }
    Ok(t)
}

fn cutoff_scan(
    file: &FileConfig,
    s: &crate::SceneArgs,
    r: &crate::RangeArgs,
    q: &crate::QuadArgs,
    c: Option<f64>,
    dphi: Option<f64>,
) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.01)?;
    let cfg = config::integration(file, &q.overrides())?;
    let c = c.or(file.c).unwrap_or(1e-3);
    let u0 = base.scale();
    let theta2 = dphi.map(|d| d / u0).or(file.theta2).unwrap_or(1e-3 / u0);
    let bs = range(r, file, default_range(0.05, 1.0, 20, false))?;
    let trunc = Truncation::new(file.m_max.unwrap_or(3), file.n_max.unwrap_or(3));
    let mut t = Table::new("cutoff-scan", &["b", "fi", "p_0_0", "p_1_0", "p_0_1", "retained"]);
    scene_meta(&mut t, &base);
    t.meta("c", c);
    t.meta("theta2", theta2);
    t.meta_json("integration", &cfg);
    let axis = ScanAxis::Cutoff { c, theta2, values: bs.clone() };
    let fis = misalignment_scan(&base, &axis, &cfg, &trunc)?;
    let sc = base.with_separation(theta2);
    let delta = sc.phases().centroid_phase() - c;
    for (row, &b) in fis.iter().zip(&bs) {
        let cfg_b = superres::povm::IntegrationConfig { cutoff: Some(b), ..cfg };
        let d = misaligned_pmn(&sc, delta, &cfg_b, trunc.m_max, trunc.n_max)?;
        t.push(vec![b.into(), row.fi.into(), d.get(0, 0).into(), d.get(1, 0).into(), d.get(0, 1).into(), d.retained_mass().into()]);
    }
    Ok(t)
}

fn misalignment(
    file: &FileConfig,
    s: &crate::SceneArgs,
    r: &crate::RangeArgs,
    q: &crate::QuadArgs,
    axis: Option<Axis>,
    c: Option<f64>,
    dphi: Option<f64>,
) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.01)?;
    let cfg = config::integration(file, &q.overrides())?;
    let u0 = base.scale();
    let axis = match (axis, file.axis.as_deref()) {
        (Some(a), _) => a,
        (None, None) | (None, Some("separation")) => Axis::Separation,
        (None, Some("misalignment")) => Axis::Misalignment,
        (None, Some(other)) => return Err(CliError::Config(format!("unknown axis '{other}'"))),
    };
    let trunc = Truncation::new(file.m_max.unwrap_or(3), file.n_max.unwrap_or(3));
    let (scan, name) = match axis {
        Axis::Separation => {
            let c = c.or(file.c).unwrap_or(1e-3);
            let dphis = range(r, file, default_range(1e-4, 1.0, 25, true))?;
            (ScanAxis::Separation { c, values: dphis.iter().map(|d| d / u0).collect() }, "theta2")
        }
        Axis::Misalignment => {
            let theta2 = dphi.map(|d| d / u0).or(file.theta2).unwrap_or(1e-3 / u0);
            let cs = range(r, file, default_range(1e-5, 1e-1, 25, true))?;
            (ScanAxis::Misalignment { theta2, values: cs }, "c")
        }
    };
    let mut t = Table::new("misalignment-scan", &[name, "fi", "qfi", "ratio"]);
    scene_meta(&mut t, &base);
    t.meta_json("axis", &scan);
    t.meta_json("integration", &cfg);
    for row in misalignment_scan(&base, &scan, &cfg, &trunc)? {
        let theta2 = match &scan {
            ScanAxis::Misalignment { theta2, .. } => *theta2,
            _ => row.parameter,
        };
        let qfi = qfi_separation_closed(&base.with_separation(theta2));
        t.push(vec![row.parameter.into(), row.fi.into(), qfi.into(), (row.fi / qfi).into()]);
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn compare_conventional(
    file: &FileConfig,
    r: &crate::RangeArgs,
    q: &crate::QuadArgs,
    strength: Option<f64>,
    wavelength: Option<f64>,
    baseline: Option<f64>,
    centroid_phase: Option<f64>,
    angles: Option<&[f64]>,
    delays: Option<&[f64]>,
) -> Result<Table, CliError> {
    let cfg = config::integration(file, &q.overrides())?;
    let strength = strength.or(file.strength).unwrap_or(0.01);
    let wavelength = wavelength.or(file.wavelength).unwrap_or(5e-3);
    let baseline = baseline.or(file.baseline).unwrap_or(1e4);
    let centroid = centroid_phase.or(file.centroid_phase).unwrap_or(2.0 * PI / 3.0);
    let angles = match angles.map(<[f64]>::to_vec).or_else(|| file.angles_arcsec.clone()) {
        Some(a) => a,
        None => range(r, file, default_range(1e-3, 1.0, 25, true))?,
    };
    let settings = match delays.map(<[f64]>::to_vec).or_else(|| file.delays.clone()) {
        Some(d) => ConventionalSettings::from_delays(centroid, &d),
        None => ConventionalSettings::default(),
    };
    let mut cols = vec!["angle_arcsec".to_string(), "dphi".into(), "qfi".into()];
    for k in 0..settings.misalignments.len() {
        cols.push(format!("fi_setting_{k}"));
    }
    cols.extend(["fi_conventional".into(), "ratio".into()]);
    let mut t = Table::new("compare-conventional", &cols);
    t.meta("strength", strength);
    t.meta("wavelength", wavelength);
    t.meta("baseline", baseline);
    t.meta("centroid_phase", centroid);
    t.meta_json("misalignments", &settings.misalignments);
    t.meta("combination", "average of per-setting FI");
    t.meta_json("integration", &cfg);
    for &a in &angles {
        if a == 0.0 {
            return Err(CliError::Config("angular separation must be nonzero".into()));
        }
        let scene = angular_scene(wavelength, baseline, strength, centroid, a * ARCSEC);
        let conv = conventional_fi(&scene, &settings, &cfg)?;
        let qfi = qfi_separation_closed(&scene);
        let mut row: Vec<Cell> = vec![a.into(), scene.phases().dphi().into(), qfi.into()];
        row.extend(conv.per_setting.iter().map(|&f| Cell::from(f)));
        row.push(conv.combined.into());
        row.push((qfi / conv.combined).into());
        t.push(row);
    }
    Ok(t)
}

fn weak_limit(
    file: &FileConfig,
    s: &crate::SceneArgs,
    r: &crate::RangeArgs,
    which: Option<WeakTable>,
    xi: Option<&[f64]>,
    strengths: Option<&[f64]>,
) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 1e-4)?;
    let u0 = base.scale();
    let which = match (which, file.table.as_deref()) {
        (Some(w), _) => w,
        (None, None) | (None, Some("formulas")) => WeakTable::Formulas,
        (None, Some("consistency")) => WeakTable::Consistency,
        (None, Some(other)) => return Err(CliError::Config(format!("unknown weak-limit table '{other}'"))),
    };
    let dphis = range(r, file, default_range(0.01, 2.0 * PI - 0.01, 100, false))?;
    match which {
        WeakTable::Formulas => {
            let xis = xi.map(<[f64]>::to_vec).or_else(|| file.xi.clone()).unwrap_or_else(|| vec![0.0, 0.05, 0.1, 0.5]);
            let mut t = Table::new("weak-limit", &["dphi", "xi", "d1", "d2", "f11", "f22", "i11", "i22", "i12"]);
            scene_meta(&mut t, &base);
            for &d in &dphis {
                let sc = base.with_separation(d / u0);
                let (d1, d2) = eigenweights(&sc);
                let f = weak_qfi(&sc);
                for &x in &xis {
                    let i = weak_fi_misaligned(&sc, x);
                    t.push(vec![d.into(), x.into(), d1.into(), d2.into(), f.get(0, 0).into(), f.get(1, 1).into(), i.i11.into(), i.i22.into(), i.i12.into()]);
                }
            }
            Ok(t)
        }
        WeakTable::Consistency => {
            let es = strengths
                .map(<[f64]>::to_vec)
                .or_else(|| file.strengths.clone())
                .unwrap_or_else(|| vec![1e-3, 1e-4, 1e-5]);
            let rows = strong_weak_consistency(u0, &es, &dphis);
            let mut t = Table::new(
                "weak-limit",
                &["strength", "dphi", "f22_ratio", "kappa22", "kappa11", "conditional_d1", "d1"],
            );
            t.meta("u0", u0);
            let mut k: Vec<f64> = rows.iter().map(|r| r.kappa22).collect();
            k.sort_by(f64::total_cmp);
            t.meta("fitted_photons_per_weak_event", k[k.len() / 2]);
            for r in rows {
                t.push(vec![r.strength.into(), r.dphi.into(), r.f22_ratio.into(), r.kappa22.into(), r.kappa11.into(), r.conditional_d1.into(), r.d1.into()]);
            }
            Ok(t)
        }
    }
}

fn dirty(file: &FileConfig, grid: Option<usize>, spacing: Option<f64>, half_width: Option<f64>, pgm: Option<&std::path::PathBuf>) -> Result<Table, CliError> {
    let n = grid.or(file.grid).unwrap_or(256);
    let du = spacing.or(file.spacing).unwrap_or(1.0);
    let d = half_width.or(file.half_width).unwrap_or(12.0);
    if n < 4 {
        return Err(CliError::Config("grid must have at least 4 points".into()));
    }
    let pattern = SamplingPattern::rectangular(n, du, d)?;
    let beam = dirty_beam(&pattern)?;
    let real = beam.real();
    let mut t = Table::new("dirty-beam", &["l", "m", "beam"]);
    t.meta("grid", n);
    t.meta("spacing", du);
    t.meta("half_width", d);
    t.meta("cell", beam.dl);
    t.meta("first_null", first_null(&beam).map(|x| x.to_string()).unwrap_or_else(|| "none".into()));
    t.meta("expected_null", PI / d);
    for p in 0..n {
        for q in 0..n {
            t.push(vec![beam.l(p).into(), beam.m(q).into(), real[(p, q)].into()]);
        }
    }
    if let Some(path) = pgm {
        std::fs::write(path, to_pgm(&real)).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(t)
}

fn example_multi_scene() -> MultiScene {
    MultiScene {
        sources: vec![
            Source { x: 2e-5, y: 1e-5, n: 0.02 },
            Source { x: -2e-5, y: -1e-5, n: 0.02 },
        ],
        detectors: vec![
            Detector { u: 0.0, v: 0.0 },
            Detector { u: 1e4, v: 0.0 },
            Detector { u: 0.0, v: 1e4 },
        ],
        eta: vec![vec![0.3; 3]; 2],
        k: 2.0 * PI / 5e-3,
        s0: 1e4,
        thermal_floor: 1e-4,
    }
}

fn coordinate_name(c: Coordinate) -> String {
    match c {
        Coordinate::X(s) => format!("x{s}"),
        Coordinate::Y(s) => format!("y{s}"),
    }
}

fn multi(file: &FileConfig, params: Option<&str>, centroid_separation: bool) -> Result<Table, CliError> {
    let ms = file.multi.clone().unwrap_or_else(example_multi_scene);
    ms.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let params = match (params, &file.params) {
        (Some(p), _) => config::parse_params(p)?,
        (None, Some(p)) => config::parse_params(&p.join(","))?,
        (None, None) => (0..ms.n_sources()).flat_map(|s| [Coordinate::X(s), Coordinate::Y(s)]).collect(),
    };
    let f = multi_qfi(&ms, &params)?;
    let mut t = Table::new("multi-qfi", &["param_i", "param_j", "qfi"]);
    t.meta_json("multi", &ms);
    t.meta("physical", physicality_check(&multi_covariance(&ms)?));
    for (i, &a) in params.iter().enumerate() {
        for (j, &b) in params.iter().enumerate() {
            t.push(vec![coordinate_name(a).into(), coordinate_name(b).into(), f.get(i, j).into()]);
        }
    }
    if centroid_separation {
        let g = multi_qfi_centroid_separation(&ms)?;
        let names = ["centroid", "separation"];
        for i in 0..2 {
            for j in 0..2 {
                t.push(vec![names[i].into(), names[j].into(), g.get(i, j).into()]);
            }
        }
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn sample(file: &FileConfig, s: &crate::SceneArgs, dphi: Option<f64>, c: Option<f64>, samples: Option<u64>, raw: bool, seed: u64) -> Result<Table, CliError> {
    let base = config::scene(file, &s.overrides(), 0.1)?;
    let u0 = base.scale();
    let theta2 = dphi.map(|d| d / u0).or(file.theta2).unwrap_or(1.0 / u0);
    let scene = base.with_separation(theta2);
    let c = c.or(file.c).unwrap_or(0.0);
    let n = samples.or(file.samples).unwrap_or(100_000);
    let delta = scene.phases().centroid_phase() - c;
    let mut t = if raw { Table::new("sample", &["m", "n"]) } else { Table::new("sample", &["m", "n", "count"]) };
    scene_meta(&mut t, &scene);
    t.meta("c", c);
    t.meta("seed", seed);
    t.meta("samples", n);
    if raw {
        for (m, k) in sample_raw(&scene, delta, n, seed)? {
            t.push(vec![m.into(), k.into()]);
        }
    } else {
        for (&(m, k), &count) in &sample_counts(&scene, delta, n, seed)?.counts {
            t.push(vec![m.into(), k.into(), count.into()]);
        }
    }
    Ok(t)
}
