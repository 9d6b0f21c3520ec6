//! Monte-Carlo photon counting straight from the coherent-state mixture.
//!
//! Conditional on the source amplitudes the telescope modes are coherent
//! states, so the beam-splitter outputs are independent Poisson counts. This
//! path shares no code with the quadrature in [`crate::povm`] beyond the
//! amplitude map, and serves as its check.
//!
//! Sampling is split into fixed chunks of [`CHUNK_SIZE`] draws. Chunk `i`
//! uses `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so a batch depends
//! only on `(seed, n_samples)` and not on the number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::Result;
use crate::povm::{AmplitudeMap, Method, PhotonCountDistribution};
use crate::scene::SceneParams;

pub const CHUNK_SIZE: u64 = 1 << 16;

/// Histogram of sampled `(m, n)` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub counts: BTreeMap<(u64, u64), u64>,
    pub n_samples: u64,
    pub seed: u64,
    pub delta: f64,
}

impl SampleBatch {
    pub fn count(&self, m: u64, n: u64) -> u64 {
        self.counts.get(&(m, n)).copied().unwrap_or(0)
    }

    pub fn max_counts(&self) -> (u64, u64) {
        self.counts
            .keys()
            .fold((0, 0), |(a, b), &(m, n)| (a.max(m), b.max(n)))
    }

    /// Sample means and variances of `m` and `n`.
    pub fn moments(&self) -> Moments {
        let total = self.n_samples as f64;
        let (mut s1, mut s2, mut q1, mut q2) = (0.0, 0.0, 0.0, 0.0);
        for (&(m, n), &c) in &self.counts {
            let (m, n, c) = (m as f64, n as f64, c as f64);
            s1 += c * m;
            s2 += c * n;
            q1 += c * m * m;
            q2 += c * n * n;
        }
        let mean = (s1 / total, s2 / total);
        Moments {
            mean,
            variance: (q1 / total - mean.0 * mean.0, q2 / total - mean.1 * mean.1),
            fourth: self.central_fourth(mean),
        }
    }

    fn central_fourth(&self, mean: (f64, f64)) -> (f64, f64) {
        let total = self.n_samples as f64;
        let mut acc = (0.0, 0.0);
        for (&(m, n), &c) in &self.counts {
            acc.0 += c as f64 * (m as f64 - mean.0).powi(4);
            acc.1 += c as f64 * (n as f64 - mean.1).powi(4);
        }
        (acc.0 / total, acc.1 / total)
    }

    /// Histogram as CSV rows `m,n,count`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "m,n,count")?;
        for (&(m, n), &c) in &self.counts {
            writeln!(w, "{m},{n},{c}")?;
        }
        Ok(())
    }
}

/// Per-output sample moments; `fourth` is the central fourth moment, used
/// for the standard error of the variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: (f64, f64),
    pub variance: (f64, f64),
    pub fourth: (f64, f64),
}

struct Sampler {
    map: AmplitudeMap,
    sd: f64,
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        let mut normal = || -> f64 { StandardNormal.sample(&mut *rng) };
        let a1 = Complex64::new(normal(), normal()) * self.sd;
        let a2 = Complex64::new(normal(), normal()) * self.sd;
        let (b1, b2) = self.map.apply(a1, a2);
        (poisson(rng, b1.norm_sqr()), poisson(rng, b2.norm_sqr()))
    }
}

fn poisson<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda < 1e-300 {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => 0,
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_lengths(n_samples: u64) -> Vec<(u64, u64)> {
    let chunks = n_samples.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .map(|i| (i, CHUNK_SIZE.min(n_samples - i * CHUNK_SIZE)))
        .collect()
}

fn sampler(scene: &SceneParams, delta: f64) -> Result<Sampler> {
    scene.validate()?;
    Ok(Sampler {
        map: AmplitudeMap::new(&scene.phases(), delta),
        sd: (0.5 * scene.strength()).sqrt(),
    })
}

/// Draws `n_samples` outcomes of the delay-`delta` measurement.
pub fn sample_counts(scene: &SceneParams, delta: f64, n_samples: u64, seed: u64) -> Result<SampleBatch> {
    let s = sampler(scene, delta)?;
    let counts = chunk_lengths(n_samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut h = BTreeMap::new();
            for _ in 0..len {
                *h.entry(s.draw(&mut rng)).or_insert(0u64) += 1;
            }
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(SampleBatch {
        counts,
        n_samples,
        seed,
        delta,
    })
}

/// Raw outcomes in draw order, for external analysis.
pub fn sample_raw(scene: &SceneParams, delta: f64, n_samples: u64, seed: u64) -> Result<Vec<(u64, u64)>> {
    let s = sampler(scene, delta)?;
    let chunks: Vec<Vec<(u64, u64)>> = chunk_lengths(n_samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = chunk_rng(seed, chunk);
            (0..len).map(|_| s.draw(&mut rng)).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Relative frequencies with their binomial standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    pub distribution: PhotonCountDistribution,
    pub std_errors: DMatrix<f64>,
    pub n_samples: u64,
}

impl EmpiricalDistribution {
    /// `sqrt(p (1 - p) / n)` evaluated at the model probability `p`, which
    /// stays meaningful for outcomes that happened not to be observed.
    pub fn model_std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }

    /// Largest `|p_emp - p_model| / sigma` over outcomes with `p_model > min_prob`.
    pub fn max_z_score(&self, model: &PhotonCountDistribution, min_prob: f64) -> f64 {
        let d = &self.distribution;
        let mut worst: f64 = 0.0;
        for m in 0..=model.m_max() {
            for n in 0..=model.n_max() {
                let p = model.get(m, n);
                if p <= min_prob {
                    continue;
                }
                let emp = if m <= d.m_max() && n <= d.n_max() { d.get(m, n) } else { 0.0 };
                worst = worst.max((emp - p).abs() / self.model_std_error(p));
            }
        }
        worst
    }
}

/// Frequencies over the window `m <= m_max`, `n <= n_max`; outcomes outside
/// it go to the tail.
pub fn empirical_distribution(batch: &SampleBatch, m_max: usize, n_max: usize) -> EmpiricalDistribution {
    let total = batch.n_samples.max(1) as f64;
    let probs = DMatrix::from_fn(m_max + 1, n_max + 1, |m, n| batch.count(m as u64, n as u64) as f64 / total);
    let std_errors = probs.map(|p| (p * (1.0 - p) / total).sqrt());
    let tail_mass = if batch.n_samples == 0 { 0.0 } else { 1.0 - probs.sum() };
    EmpiricalDistribution {
        distribution: PhotonCountDistribution::new(probs, tail_mass.max(0.0), batch.delta, Method::Empirical),
        std_errors,
        n_samples: batch.n_samples,
    }
}
