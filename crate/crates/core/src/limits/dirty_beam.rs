//! Dirty beam of a (u, v) sampling pattern and the dirty image it produces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Sampled points on an `nu x nv` grid with spacings `du`, `dv`. Index `i`
/// sits at `u = (i - nu / 2) du`, so the grid centre is the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPattern {
    pub mask: DMatrix<bool>,
    pub du: f64,
    pub dv: f64,
}

impl SamplingPattern {
    pub fn new(mask: DMatrix<bool>, du: f64, dv: f64) -> Result<Self> {
        let p = Self { mask, du, dv };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mask.iter().any(|&b| b) {
            return Err(Error::InvalidParameter("sampling pattern has no sampled point".into()));
        }
        if !(self.du > 0.0 && self.dv > 0.0) {
            return Err(Error::InvalidParameter("grid spacings must be positive".into()));
        }
        Ok(())
    }

    /// `S = 1` for `|u| <= d` and `|v| <= d`.
    pub fn rectangular(n: usize, spacing: f64, d: f64) -> Result<Self> {
        let mask = DMatrix::from_fn(n, n, |i, j| {
            let u = (i as f64 - (n / 2) as f64) * spacing;
            let v = (j as f64 - (n / 2) as f64) * spacing;
            u.abs() <= d * (1.0 + 1e-12) && v.abs() <= d * (1.0 + 1e-12)
        });
        Self::new(mask, spacing, spacing)
    }

    pub fn full(n: usize, spacing: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(n, n, true), spacing, spacing)
    }

    pub fn u(&self, i: usize) -> f64 {
        (i as f64 - (self.mask.nrows() / 2) as f64) * self.du
    }

    pub fn v(&self, j: usize) -> f64 {
        (j as f64 - (self.mask.ncols() / 2) as f64) * self.dv
    }
}

/// `B(l, m) = sum S(u, v) e^{i (l u + m v)} du dv` on the reciprocal grid
/// `l = (p - n/2) dl`, `dl = 2 pi / (n du)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirtyBeam {
    pub values: DMatrix<Complex64>,
    pub dl: f64,
    pub dm: f64,
}

impl DirtyBeam {
    pub fn real(&self) -> DMatrix<f64> {
        self.values.map(|z| z.re)
    }

    pub fn l(&self, p: usize) -> f64 {
        (p as f64 - (self.values.nrows() / 2) as f64) * self.dl
    }

    pub fn m(&self, q: usize) -> f64 {
        (q as f64 - (self.values.ncols() / 2) as f64) * self.dm
    }

    pub fn center(&self) -> (usize, usize) {
        (self.values.nrows() / 2, self.values.ncols() / 2)
    }
}

fn fft_axis(data: &mut DMatrix<Complex64>, direction: FftDirection, along_rows: bool) {
    let mut planner = FftPlanner::new();
    let (nr, nc) = data.shape();
    if along_rows {
        let fft = planner.plan_fft(nc, direction);
        let mut buf = vec![Complex64::new(0.0, 0.0); nc];
        for r in 0..nr {
            for c in 0..nc {
                buf[c] = data[(r, c)];
            }
            fft.process(&mut buf);
            for c in 0..nc {
                data[(r, c)] = buf[c];
            }
        }
    } else {
        let fft = planner.plan_fft(nr, direction);
        for mut col in data.column_iter_mut() {
            let s = col.as_mut_slice();
            fft.process(s);
        }
    }
}

fn fft2(data: &mut DMatrix<Complex64>, direction: FftDirection) {
    fft_axis(data, direction, true);
    fft_axis(data, direction, false);
}

/// Moves index `i` to `(i + shift) mod n` along both axes.
fn roll(data: &DMatrix<Complex64>, shift_r: usize, shift_c: usize) -> DMatrix<Complex64> {
    let (nr, nc) = data.shape();
    DMatrix::from_fn(nr, nc, |r, c| data[((r + nr - shift_r % nr) % nr, (c + nc - shift_c % nc) % nc)])
}

pub fn dirty_beam(pattern: &SamplingPattern) -> Result<DirtyBeam> {
    pattern.validate()?;
    let (nu, nv) = pattern.mask.shape();
    let s = pattern.mask.map(|b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0));
    // origin to index 0, transform with e^{+i}, origin back to the centre
    let mut shifted = roll(&s, nu - nu / 2, nv - nv / 2);
    fft2(&mut shifted, FftDirection::Inverse);
    let values = roll(&shifted, nu / 2, nv / 2) * Complex64::new(pattern.du * pattern.dv, 0.0);
    Ok(DirtyBeam {
        values,
        dl: 2.0 * std::f64::consts::PI / (nu as f64 * pattern.du),
        dm: 2.0 * std::f64::consts::PI / (nv as f64 * pattern.dv),
    })
}

/// Circular convolution of a sky image with the beam, `I * B`, on the beam's
/// grid. The beam centre acts as the convolution origin.
pub fn dirty_image(sky: &DMatrix<f64>, beam: &DirtyBeam) -> Result<DMatrix<Complex64>> {
    let (nr, nc) = beam.values.shape();
    if sky.shape() != (nr, nc) {
        return Err(Error::DimensionMismatch {
            expected: nr * nc,
            got: sky.len(),
        });
    }
    let mut a = sky.map(|x| Complex64::new(x, 0.0));
    let mut b = roll(&beam.values, nr - nr / 2, nc - nc / 2);
    fft2(&mut a, FftDirection::Forward);
    fft2(&mut b, FftDirection::Forward);
    let mut prod = a.component_mul(&b);
    fft2(&mut prod, FftDirection::Inverse);
    Ok(prod / Complex64::new((nr * nc) as f64, 0.0))
}

/// Distance from the beam centre to the first zero crossing of the real
/// beam along the `l` axis, linearly interpolated between grid points.
pub fn first_null(beam: &DirtyBeam) -> Option<f64> {
    let (pc, qc) = beam.center();
    let row: Vec<f64> = (pc..beam.values.nrows()).map(|p| beam.values[(p, qc)].re).collect();
    for k in 1..row.len() {
        let (a, b) = (row[k - 1], row[k]);
        if b == 0.0 {
            return Some(k as f64 * beam.dl);
        }
        if a.signum() != b.signum() {
            return Some((k as f64 - 1.0 + a / (a - b)) * beam.dl);
        }
    }
    None
}

/// 8-bit binary PGM of an image, linearly scaled to its own range.
pub fn to_pgm(image: &DMatrix<f64>) -> Vec<u8> {
    let (lo, hi) = image.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{} {}\n255\n", image.ncols(), image.nrows()).into_bytes();
    for r in 0..image.nrows() {
        for c in 0..image.ncols() {
            out.push(((image[(r, c)] - lo) / span * 255.0).round() as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rectangular_first_null() {
        let du = 1.0;
        for j in [10usize, 12, 15] {
            let d = j as f64 * du;
            let beam = dirty_beam(&SamplingPattern::rectangular(256, du, d).unwrap()).unwrap();
            let null = first_null(&beam).unwrap();
            assert!((null - PI / d).abs() <= beam.dl, "J = {j}: {null} vs {}", PI / d);
        }
    }

    #[test]
    fn matches_direct_sum() {
        let p = SamplingPattern::rectangular(16, 0.5, 1.5).unwrap();
        let beam = dirty_beam(&p).unwrap();
        for &(pi, qi) in &[(8, 8), (3, 11), (15, 0)] {
            let (l, m) = (beam.l(pi), beam.m(qi));
            let mut direct = Complex64::new(0.0, 0.0);
            for i in 0..16 {
                for j in 0..16 {
                    if p.mask[(i, j)] {
                        direct += Complex64::cis(l * p.u(i) + m * p.v(j)) * 0.25;
                    }
                }
            }
            assert!((beam.values[(pi, qi)] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn full_aperture_is_a_delta() {
        let beam = dirty_beam(&SamplingPattern::full(32, 1.0).unwrap()).unwrap();
        let (pc, qc) = beam.center();
        for ((p, q), z) in beam.values.iter().enumerate().map(|(k, z)| ((k % 32, k / 32), z)) {
            let expected = if (p, q) == (pc, qc) { 1024.0 } else { 0.0 };
            assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn symmetric_pattern_gives_real_even_beam() {
        let beam = dirty_beam(&SamplingPattern::rectangular(64, 1.0, 5.0).unwrap()).unwrap();
        let (pc, qc) = beam.center();
        for dp in 1..20 {
            for dq in 0..20 {
                let a = beam.values[(pc + dp, qc + dq)];
                assert!(a.im.abs() < 1e-10);
                assert!((a.re - beam.values[(pc - dp, qc - dq)].re).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn point_source_images_to_shifted_beam() {
        let beam = dirty_beam(&SamplingPattern::rectangular(32, 1.0, 4.0).unwrap()).unwrap();
        let mut sky = DMatrix::zeros(32, 32);
        sky[(20, 9)] = 1.0;
        let img = dirty_image(&sky, &beam).unwrap();
        let expected = roll(&beam.values, 20 - 16, 32 + 9 - 16);
        assert!((img - expected).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn empty_pattern_is_rejected() {
        assert!(SamplingPattern::new(DMatrix::from_element(4, 4, false), 1.0, 1.0).is_err());
    }

    #[test]
    fn pgm_header() {
        let bytes = to_pgm(&DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]));
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 6);
        assert_eq!(*bytes.last().unwrap(), 255);
    }
}
