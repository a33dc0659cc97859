//! Frequency-domain analysis of the lightness channel.
//!
//! Spectra are taken over the lightness deficit `reference - L*`, where the
//! reference defaults to the lightness of the estimated background. Only the DC
//! bin depends on the reference, so every non-DC magnitude equals that of the
//! plain L* channel, while a blank background contributes no energy at all.
//! Sizes are transformed as-is (no zero padding).

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use realfft::RealFftPlanner;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::{encode_gray_png, estimate_background, map_pixels, srgb_lightness, RasterImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// In-place unnormalized 2-D DFT of a row-major `width x height` buffer.
/// Rows are processed in parallel; every row uses the same plan, so the output
/// does not depend on the thread count.
pub(crate) fn fft2d(data: &mut [Complex64], width: usize, height: usize, dir: Direction) {
    debug_assert_eq!(data.len(), width * height);
    let mut planner = FftPlanner::<f64>::new();
    let plan = |planner: &mut FftPlanner<f64>, n| match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };

    let row_plan = plan(&mut planner, width);
    data.par_chunks_mut(width)
        .for_each(|row| row_plan.process(row));

    let col_plan = plan(&mut planner, height);
    let mut transposed = vec![Complex64::default(); data.len()];
    transposed
        .par_chunks_mut(height)
        .enumerate()
        .for_each(|(x, col)| {
            for (y, v) in col.iter_mut().enumerate() {
                *v = data[y * width + x];
            }
            col_plan.process(col);
        });
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            *v = transposed[x * height + y];
        }
    });
}

/// Unnormalized 2-D DFT of a real row-major buffer, returned as the full
/// complex spectrum. Rows go through a real-input FFT, only the
/// non-redundant `width / 2 + 1` columns are transformed, and the rest is
/// filled in by Hermitian symmetry.
pub(crate) fn real_fft2d(samples: &[f64], width: usize, height: usize) -> Vec<Complex64> {
    debug_assert_eq!(samples.len(), width * height);
    let half = width / 2 + 1;
    let row_plan = RealFftPlanner::<f64>::new().plan_fft_forward(width);
    let mut rows = vec![Complex64::default(); half * height];
    rows.par_chunks_mut(half)
        .zip(samples.par_chunks(width))
        .for_each(|(out, row)| {
            let mut input = row.to_vec();
            row_plan
                .process(&mut input, out)
                .expect("buffer lengths match the plan");
        });

    let col_plan = FftPlanner::<f64>::new().plan_fft_forward(height);
    let mut cols = vec![Complex64::default(); half * height];
    cols.par_chunks_mut(height).enumerate().for_each(|(u, col)| {
        for (v, c) in col.iter_mut().enumerate() {
            *c = rows[v * half + u];
        }
        col_plan.process(col);
    });

    let mut full = vec![Complex64::default(); width * height];
    full.par_chunks_mut(width).enumerate().for_each(|(v, row)| {
        for (u, z) in row.iter_mut().enumerate() {
            *z = if u < half {
                cols[u * height + v]
            } else {
                cols[(width - u) * height + (height - v) % height].conj()
            };
        }
    });
    full
}

/// Position of frequency index `k` after centering (DC lands at `n / 2`).
#[inline]
pub(crate) fn shifted(k: usize, n: usize) -> usize {
    (k + n / 2) % n
}

/// Signed frequency, in cycles per pixel, of raw DFT index `k`.
#[inline]
pub(crate) fn signed_frequency(k: usize, n: usize) -> f64 {
    let s = shifted(k, n) as f64 - (n / 2) as f64;
    s / n as f64
}

/// Centered magnitude spectrum of an image's lightness deficit.
#[derive(Clone, Debug)]
pub struct FrequencySpectrum {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    reference_lightness: f64,
    spatial_energy: f64,
}

impl FrequencySpectrum {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major magnitudes with the DC bin at `(width / 2, height / 2)`.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn reference_lightness(&self) -> f64 {
        self.reference_lightness
    }

    pub fn dc_position(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    /// Magnitude at a signed frequency offset from DC, in bins.
    pub fn magnitude_at(&self, du: i64, dv: i64) -> f64 {
        let (cx, cy) = self.dc_position();
        let x = (cx as i64 + du).rem_euclid(self.width as i64) as usize;
        let y = (cy as i64 + dv).rem_euclid(self.height as i64) as usize;
        self.magnitude[y * self.width + x]
    }

    fn bin_count(&self) -> f64 {
        (self.width * self.height) as f64
    }

    /// Sum of squared magnitudes divided by the bin count.
    pub fn total_energy(&self) -> f64 {
        ordered_sum(&self.magnitude, self.width, |m| m * m) / self.bin_count()
    }

    pub fn dc_energy(&self) -> f64 {
        let m = self.magnitude_at(0, 0);
        m * m / self.bin_count()
    }

    /// Sum of squared spatial samples, the other side of Parseval's identity.
    pub fn spatial_energy(&self) -> f64 {
        self.spatial_energy
    }

    pub fn parseval_relative_error(&self) -> f64 {
        let spectral = self.total_energy();
        let denom = self.spatial_energy.abs().max(f64::MIN_POSITIVE);
        (spectral - self.spatial_energy).abs() / denom
    }

    /// Share of energy outside the DC bin; zero for an all-zero signal.
    pub fn non_dc_energy_fraction(&self) -> f64 {
        let total = self.total_energy();
        if total <= 0.0 {
            return 0.0;
        }
        ((total - self.dc_energy()) / total).clamp(0.0, 1.0)
    }

    /// Log-magnitude rendering normalized to the full 8-bit range.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let logs: Vec<f64> = self.magnitude.iter().map(|m| m.ln_1p()).collect();
        let max = logs.iter().cloned().fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        let data: Vec<u8> = logs.iter().map(|v| (v * scale).round() as u8).collect();
        encode_gray_png(self.width as u32, self.height as u32, &data)
    }
}

/// Row-wise parallel, in-order sum so results do not depend on scheduling.
fn ordered_sum(values: &[f64], width: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = values
        .par_chunks(width)
        .map(|row| row.iter().map(|&v| f(v)).sum())
        .collect();
    partial.iter().sum()
}

/// Spectrum referenced to the estimated background lightness.
pub fn magnitude_spectrum(img: &RasterImage) -> FrequencySpectrum {
    let reference = estimate_background(img).to_lab().l;
    magnitude_spectrum_with_reference(img, reference)
}

/// Spectrum of `reference - L*`. A reference of 0 gives the spectrum of the
/// negated L* channel, which has the same magnitudes as L* itself.
pub fn magnitude_spectrum_with_reference(img: &RasterImage, reference: f64) -> FrequencySpectrum {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let samples = map_pixels(img, |p| reference - srgb_lightness(p));
    let spatial_energy = ordered_sum(&samples, w, |v| v * v);
    let buf = real_fft2d(&samples, w, h);

    let mut magnitude = vec![0.0; w * h];
    let (sx, sy) = (w - w / 2, h - h / 2);
    magnitude.par_chunks_mut(w).enumerate().for_each(|(y, out)| {
        // Centered row y holds raw row (y + sy) % h, rotated by w / 2.
        let src = &buf[((y + sy) % h) * w..][..w];
        for (x, m) in out.iter_mut().enumerate() {
            let z = src[(x + sx) % w];
            *m = (z.re * z.re + z.im * z.im).sqrt();
        }
    });
    FrequencySpectrum {
        width: w,
        height: h,
        magnitude,
        reference_lightness: reference,
        spatial_energy,
    }
}

/// Energy-weighted mean radius of the non-DC bins. Radii are measured in
/// cycles per pixel and divided by the corner radius `sqrt(2) / 2`, so a
/// checkerboard maps to 1. Returns 0 when there is no non-DC energy.
pub fn radial_energy_centroid(spec: &FrequencySpectrum) -> f64 {
    let (w, h) = (spec.width, spec.height);
    let (cx, cy) = spec.dc_position();
    let max_radius = 0.5 * std::f64::consts::SQRT_2;
    let rows: Vec<(f64, f64)> = spec
        .magnitude
        .par_chunks(w)
        .enumerate()
        .map(|(y, row)| {
            let fy = (y as f64 - cy as f64) / h as f64;
            let mut weighted = 0.0;
            let mut energy = 0.0;
            for (x, &m) in row.iter().enumerate() {
                if x == cx && y == cy {
                    continue;
                }
                let fx = (x as f64 - cx as f64) / w as f64;
                let e = m * m;
                weighted += e * (fx * fx + fy * fy).sqrt() / max_radius;
                energy += e;
            }
            (weighted, energy)
        })
        .collect();
    let (weighted, energy) = rows
        .iter()
        .fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    // Relative cutoff: numerically-zero leakage around DC is not energy.
    let scale = spec.total_energy() * spec.bin_count();
    if energy <= scale * 1e-18 || energy == 0.0 {
        0.0
    } else {
        weighted / energy
    }
}

/// The two summary statistics reported by `analyze-frequency`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySummary {
    pub non_dc_energy_fraction: f64,
    pub radial_centroid: f64,
}

impl FrequencySummary {
    pub fn of(spec: &FrequencySpectrum) -> Self {
        FrequencySummary {
            non_dc_energy_fraction: spec.non_dc_energy_fraction(),
            radial_centroid: radial_energy_centroid(spec),
        }
    }
}

pub fn analyze_frequency(img: &RasterImage) -> FrequencySummary {
    FrequencySummary::of(&magnitude_spectrum(img))
}
