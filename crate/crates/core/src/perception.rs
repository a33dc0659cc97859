//! Contrast sensitivity model, visibility prediction and percept simulation.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{make_area_mask, make_line_mask, AdaptiveTextTable, MaskPattern};
use crate::pipeline::ChartPreset;
use crate::raster::{lab_to_srgb, lightness_to_luminance, rgb_to_lab, Lab, RasterImage};
use crate::segment::MarkLabel;
use crate::spectral::{fft2d, signed_frequency, Direction};

/// Pixel density of a 6.67-inch 1080×2400 phone panel.
pub const DEFAULT_PPI: f64 = 394.6;
pub const DEFAULT_DISTANCES_CM: [f64; 3] = [30.0, 60.0, 90.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewingGeometry {
    pub distance_cm: f64,
    pub ppi: f64,
}

impl ViewingGeometry {
    pub fn new(distance_cm: f64, ppi: f64) -> Result<Self> {
        if !(distance_cm > 0.0 && distance_cm.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "distance must be positive, got {distance_cm}"
            )));
        }
        if !(ppi > 0.0 && ppi.is_finite()) {
            return Err(Error::InvalidGeometry(format!("ppi must be positive, got {ppi}")));
        }
        Ok(ViewingGeometry { distance_cm, ppi })
    }

    pub fn at(distance_cm: f64) -> Result<Self> {
        ViewingGeometry::new(distance_cm, DEFAULT_PPI)
    }
}

/// Cycles per degree of a pattern repeating every `period_px` pixels, viewed
/// on-axis: the period spans `2·atan(p / 2D)` degrees of visual angle.
pub fn frequency_for_period(period_px: f64, geom: &ViewingGeometry) -> f64 {
    let p_cm = period_px / geom.ppi * 2.54;
    let theta = 2.0 * (p_cm / (2.0 * geom.distance_cm)).atan();
    1.0 / theta.to_degrees()
}

/// Fundamental frequency of an `n`-pixel mask tile.
pub fn spatial_frequency(mask_n: u32, geom: &ViewingGeometry) -> f64 {
    frequency_for_period(mask_n as f64, geom)
}

/// Michelson contrast between two CIE lightness values.
pub fn michelson_contrast(mark_l: f64, bg_l: f64) -> f64 {
    let a = lightness_to_luminance(mark_l.clamp(0.0, 100.0));
    let b = lightness_to_luminance(bg_l.clamp(0.0, 100.0));
    if a + b <= 0.0 {
        return 0.0;
    }
    (a - b).abs() / (a + b)
}

/// Band-pass sensitivity `S(f) = gain · (a + b·f) · exp(-(b·f)^c)`, with `f`
/// in cycles per degree. The defaults peak near 2.8 cpd with a maximum
/// sensitivity of about 15; they are a modeling choice, not a measured curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsfModel {
    pub gain: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for CsfModel {
    fn default() -> Self {
        CsfModel {
            gain: 40.0,
            a: 0.0192,
            b: 0.33,
            c: 1.1,
        }
    }
}

impl CsfModel {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.gain, self.b, self.c].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.a >= 0.0
            && self.a.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid CSF parameters {self:?}")))
        }
    }

    pub fn sensitivity(&self, f: f64) -> f64 {
        let bf = self.b * f;
        self.gain * (self.a + bf) * (-bf.powf(self.c)).exp()
    }

    /// Smallest detectable Michelson contrast at `f`.
    pub fn threshold(&self, f: f64) -> f64 {
        1.0 / self.sensitivity(f)
    }

    /// Frequency of maximum sensitivity, where `(a + b·f)·c·(b·f)^(c-1) = 1`.
    pub fn peak_frequency(&self) -> f64 {
        let g = |f: f64| (self.a + self.b * f) * self.c * (self.b * f).powf(self.c - 1.0) - 1.0;
        let (mut lo, mut hi) = (1e-6, 1.0);
        while g(hi) < 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Relative attenuation used for percept simulation: 1 up to the peak,
    /// `S(f) / S(peak)` beyond it.
    pub fn attenuation(&self, f: f64) -> f64 {
        let peak = self.peak_frequency();
        if f <= peak {
            1.0
        } else {
            self.sensitivity(f) / self.sensitivity(peak)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Visible,
    Invisible,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin >= 1.0 {
            Verdict::Visible
        } else {
            Verdict::Invisible
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelVisibility {
    pub label: MarkLabel,
    pub mask_n: u32,
    pub frequency_cpd: f64,
    pub michelson_contrast: f64,
    pub threshold_contrast: f64,
    /// Effective contrast divided by threshold contrast.
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    pub preset: String,
    pub distance_cm: f64,
    pub ppi: f64,
    pub labels: Vec<LabelVisibility>,
    /// Largest margin among graphical marks (text excluded).
    pub margin: f64,
    /// Visible iff any graphical mark is visible.
    pub verdict: Verdict,
}

impl VisibilityReport {
    pub fn label(&self, label: MarkLabel) -> Option<&LabelVisibility> {
        self.labels.iter().find(|l| l.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisibilityOptions {
    pub background_lightness: f64,
    /// Scale contrast by the mask's retained fraction.
    pub duty_cycle_correction: bool,
    /// Stroke width assumed for text when sizing its adaptive mask.
    pub text_stroke_width: f64,
    pub text_table: AdaptiveTextTable,
}

impl Default for VisibilityOptions {
    fn default() -> Self {
        VisibilityOptions {
            background_lightness: 100.0,
            duty_cycle_correction: false,
            text_stroke_width: 2.0,
            text_table: AdaptiveTextTable::default(),
        }
    }
}

fn label_visibility(
    label: MarkLabel,
    pattern: &MaskPattern,
    contrast: f64,
    geom: &ViewingGeometry,
    csf: &CsfModel,
    opts: &VisibilityOptions,
) -> LabelVisibility {
    let f = spatial_frequency(pattern.n(), geom);
    let effective = if opts.duty_cycle_correction {
        contrast * pattern.retained_fraction_limit()
    } else {
        contrast
    };
    let threshold = csf.threshold(f);
    let margin = effective / threshold;
    LabelVisibility {
        label,
        mask_n: pattern.n(),
        frequency_cpd: f,
        michelson_contrast: effective,
        threshold_contrast: threshold,
        margin,
        verdict: Verdict::from_margin(margin),
    }
}

pub fn predict_visibility(
    preset: &ChartPreset,
    geom: &ViewingGeometry,
    csf: &CsfModel,
) -> Result<VisibilityReport> {
    predict_visibility_with(preset, geom, csf, &VisibilityOptions::default())
}

pub fn predict_visibility_with(
    preset: &ChartPreset,
    geom: &ViewingGeometry,
    csf: &CsfModel,
    opts: &VisibilityOptions,
) -> Result<VisibilityReport> {
    let bg_l = opts.background_lightness;
    let mark_l = preset.contrast.target_lightness(bg_l);
    let contrast = michelson_contrast(mark_l, bg_l);

    let area = make_area_mask(preset.area_mask_n as i64)?;
    let line = make_line_mask(preset.line_mask_n as i64)?;
    let text = opts.text_table.pattern_for(opts.text_stroke_width)?;
    let labels: Vec<LabelVisibility> = [
        (MarkLabel::AreaMark, &area),
        (MarkLabel::AreaBorder, &line),
        (MarkLabel::LineMark, &line),
        (MarkLabel::Text, &text),
    ]
    .into_iter()
    .map(|(label, p)| label_visibility(label, p, contrast, geom, csf, opts))
    .collect();

    let margin = labels
        .iter()
        .filter(|l| l.label != MarkLabel::Text)
        .map(|l| l.margin)
        .fold(0.0, f64::max);
    Ok(VisibilityReport {
        preset: preset.name.clone(),
        distance_cm: geom.distance_cm,
        ppi: geom.ppi,
        labels,
        margin,
        verdict: Verdict::from_margin(margin),
    })
}

/// Filters all three Lab channels by the CSF attenuation of each frequency
/// bin at this viewing geometry.
pub fn simulate_view(img: &RasterImage, geom: &ViewingGeometry, csf: &CsfModel) -> RasterImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let lab = rgb_to_lab(img);
    let peak = csf.peak_frequency();
    let peak_s = csf.sensitivity(peak);

    let gain: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|v| {
            let fy = signed_frequency(v, h);
            (0..w).map(move |u| {
                let rho = signed_frequency(u, w).hypot(fy);
                if rho == 0.0 {
                    return 1.0;
                }
                let f = frequency_for_period(1.0 / rho, geom);
                if f <= peak {
                    1.0
                } else {
                    csf.sensitivity(f) / peak_s
                }
            })
        })
        .collect();

    let channels: Vec<Vec<f64>> = [0usize, 1, 2]
        .iter()
        .map(|&ch| {
            let mut buf: Vec<Complex64> = lab
                .pixels()
                .iter()
                .map(|p| Complex64::new([p.l, p.a, p.b][ch], 0.0))
                .collect();
            fft2d(&mut buf, w, h, Direction::Forward);
            for (z, g) in buf.iter_mut().zip(&gain) {
                *z *= g;
            }
            fft2d(&mut buf, w, h, Direction::Inverse);
            let scale = 1.0 / (w * h) as f64;
            buf.iter().map(|z| z.re * scale).collect()
        })
        .collect();

    let pixels = (0..w * h)
        .map(|i| {
            let l = channels[0][i].clamp(0.0, 100.0);
            lab_to_srgb(Lab::new(l, channels[1][i], channels[2][i])).0
        })
        .collect();
    RasterImage::from_pixels(img.width(), img.height(), pixels).expect("same dimensions")
}
