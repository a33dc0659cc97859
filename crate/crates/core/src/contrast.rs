//! Luminance contrast reduction in CIELAB.
//!
//! Contrast `c` is the L* distance of marks below the background: every mark
//! pixel is moved to `L* = clamp(bgL - c, 0, 100)` with its a*, b* kept. When
//! that color is outside the sRGB gamut its chroma is scaled down (hue and
//! L* fixed) until it fits, and the event is counted. The 8-bit result is
//! then nudged by at most one code per channel when that brings the
//! re-measured L* closer to the target.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{lab_to_linear_rgb, lab_to_srgb, srgb_to_lab, Lab, RasterImage, Rgb};
use crate::segment::{MarkLabel, MarkMap};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ContrastLevel(f64);

impl ContrastLevel {
    pub fn new(c: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&c) {
            return Err(Error::InvalidContrast(c));
        }
        Ok(ContrastLevel(c))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Mark lightness this contrast produces on a background of `bg_l`.
    pub fn target_lightness(self, bg_l: f64) -> f64 {
        (bg_l - self.0).clamp(0.0, 100.0)
    }
}

impl TryFrom<f64> for ContrastLevel {
    type Error = Error;

    fn try_from(c: f64) -> Result<Self> {
        ContrastLevel::new(c)
    }
}

impl From<ContrastLevel> for f64 {
    fn from(c: ContrastLevel) -> f64 {
        c.0
    }
}

const GAMUT_EPS: f64 = 1e-9;

fn in_gamut(c: Lab) -> bool {
    lab_to_linear_rgb(c)
        .iter()
        .all(|&v| (-GAMUT_EPS..=1.0 + GAMUT_EPS).contains(&v))
}

/// Largest chroma scale in [0, 1] that keeps `(l, s·a, s·b)` in gamut.
fn fit_chroma(l: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if in_gamut(Lab::new(l, mid * a, mid * b)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of recoloring one source color.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Recolor {
    pub color: Rgb,
    /// The requested color was outside the sRGB gamut.
    pub gamut_mapped: bool,
}

/// New color for a mark of color `c` at target lightness `target`.
pub fn recolor(c: Rgb, target: f64) -> Recolor {
    let lab = srgb_to_lab(c);
    let wanted = Lab::new(target, lab.a, lab.b);
    let (goal, gamut_mapped) = if in_gamut(wanted) {
        (wanted, false)
    } else {
        let s = fit_chroma(target, lab.a, lab.b);
        (Lab::new(target, s * lab.a, s * lab.b), true)
    };
    let (rounded, _) = lab_to_srgb(goal);

    // Among the 27 neighbors prefer the closest chroma whose L* error is
    // within a quarter unit; failing that, the smallest L* error.
    let score = |q: Rgb| {
        let m = srgb_to_lab(q);
        let dl = (m.l - target).abs();
        let dc = (m.a - goal.a).powi(2) + (m.b - goal.b).powi(2);
        (dl > 0.25, if dl > 0.25 { dl } else { dc }, dc)
    };
    let mut best = (rounded, score(rounded));
    for dr in -1i16..=1 {
        for dg in -1i16..=1 {
            for db in -1i16..=1 {
                let ch = [rounded.r as i16 + dr, rounded.g as i16 + dg, rounded.b as i16 + db];
                if ch.iter().any(|&v| !(0..=255).contains(&v)) {
                    continue;
                }
                let q = Rgb::new(ch[0] as u8, ch[1] as u8, ch[2] as u8);
                let s = score(q);
                if s.partial_cmp(&best.1) == Some(std::cmp::Ordering::Less) {
                    best = (q, s);
                }
            }
        }
    }
    Recolor {
        color: best.0,
        gamut_mapped,
    }
}

#[derive(Clone, Debug)]
pub struct ContrastOutcome {
    pub image: RasterImage,
    /// Mark pixels whose requested color needed gamut mapping.
    pub gamut_events: usize,
}

/// Sets every non-background pixel to the contrast target; background
/// pixels are copied unchanged.
pub fn reduce_contrast(
    img: &RasterImage,
    marks: &MarkMap,
    c: ContrastLevel,
    bg_l: f64,
) -> Result<ContrastOutcome> {
    img.check_same_dims(marks.width(), marks.height())?;
    let target = c.target_lightness(bg_l);
    let labels = marks.labels();

    let colors: BTreeSet<Rgb> = img
        .pixels()
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l != MarkLabel::Background)
        .map(|(&p, _)| p)
        .collect();
    let table: HashMap<Rgb, Recolor> = colors
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|p| (p, recolor(p, target)))
        .collect();

    let mut out = img.clone();
    let mut gamut_events = 0;
    for (px, &l) in out.pixels_mut().iter_mut().zip(labels) {
        if l == MarkLabel::Background {
            continue;
        }
        let r = table[px];
        gamut_events += r.gamut_mapped as usize;
        *px = r.color;
    }
    Ok(ContrastOutcome {
        image: out,
        gamut_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{apply_masking, MaskPlan};
    use crate::perception::michelson_contrast;
    use crate::segment::BinaryMaskImage;
    use proptest::prelude::*;

    fn palette() -> Vec<Rgb> {
        vec![
            Rgb::new(255, 0, 0),
            Rgb::new(0, 128, 0),
            Rgb::new(30, 60, 220),
            Rgb::new(240, 200, 20),
            Rgb::new(128, 0, 128),
            Rgb::gray(100),
            Rgb::BLACK,
            Rgb::new(0, 200, 200),
        ]
    }

    fn striped(colors: &[Rgb]) -> (RasterImage, MarkMap) {
        let w = colors.len() as u32 * 4 + 4;
        let mut img = RasterImage::new(w, 6, Rgb::WHITE).unwrap();
        for (k, &c) in colors.iter().enumerate() {
            for x in 2 + 4 * k as u32..5 + 4 * k as u32 {
                for y in 1..5 {
                    img.set(x, y, c);
                }
            }
        }
        let fg = BinaryMaskImage::from_fn(w, 6, |x, y| img.get(x, y) != Rgb::WHITE);
        (img, MarkMap::from_mask(&fg, MarkLabel::AreaMark))
    }

    #[test]
    fn contrast_range_is_validated() {
        assert!(ContrastLevel::new(-0.1).is_err());
        assert!(ContrastLevel::new(100.5).is_err());
        assert!(ContrastLevel::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<ContrastLevel>("120").is_err());
        assert_eq!(ContrastLevel::new(75.0).unwrap().target_lightness(100.0), 25.0);
        assert_eq!(ContrastLevel::new(75.0).unwrap().target_lightness(60.0), 0.0);
    }

    #[test]
    fn measured_lightness_hits_target() {
        let (img, marks) = striped(&palette());
        for c in [0.0, 25.0, 50.0, 75.0, 100.0] {
            let out = reduce_contrast(&img, &marks, ContrastLevel::new(c).unwrap(), 100.0).unwrap();
            for (i, (&p, &l)) in out.image.pixels().iter().zip(marks.labels()).enumerate() {
                if l == MarkLabel::Background {
                    assert_eq!(p, img.pixels()[i]);
                } else {
                    let got = srgb_to_lab(p).l;
                    assert!((got - (100.0 - c)).abs() <= 0.5, "c={c} {p:?} L={got}");
                }
            }
        }
    }

    #[test]
    fn full_contrast_turns_marks_black() {
        let (img, marks) = striped(&palette());
        let out = reduce_contrast(&img, &marks, ContrastLevel::new(100.0).unwrap(), 100.0).unwrap();
        for (&p, &l) in out.image.pixels().iter().zip(marks.labels()) {
            if l != MarkLabel::Background {
                assert!(p.r <= 2 && p.g <= 2 && p.b <= 2, "{p:?}");
            }
        }
        assert!(out.gamut_events > 0);
    }

    #[test]
    fn black_mark_stays_black() {
        let (img, marks) = striped(&[Rgb::BLACK]);
        let out = reduce_contrast(&img, &marks, ContrastLevel::new(100.0).unwrap(), 100.0).unwrap();
        assert_eq!(out.image, img);
    }

    #[test]
    fn hue_is_kept_unless_gamut_mapped() {
        for c in [25.0, 50.0, 75.0] {
            for p in palette() {
                let before = srgb_to_lab(p);
                let r = recolor(p, 100.0 - c);
                let after = srgb_to_lab(r.color);
                if r.gamut_mapped || before.chroma() < 10.0 || after.chroma() < 10.0 {
                    continue;
                }
                let mut d = (after.hue_degrees() - before.hue_degrees()).abs();
                d = d.min(360.0 - d);
                assert!(d <= 5.0, "{p:?} c={c}: hue moved {d}");
            }
        }
    }

    #[test]
    fn michelson_contrast_grows_with_c() {
        let mut last = -1.0;
        for c in [0.0, 10.0, 25.0, 50.0, 75.0, 90.0, 100.0] {
            let r = recolor(Rgb::new(30, 60, 220), 100.0 - c);
            let m = michelson_contrast(srgb_to_lab(r.color).l, 100.0);
            assert!(m > last);
            last = m;
        }
    }

    proptest! {
        #[test]
        fn masking_and_contrast_commute(
            seed_colors in proptest::collection::vec((any::<u8>(), any::<u8>(), any::<u8>()), 1..6),
            n in prop::sample::select(vec![1i64, 3, 5, 7]),
            c in 0.0f64..=100.0
        ) {
            let colors: Vec<Rgb> = seed_colors.into_iter().map(|(r, g, b)| Rgb::new(r, g, b)).collect();
            let (img, marks) = striped(&colors);
            let bg = Rgb::WHITE;
            let level = ContrastLevel::new(c).unwrap();
            let plan = MaskPlan::coarse(n).unwrap();

            let masked = apply_masking(&img, &marks, &plan, bg).unwrap();
            let keep = crate::mask::retained_pixels(&marks, &plan).unwrap();
            let retained = MarkMap::from_mask(&keep, MarkLabel::AreaMark);
            let a = reduce_contrast(&masked, &retained, level, 100.0).unwrap().image;

            let dimmed = reduce_contrast(&img, &marks, level, 100.0).unwrap().image;
            let b = apply_masking(&dimmed, &marks, &plan, bg).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
