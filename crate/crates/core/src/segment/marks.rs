//! Line/area classification and area-border extraction.

use rayon::prelude::*;

use super::components::label_components;
use super::distance::squared_distance_transform;
use super::thinning::skeletonize;
use super::{BBox, BinaryMaskImage, Component, MarkLabel, MarkMap, SegmentConfig, TextAnnotation};
use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// `2 * median(d) - 1`, where `d` is the Euclidean distance transform of
/// `component` sampled on the skeleton pixels. The median of an even count is
/// the mean of the two middle values. A width-`w` bar gives `w` for odd `w`
/// and `w - 1` for even `w`.
pub fn stroke_width(component: &BinaryMaskImage, skeleton: &BinaryMaskImage) -> Result<f64> {
    if component.dims() != skeleton.dims() {
        return Err(Error::DimensionMismatch {
            expected: component.dims(),
            found: skeleton.dims(),
        });
    }
    let dist2 = squared_distance_transform(component);
    let mut samples: Vec<f64> = skeleton
        .data()
        .iter()
        .zip(&dist2)
        .filter(|(&s, _)| s)
        .map(|(_, &d)| d.sqrt())
        .collect();
    if samples.is_empty() {
        return Err(Error::UndefinedStrokeWidth);
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let median = if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    };
    Ok(2.0 * median - 1.0)
}

/// Stroke width of a mask, thinning it first.
pub fn mask_stroke_width(component: &BinaryMaskImage) -> Result<f64> {
    stroke_width(component, &skeletonize(component))
}

/// Pixels of `region` whose Chebyshev distance to the nearest pixel outside
/// `region` (the image exterior included) is at most `thickness`.
pub fn area_border(region: &BinaryMaskImage, thickness: u32) -> BinaryMaskImage {
    let (w, h) = (region.width() as usize, region.height() as usize);
    let t = thickness as usize;
    let data = region.data();

    // Horizontal pass: a pixel survives erosion if its whole row window is set.
    let mut horiz = vec![false; w * h];
    let mut prefix = vec![0u32; w.max(h) + 1];
    for y in 0..h {
        for x in 0..w {
            prefix[x + 1] = prefix[x] + data[y * w + x] as u32;
        }
        for x in 0..w {
            if x >= t && x + t < w {
                horiz[y * w + x] = prefix[x + t + 1] - prefix[x - t] == (2 * t + 1) as u32;
            }
        }
    }
    let mut interior = vec![false; w * h];
    for x in 0..w {
        for y in 0..h {
            prefix[y + 1] = prefix[y] + horiz[y * w + x] as u32;
        }
        for y in 0..h {
            if y >= t && y + t < h {
                interior[y * w + x] = prefix[y + t + 1] - prefix[y - t] == (2 * t + 1) as u32;
            }
        }
    }
    let border = data.iter().zip(&interior).map(|(&r, &i)| r && !i).collect();
    BinaryMaskImage::from_vec(region.width(), region.height(), border).expect("same size")
}

struct Measured {
    stroke: Option<f64>,
    label: MarkLabel,
    /// Border pixels in crop coordinates (crop padded by 1).
    border: Option<BinaryMaskImage>,
}

pub fn classify_marks(
    img: &RasterImage,
    fg: &BinaryMaskImage,
    text: &TextAnnotation,
    config: &SegmentConfig,
) -> Result<MarkMap> {
    img.check_same_dims(fg.width(), fg.height())?;
    text.validate(img.width(), img.height())?;
    let (w, h) = (img.width() as usize, img.height() as usize);

    // Foreground inside any annotation box is text; the first box claims it.
    let mut text_owner = vec![0u32; w * h];
    for (k, b) in text.boxes.iter().enumerate() {
        for y in b.y..b.y + b.h {
            for x in b.x..b.x + b.w {
                let i = y as usize * w + x as usize;
                if fg.data()[i] && text_owner[i] == 0 {
                    text_owner[i] = k as u32 + 1;
                }
            }
        }
    }

    let rest = BinaryMaskImage::from_vec(
        img.width(),
        img.height(),
        fg.data()
            .iter()
            .zip(&text_owner)
            .map(|(&f, &t)| f && t == 0)
            .collect(),
    )?;
    let lab = label_components(img, &rest, config.color_tolerance);

    let measured: Vec<Measured> = (1..=lab.len() as u32)
        .into_par_iter()
        .map(|id| {
            let crop = lab.crop(id, img.width(), 1);
            let stroke = mask_stroke_width(&crop).ok();
            let is_line = stroke.is_some_and(|s| s <= config.line_width_max);
            if is_line {
                Measured {
                    stroke,
                    label: MarkLabel::LineMark,
                    border: None,
                }
            } else {
                Measured {
                    stroke,
                    label: MarkLabel::AreaMark,
                    border: Some(area_border(&crop, config.border_thickness)),
                }
            }
        })
        .collect();

    let mut labels = vec![MarkLabel::Background; w * h];
    let mut component_ids = lab.ids.clone();
    let mut components = Vec::with_capacity(lab.len() + text.boxes.len());
    for (k, m) in measured.iter().enumerate() {
        let id = k as u32 + 1;
        let b = lab.bboxes[k];
        for y in b.y..b.bottom() {
            for x in b.x..b.right() {
                let i = y as usize * w + x as usize;
                if lab.ids[i] != id {
                    continue;
                }
                let on_border = m
                    .border
                    .as_ref()
                    .is_some_and(|bm| bm.get(x - b.x + 1, y - b.y + 1));
                labels[i] = if on_border { MarkLabel::AreaBorder } else { m.label };
            }
        }
        components.push(Component {
            id,
            label: m.label,
            bbox: b,
            pixel_count: lab.counts[k],
            stroke_width: m.stroke,
        });
    }

    // One text component per annotation box that owns any pixels.
    let base = components.len() as u32;
    let mut text_components = Vec::new();
    for (k, b) in text.boxes.iter().enumerate() {
        let owner = k as u32 + 1;
        let bb = BBox::from(*b);
        let crop = BinaryMaskImage::from_fn(b.w + 2, b.h + 2, |cx, cy| {
            let (x, y) = (cx as i64 - 1 + b.x as i64, cy as i64 - 1 + b.y as i64);
            x >= b.x as i64
                && y >= b.y as i64
                && bb.contains(x as u32, y as u32)
                && text_owner[y as usize * w + x as usize] == owner
        });
        let count = crop.count();
        if count == 0 {
            continue;
        }
        let id = base + text_components.len() as u32 + 1;
        for y in b.y..b.y + b.h {
            for x in b.x..b.x + b.w {
                let i = y as usize * w + x as usize;
                if text_owner[i] == owner {
                    labels[i] = MarkLabel::Text;
                    component_ids[i] = id;
                }
            }
        }
        text_components.push(Component {
            id,
            label: MarkLabel::Text,
            bbox: bb,
            pixel_count: count,
            stroke_width: mask_stroke_width(&crop).ok(),
        });
    }
    components.extend(text_components);

    MarkMap::new(img.width(), img.height(), labels, component_ids, components)
}
