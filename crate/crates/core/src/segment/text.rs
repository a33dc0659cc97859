//! Heuristic text localization: small thin components that line up
//! horizontally are grouped into boxes.

use super::components::label_components;
use super::marks::mask_stroke_width;
use super::{BBox, BinaryMaskImage, SegmentConfig, TextAnnotation, TextBox, TextSource};
use crate::raster::RasterImage;

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn glyphs_align(a: &BBox, b: &BBox, config: &SegmentConfig) -> bool {
    let scale = a.h.max(b.h) as f64;
    let ca = a.y as f64 + a.h as f64 / 2.0;
    let cb = b.y as f64 + b.h as f64 / 2.0;
    let gap = (a.x.max(b.x) as i64 - a.right().min(b.right()) as i64).max(0) as f64;
    (ca - cb).abs() <= config.text_align_tolerance * scale && gap <= config.text_gap_tolerance * scale
}

pub fn detect_text_heuristic(
    img: &RasterImage,
    fg: &BinaryMaskImage,
    config: &SegmentConfig,
) -> TextAnnotation {
    let lab = label_components(img, fg, config.color_tolerance);
    let glyphs: Vec<BBox> = (0..lab.len())
        .filter(|&k| lab.counts[k] < config.text_max_area)
        .filter(|&k| {
            let crop = lab.crop(k as u32 + 1, img.width(), 1);
            mask_stroke_width(&crop).is_ok_and(|s| s <= config.line_width_max)
        })
        .map(|k| lab.bboxes[k])
        .collect();

    let mut parent: Vec<usize> = (0..glyphs.len()).collect();
    for i in 0..glyphs.len() {
        for j in i + 1..glyphs.len() {
            if glyphs_align(&glyphs[i], &glyphs[j], config) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut merged: Vec<Option<BBox>> = vec![None; glyphs.len()];
    for (i, g) in glyphs.iter().enumerate() {
        let root = find(&mut parent, i);
        merged[root] = Some(match merged[root] {
            Some(b) => b.union(g),
            None => *g,
        });
    }
    let mut boxes: Vec<TextBox> = merged.into_iter().flatten().map(TextBox::from).collect();
    boxes.sort_by_key(|b| (b.y, b.x));
    TextAnnotation {
        boxes,
        source: TextSource::Heuristic,
    }
}
