//! 8-connected component labeling of foreground pixels, split by color so
//! that touching marks of different colors (adjacent pie slices, a bar
//! resting on an axis) end up in separate components.

use super::{BBox, BinaryMaskImage};
use crate::raster::RasterImage;

#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    /// Per pixel: 0 for unlabeled, otherwise 1-based component index.
    pub ids: Vec<u32>,
    pub bboxes: Vec<BBox>,
    pub counts: Vec<usize>,
}

impl Labeling {
    pub fn len(&self) -> usize {
        self.bboxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bboxes.is_empty()
    }

    /// Binary mask of one component cropped to its bounding box, with `pad`
    /// pixels of background on every side.
    pub fn crop(&self, id: u32, width: u32, pad: u32) -> BinaryMaskImage {
        let b = self.bboxes[id as usize - 1];
        BinaryMaskImage::from_fn(b.w + 2 * pad, b.h + 2 * pad, |cx, cy| {
            let (x, y) = (cx as i64 - pad as i64 + b.x as i64, cy as i64 - pad as i64 + b.y as i64);
            b.contains_signed(x, y) && self.ids[y as usize * width as usize + x as usize] == id
        })
    }
}

impl BBox {
    fn contains_signed(&self, x: i64, y: i64) -> bool {
        x >= self.x as i64 && y >= self.y as i64 && x < self.right() as i64 && y < self.bottom() as i64
    }
}

/// Neighbors join a component when both are in `fg` and no RGB channel
/// differs by more than `tolerance`. Components are numbered in raster order
/// of their first pixel.
pub fn label_components(img: &RasterImage, fg: &BinaryMaskImage, tolerance: u8) -> Labeling {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px = img.pixels();
    let mut ids = vec![0u32; px.len()];
    let mut bboxes = Vec::new();
    let mut counts = Vec::new();
    let mut stack = Vec::new();

    for start in 0..px.len() {
        if !fg.data()[start] || ids[start] != 0 {
            continue;
        }
        let id = bboxes.len() as u32 + 1;
        ids[start] = id;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, 0i64, 0i64);
        let mut count = 0usize;
        while let Some(i) = stack.pop() {
            let (x, y) = (i as i64 % w, i as i64 / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            count += 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if ids[j] == 0 && fg.data()[j] && px[i].max_channel_diff(px[j]) <= tolerance {
                        ids[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        bboxes.push(BBox {
            x: x0 as u32,
            y: y0 as u32,
            w: (x1 - x0 + 1) as u32,
            h: (y1 - y0 + 1) as u32,
        });
        counts.push(count);
    }
    Labeling { ids, bboxes, counts }
}
