#![allow(dead_code)]

use std::collections::VecDeque;

use privshade::segment::BinaryMaskImage;

/// Chessboard distance from every pixel to the nearest set pixel of `mask`
/// (`u32::MAX` when the mask is empty), by the classic two-pass sweep.
pub fn chebyshev_distance(mask: &BinaryMaskImage) -> Vec<u32> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let inf = u32::MAX / 2;
    let mut d: Vec<u32> = mask.data().iter().map(|&m| if m { 0 } else { inf }).collect();
    for y in 0..h {
        for x in 0..w {
            let mut best = d[y * w + x];
            if x > 0 {
                best = best.min(d[y * w + x - 1] + 1);
            }
            if y > 0 {
                best = best.min(d[(y - 1) * w + x] + 1);
                if x > 0 {
                    best = best.min(d[(y - 1) * w + x - 1] + 1);
                }
                if x + 1 < w {
                    best = best.min(d[(y - 1) * w + x + 1] + 1);
                }
            }
            d[y * w + x] = best;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let mut best = d[y * w + x];
            if x + 1 < w {
                best = best.min(d[y * w + x + 1] + 1);
            }
            if y + 1 < h {
                best = best.min(d[(y + 1) * w + x] + 1);
                if x + 1 < w {
                    best = best.min(d[(y + 1) * w + x + 1] + 1);
                }
                if x > 0 {
                    best = best.min(d[(y + 1) * w + x - 1] + 1);
                }
            }
            d[y * w + x] = best;
        }
    }
    d.into_iter().map(|v| if v >= inf { u32::MAX } else { v }).collect()
}

/// Number of 8-connected components, by breadth-first flood fill.
pub fn count_components(mask: &BinaryMaskImage) -> usize {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let mut n = 0;
    for start in 0..(w * h) as usize {
        if !mask.data()[start] || seen[start] {
            continue;
        }
        n += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i as i64 % w, i as i64 / w);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if mask.data()[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    n
}

pub fn intersect(a: &BinaryMaskImage, b: &BinaryMaskImage) -> BinaryMaskImage {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| x && y).collect();
    BinaryMaskImage::from_vec(a.width(), a.height(), data).unwrap()
}

/// Largest Chebyshev distance from a pixel of `truth` to the nearest pixel
/// of `kept`.
pub fn max_gap(truth: &BinaryMaskImage, kept: &BinaryMaskImage) -> u32 {
    let d = chebyshev_distance(kept);
    truth
        .data()
        .iter()
        .zip(&d)
        .filter(|(&t, _)| t)
        .map(|(_, &v)| v)
        .max()
        .unwrap_or(0)
}
