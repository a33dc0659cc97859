//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher).
//!
//! Values are distances from each foreground pixel to the nearest background
//! pixel; everything outside the image counts as background, and background
//! pixels map to 0.

use super::BinaryMaskImage;

const INF: f64 = 1e20;

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas rooted at each finite sample). At least one sample must be finite.
fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut k: usize = 0;
    let mut roots = f.iter().enumerate().filter(|(_, &fq)| fq < INF).map(|(q, _)| q);
    v[0] = roots.next().expect("at least one finite sample");
    z[0] = -INF;
    z[1] = INF;
    for q in roots {
        let intersect = |p: usize| {
            ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
        };
        let mut s = intersect(v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distances, row-major.
pub fn squared_distance_transform(mask: &BinaryMaskImage) -> Vec<f64> {
    // One pixel of background padding on every side models the outside.
    let (w, h) = (mask.width() as usize + 2, mask.height() as usize + 2);
    // Column pass: distance to the nearest background pixel in the same
    // column, by one downward and one upward sweep over whole rows.
    let mut col = vec![0u32; w * h];
    for (x, y) in mask.foreground() {
        col[(y as usize + 1) * w + x as usize + 1] = u32::MAX;
    }
    for y in 1..h {
        let (above, row) = col.split_at_mut(y * w);
        let above = &above[(y - 1) * w..];
        for (c, &a) in row[..w].iter_mut().zip(above) {
            if *c != 0 {
                *c = a + 1;
            }
        }
    }
    for y in (0..h - 1).rev() {
        let (row, below) = col.split_at_mut((y + 1) * w);
        for (c, &b) in row[y * w..].iter_mut().zip(&below[..w]) {
            *c = (*c).min(b + 1);
        }
    }
    let mut grid: Vec<f64> = col.iter().map(|&d| (d as f64) * (d as f64)).collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        transform_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }

    let (mw, mh) = (mask.width() as usize, mask.height() as usize);
    let mut result = Vec::with_capacity(mw * mh);
    for y in 0..mh {
        result.extend_from_slice(&grid[(y + 1) * w + 1..(y + 1) * w + 1 + mw]);
    }
    result
}

pub fn distance_transform(mask: &BinaryMaskImage) -> Vec<f64> {
    squared_distance_transform(mask)
        .into_iter()
        .map(f64::sqrt)
        .collect()
}
