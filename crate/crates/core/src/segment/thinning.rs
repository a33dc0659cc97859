//! Zhang–Suen thinning.
//!
//! Each subiteration selects candidates with the usual Zhang–Suen tests
//! against the image as it was at the start of the subiteration. Candidates
//! are then deleted in raster order, skipping any that is no longer a simple
//! point (exactly one 0→1 transition around its ring) in the partially
//! updated image. Every single deletion therefore preserves
//! 8-connectivity; the plain parallel rule would erase 2×2 blocks and
//! two-pixel diagonal lines entirely.

use super::BinaryMaskImage;

/// Ring pattern as a byte, bit k set when neighbor P(k+2) is foreground.
fn code_counts(code: u8) -> (u32, u32) {
    let b = code.count_ones();
    let a = (0..8)
        .filter(|&k| code >> k & 1 == 0 && code >> ((k + 1) % 8) & 1 == 1)
        .count() as u32;
    (b, a)
}

struct Tables {
    /// Exactly one 0→1 transition: deletion keeps 8-connectivity.
    simple: [bool; 256],
    /// Zhang–Suen deletion test for the first and second subiteration.
    deletable: [[bool; 256]; 2],
}

impl Tables {
    fn new() -> Self {
        let mut t = Tables {
            simple: [false; 256],
            deletable: [[false; 256]; 2],
        };
        for code in 0..=255u8 {
            let (b, a) = code_counts(code);
            t.simple[code as usize] = a == 1;
            if !(2..=6).contains(&b) || a != 1 {
                continue;
            }
            let p = |k: u8| code >> k & 1 == 1;
            let (p2, p4, p6, p8) = (p(0), p(2), p(4), p(6));
            t.deletable[0][code as usize] = !(p2 && p4 && p6) && !(p4 && p6 && p8);
            t.deletable[1][code as usize] = !(p2 && p4 && p8) && !(p2 && p6 && p8);
        }
        t
    }
}

pub fn skeletonize(mask: &BinaryMaskImage) -> BinaryMaskImage {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    // One pixel of background padding so every ring read is in bounds.
    let pw = w + 2;
    let mut px = vec![false; pw * (h + 2)];
    for y in 0..h {
        px[(y + 1) * pw + 1..][..w].copy_from_slice(&mask.data()[y * w..][..w]);
    }
    let ring: [isize; 8] = {
        let pw = pw as isize;
        [-pw, -pw + 1, 1, pw + 1, pw, pw - 1, -1, -pw - 1]
    };
    let code = |px: &[bool], i: usize| -> usize {
        let mut c = 0;
        for (k, d) in ring.iter().enumerate() {
            c |= (px[(i as isize + d) as usize] as usize) << k;
        }
        c
    };
    let tables = Tables::new();

    // dirty[s][i]: pixel i must be re-tested in subiteration s because its
    // neighborhood changed since the last test.
    let n = px.len();
    let mut dirty = [vec![false; n], vec![false; n]];
    let mut queue: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        if px[i] && code(&px, i) != 0xFF {
            for s in 0..2 {
                dirty[s][i] = true;
                queue[s].push(i);
            }
        }
    }

    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for s in 0..2 {
            let mut pending = std::mem::take(&mut queue[s]);
            pending.sort_unstable();
            for &i in &pending {
                dirty[s][i] = false;
            }
            candidates.clear();
            candidates.extend(
                pending
                    .into_iter()
                    .filter(|&i| px[i] && tables.deletable[s][code(&px, i)]),
            );
            for &i in &candidates {
                if !tables.simple[code(&px, i)] {
                    continue;
                }
                px[i] = false;
                changed = true;
                for d in ring {
                    let j = (i as isize + d) as usize;
                    if px[j] {
                        for t in 0..2 {
                            if !dirty[t][j] {
                                dirty[t][j] = true;
                                queue[t].push(j);
                            }
                        }
                    }
                }
            }
        }
        if !changed && queue.iter().all(|q| q.is_empty()) {
            break;
        }
    }

    let data = (0..h)
        .flat_map(|y| px[(y + 1) * pw + 1..][..w].iter().copied())
        .collect();
    BinaryMaskImage::from_vec(mask.width(), mask.height(), data).expect("dimensions unchanged")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Number of 8-connected components, by flood fill.
    pub(crate) fn count_components(mask: &BinaryMaskImage, eight: bool) -> usize {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        let mut seen = vec![false; (w * h) as usize];
        let mut count = 0;
        for start in 0..(w * h) as usize {
            if !mask.data()[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let (x, y) = (i as i64 % w, i as i64 / w);
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if !eight && dx != 0 && dy != 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if mask.get_signed(nx, ny) {
                            let j = (ny * w + nx) as usize;
                            if !seen[j] {
                                seen[j] = true;
                                stack.push(j);
                            }
                        }
                    }
                }
            }
        }
        count
    }

    /// 4-connected background components counted on a one-pixel padded
    /// frame, so the outside is one component.
    pub(crate) fn count_holes(mask: &BinaryMaskImage) -> usize {
        let (w, h) = (mask.width() + 2, mask.height() + 2);
        let inverse = BinaryMaskImage::from_fn(w, h, |x, y| {
            !mask.get_signed(x as i64 - 1, y as i64 - 1)
        });
        count_components(&inverse, false) - 1
    }

    fn rect(w: u32, h: u32, x0: u32, y0: u32, rw: u32, rh: u32) -> BinaryMaskImage {
        BinaryMaskImage::from_fn(w, h, |x, y| {
            x >= x0 && y >= y0 && x < x0 + rw && y < y0 + rh
        })
    }

    #[test]
    fn single_pixel_survives() {
        let m = rect(5, 5, 2, 2, 1, 1);
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn empty_mask_stays_empty() {
        let m = BinaryMaskImage::new(7, 3);
        assert_eq!(skeletonize(&m).count(), 0);
    }

    #[test]
    fn two_by_two_block_keeps_a_pixel() {
        let m = rect(6, 6, 2, 2, 2, 2);
        let s = skeletonize(&m);
        assert!(s.count() >= 1);
        assert!(s.is_subset_of(&m));
    }

    #[test]
    fn horizontal_bar_thins_to_a_path() {
        let m = rect(110, 17, 5, 5, 100, 7);
        let s = skeletonize(&m);
        assert!(s.is_subset_of(&m));
        assert_eq!(count_components(&s, true), 1);
        let mut cols = std::collections::BTreeSet::new();
        for (x, y) in s.foreground() {
            cols.insert(x);
            // One pixel thick: no 2x2 block of skeleton pixels.
            if x + 1 < 110 && y + 1 < 17 {
                assert!(!(s.get(x + 1, y) && s.get(x, y + 1) && s.get(x + 1, y + 1)));
            }
        }
        // Zhang–Suen shortens a 7-px bar by a few pixels at each end; a
        // reference implementation keeps columns 2..=97 of the bar.
        assert!(cols.len() >= 93, "spans {} columns", cols.len());
    }

    #[test]
    fn annulus_becomes_one_loop() {
        let (c, r_out, r_in) = (20i64, 14i64, 8i64);
        let m = BinaryMaskImage::from_fn(41, 41, |x, y| {
            let d = (x as i64 - c).pow(2) + (y as i64 - c).pow(2);
            d <= r_out * r_out && d > r_in * r_in
        });
        let s = skeletonize(&m);
        assert_eq!(count_components(&s, true), 1);
        assert_eq!(count_holes(&m), 1);
        assert_eq!(count_holes(&s), 1);
        assert!(s.count() < m.count() / 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn thinning_invariants(
            w in 1u32..24, h in 1u32..24,
            bits in proptest::collection::vec(any::<bool>(), 576)
        ) {
            let m = BinaryMaskImage::from_fn(w, h, |x, y| bits[(y * 24 + x) as usize]);
            let s = skeletonize(&m);
            prop_assert!(s.is_subset_of(&m));
            prop_assert_eq!(&skeletonize(&s), &s);
            prop_assert_eq!(count_components(&s, true), count_components(&m, true));
        }
    }
}

