//! Li's minimum cross-entropy threshold, evaluated exhaustively.
//!
//! Gray levels are shifted by one so that level 0 does not produce `ln 0`.
//! Up to a constant, the cross entropy between the image and its two-level
//! reconstruction with class means `mu_a` (levels below `t`) and `mu_b`
//! (levels at or above `t`) is `-m1a ln mu_a - m1b ln mu_b`, where `m1` is the
//! first moment of each class.

use crate::error::{Error, Result};

pub fn histogram(gray: &[u8]) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &g in gray {
        hist[g as usize] += 1;
    }
    hist
}

/// Criterion value for splitting the two given class moments; `None` when a
/// class is empty.
pub fn li_criterion(m0a: u64, m1a: u64, m0b: u64, m1b: u64) -> Option<f64> {
    if m0a == 0 || m0b == 0 {
        return None;
    }
    let mu_a = m1a as f64 / m0a as f64;
    let mu_b = m1b as f64 / m0b as f64;
    Some(-(m1a as f64) * mu_a.ln() - (m1b as f64) * mu_b.ln())
}

/// Threshold `t` in `1..=255` minimizing the criterion; pixels with gray
/// level `< t` form the lower class. Ties resolve to the smallest `t`.
pub fn li_threshold_histogram(hist: &[u64; 256]) -> Result<u8> {
    let m0: u64 = hist.iter().sum();
    let m1: u64 = hist
        .iter()
        .enumerate()
        .map(|(g, &h)| (g as u64 + 1) * h)
        .sum();

    let mut best: Option<(f64, usize)> = None;
    let (mut m0a, mut m1a) = (0u64, 0u64);
    for t in 1..256 {
        m0a += hist[t - 1];
        m1a += t as u64 * hist[t - 1];
        if let Some(eta) = li_criterion(m0a, m1a, m0 - m0a, m1 - m1a) {
            if best.is_none_or(|(b, _)| eta < b) {
                best = Some((eta, t));
            }
        }
    }
    best.map(|(_, t)| t as u8).ok_or(Error::DegenerateHistogram)
}

pub fn li_threshold(gray: &[u8]) -> Result<u8> {
    li_threshold_histogram(&histogram(gray))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Recomputes every class moment from scratch for each candidate.
    fn exhaustive(hist: &[u64; 256]) -> Option<u8> {
        let mut best: Option<(f64, u8)> = None;
        for t in 1..=255usize {
            let (mut m0a, mut m1a, mut m0b, mut m1b) = (0, 0, 0, 0);
            for (g, &h) in hist.iter().enumerate() {
                if g < t {
                    m0a += h;
                    m1a += (g as u64 + 1) * h;
                } else {
                    m0b += h;
                    m1b += (g as u64 + 1) * h;
                }
            }
            if let Some(eta) = li_criterion(m0a, m1a, m0b, m1b) {
                if best.is_none_or(|(b, _)| eta < b) {
                    best = Some((eta, t as u8));
                }
            }
        }
        best.map(|(_, t)| t)
    }

    #[test]
    fn constant_histogram_is_degenerate() {
        let mut hist = [0u64; 256];
        hist[77] = 1000;
        assert!(matches!(
            li_threshold_histogram(&hist),
            Err(Error::DegenerateHistogram)
        ));
        assert!(li_threshold(&[]).is_err());
    }

    #[test]
    fn bimodal_split() {
        let mut hist = [0u64; 256];
        hist[50] = 400;
        hist[200] = 600;
        let t = li_threshold_histogram(&hist).unwrap();
        assert!(t > 50 && t <= 200);
        assert_eq!(Some(t), exhaustive(&hist));
    }

    #[test]
    fn levels_zero_and_255_are_handled() {
        let mut hist = [0u64; 256];
        hist[0] = 10;
        hist[255] = 10;
        let t = li_threshold_histogram(&hist).unwrap();
        assert!(t >= 1);
        assert_eq!(Some(t), exhaustive(&hist));
    }

    proptest! {
        #[test]
        fn matches_exhaustive_scan(
            entries in proptest::collection::vec((0usize..256, 1u64..5000), 2..40)
        ) {
            let mut hist = [0u64; 256];
            for (g, c) in entries {
                hist[g] += c;
            }
            let expected = exhaustive(&hist);
            let got = li_threshold_histogram(&hist).ok();
            prop_assert_eq!(got, expected);
        }
    }
}
