//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on failure.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use privshade::contrast::ContrastLevel;
use privshade::corpus::{generate, generate_corpus, ChartSpec, ShapeKind};
use privshade::mask::{make_area_mask, make_line_mask, retained_pixels, MaskPlan};
use privshade::perception::{predict_visibility, CsfModel, Verdict, ViewingGeometry};
use privshade::pipeline::{
    load_preset, preset_from_json, transform, transform_detailed, ChartPreset, ChartType,
    Granularity, TransformOptions,
};
use privshade::raster::{encode_png, srgb_to_lab, Rgb};
use privshade::segment::{
    li_threshold_histogram, mask_stroke_width, skeletonize, BinaryMaskImage,
    MarkLabel, MarkMap,
};

use common::{count_components, intersect, max_gap};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CORPUS_SEED: u64 = 20_240_611;

fn c1_spectral_shift() -> Outcome {
    let start = Instant::now();
    let items = generate_corpus(&ChartType::ALL, 6, CORPUS_SEED).map_err(|e| e.to_string())?;
    let opts = TransformOptions::default();
    let mut failures = Vec::new();
    for item in &items {
        let preset = ChartPreset::for_chart(item.spec.chart_type);
        let (_, report) = transform(&item.image, &preset, None, &opts).map_err(|e| e.to_string())?;
        let (a, b) = (report.spectrum_before.unwrap(), report.spectrum_after.unwrap());
        if !(b.non_dc_energy_fraction > a.non_dc_energy_fraction && b.radial_centroid > a.radial_centroid) {
            failures.push(format!(
                "{}: fraction {:.4}->{:.4}, centroid {:.4}->{:.4}",
                item.name, a.non_dc_energy_fraction, b.non_dc_energy_fraction, a.radial_centroid, b.radial_centroid
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if items.len() != 24 {
        return Err(format!("corpus has {} charts", items.len()));
    }
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    if secs >= 10.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!("24 charts, both statistics increased, {secs:.2} s"))
}

fn c2_presets() -> Outcome {
    let expect = [
        ("bar", 13, 75.0),
        ("scatter", 5, 75.0),
        ("line", 21, 25.0),
        ("pie", 7, 25.0),
        ("pie-study1", 7, 75.0),
    ];
    for (name, n, c) in expect {
        let p = load_preset(name).map_err(|e| e.to_string())?;
        if p.area_mask_n != n || p.contrast.value() != c {
            return Err(format!("{name}: got ({}, {})", p.area_mask_n, p.contrast.value()));
        }
    }
    for n in [0, 2, 4, 12, -3] {
        if make_area_mask(n).is_ok() || make_line_mask(n).is_ok() {
            return Err(format!("mask size {n} accepted"));
        }
    }
    if preset_from_json(r#"{"chartType":"bar","areaMaskN":12}"#, None).is_ok() {
        return Err("even areaMaskN accepted in a preset file".into());
    }
    Ok("5 presets exact, even and nonpositive sizes rejected".into())
}

fn c3_tiling() -> Outcome {
    let square = BinaryMaskImage::from_fn(10, 10, |_, _| true);
    let marks = MarkMap::from_mask(&square, MarkLabel::AreaMark);
    let keep = retained_pixels(&marks, &MaskPlan::coarse(5).unwrap()).map_err(|e| e.to_string())?;
    let got: BTreeSet<(u32, u32)> = keep.foreground().collect();
    let want: BTreeSet<(u32, u32)> = [(2, 2), (2, 7), (7, 2), (7, 7)].into_iter().collect();
    if got != want {
        return Err(format!("10x10 square kept {got:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..1000 {
        let (w, h) = (rng.random_range(1..=60u32), rng.random_range(1..=60u32));
        let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (x1, y1) = (rng.random_range(x0 + 1..=w), rng.random_range(y0 + 1..=h));
        let n = 2 * rng.random_range(0..10u32) + 1;
        let rect = BinaryMaskImage::from_fn(w, h, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y));
        let marks = MarkMap::from_mask(&rect, MarkLabel::AreaMark);
        let keep = retained_pixels(&marks, &MaskPlan::coarse(n as i64).unwrap()).map_err(|e| e.to_string())?;
        let c = n / 2;
        for y in 0..h {
            for x in 0..w {
                let expect = rect.get(x, y) && x % n == c && y % n == c;
                if keep.get(x, y) != expect {
                    return Err(format!("case {case}: n={n} rect {x0},{y0}..{x1},{y1} at ({x},{y})"));
                }
            }
        }
    }
    Ok("square exact, 1000 random rectangles match the predicate".into())
}

fn c4_lightness() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in ChartType::ALL {
        let mut spec = ChartSpec::new(t);
        spec.style.background = Rgb::WHITE;
        let (img, _) = generate(&spec, 17).map_err(|e| e.to_string())?;
        for c in [0.0, 25.0, 50.0, 75.0, 100.0] {
            let mut preset = ChartPreset::for_chart(t);
            preset.contrast = ContrastLevel::new(c).unwrap();
            let out = transform_detailed(&img, &preset, None, &TransformOptions::default())
                .map_err(|e| e.to_string())?;
            for i in 0..img.len() {
                if out.marks.labels()[i] == MarkLabel::Background {
                    if out.image.pixels()[i] != img.pixels()[i] {
                        return Err(format!("{} c={c}: background pixel {i} changed", t.as_str()));
                    }
                } else if out.retained.labels()[i] != MarkLabel::Background {
                    let err = (srgb_to_lab(out.image.pixels()[i]).l - (100.0 - c)).abs();
                    worst = worst.max(err);
                    if err > 0.5 {
                        return Err(format!("{} c={c}: mark L* off by {err:.3}", t.as_str()));
                    }
                }
            }
        }
    }
    Ok(format!("max |L* error| {worst:.3}, background untouched"))
}

fn exhaustive_li(hist: &[u64; 256]) -> Option<u8> {
    let mut best: Option<(f64, u8)> = None;
    for t in 1..256usize {
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
        if m0a == 0 || m0b == 0 {
            continue;
        }
        let (mu_a, mu_b) = (m1a as f64 / m0a as f64, m1b as f64 / m0b as f64);
        let eta = -(m1a as f64) * mu_a.ln() - (m1b as f64) * mu_b.ln();
        if best.is_none_or(|(b, _)| eta < b) {
            best = Some((eta, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

fn c5_li() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let mut hist = [0u64; 256];
        let levels = rng.random_range(2..=256usize);
        for _ in 0..levels {
            hist[rng.random_range(0..256usize)] += rng.random_range(1..=5000u64);
        }
        let want = exhaustive_li(&hist);
        let got = li_threshold_histogram(&hist).ok();
        if got != want {
            return Err(format!("case {case}: got {got:?}, exhaustive {want:?}"));
        }
        if let Some(t) = got {
            if t == 0 {
                return Err(format!("case {case}: threshold 0"));
            }
        }
    }
    Ok("1000 random histograms agree with the exhaustive minimizer".into())
}

fn shape_suite() -> Vec<BinaryMaskImage> {
    let mut shapes = Vec::new();
    let (w, h) = (64u32, 64u32);
    for k in 0..10u32 {
        let (rw, rh) = (4 + 5 * k, 3 + 3 * (9 - k));
        shapes.push(BinaryMaskImage::from_fn(w, h, |x, y| (4..4 + rw).contains(&x) && (5..5 + rh).contains(&y)));
    }
    for k in 0..10i64 {
        let r = 3 + 2 * k;
        shapes.push(BinaryMaskImage::from_fn(w, h, |x, y| {
            (x as i64 - 32).pow(2) + (y as i64 - 31).pow(2) <= r * r
        }));
    }
    for k in 0..10i64 {
        let (outer, inner) = (10 + 2 * k, 6 + k);
        shapes.push(BinaryMaskImage::from_fn(w, h, |x, y| {
            let d = (x as i64 - 32).pow(2) + (y as i64 - 32).pow(2);
            d <= outer * outer && d > inner * inner
        }));
    }
    for k in 0..10u32 {
        let t = 2 + k;
        shapes.push(BinaryMaskImage::from_fn(w, h, |x, y| {
            let l = (6..6 + t).contains(&x) && (6..58).contains(&y) || (6..58).contains(&x) && (52 - t..52).contains(&y);
            let plus = k % 2 == 1 && ((40..40 + t).contains(&x) && (8..40).contains(&y) || (28..56).contains(&x) && (20..20 + t).contains(&y));
            l || plus
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let discs: Vec<(i64, i64, i64)> = (0..rng.random_range(2..7))
            .map(|_| (rng.random_range(8..56), rng.random_range(8..56), rng.random_range(2..8)))
            .collect();
        shapes.push(BinaryMaskImage::from_fn(w, h, |x, y| {
            discs.iter().any(|&(cx, cy, r)| (x as i64 - cx).pow(2) + (y as i64 - cy).pow(2) <= r * r)
        }));
    }
    shapes
}

fn c6_thinning() -> Outcome {
    let shapes = shape_suite();
    for (k, s) in shapes.iter().enumerate() {
        let sk = skeletonize(s);
        if skeletonize(&sk) != sk {
            return Err(format!("shape {k}: thinning not idempotent"));
        }
        if !sk.is_subset_of(s) {
            return Err(format!("shape {k}: skeleton leaves the shape"));
        }
        let (a, b) = (count_components(s), count_components(&sk));
        if a != b {
            return Err(format!("shape {k}: {a} components became {b}"));
        }
    }
    let bar = BinaryMaskImage::from_fn(110, 17, |x, y| (5..105).contains(&x) && (5..12).contains(&y));
    let sw = mask_stroke_width(&bar).map_err(|e| e.to_string())?;
    if (sw - 7.0).abs() > 1.0 {
        return Err(format!("100x7 bar stroke width {sw}"));
    }
    Ok(format!("{} shapes hold all invariants, bar stroke width {sw}", shapes.len()))
}

fn c7_line_coverage() -> Outcome {
    let items = generate_corpus(&[ChartType::Line], 6, CORPUS_SEED).map_err(|e| e.to_string())?;
    let preset = load_preset("line").unwrap();
    let n = preset.line_mask_n;
    let mut fine_worst = 0;
    let mut coarse_fails = 0;
    for item in &items {
        let poly_id = item.truth.components_of(ShapeKind::Polyline).next().unwrap().id;
        let poly = item.truth.component_mask(poly_id);
        for g in [Granularity::Fine, Granularity::Coarse] {
            let opts = TransformOptions {
                granularity: g,
                analyze_spectrum: false,
                ..TransformOptions::default()
            };
            let out = transform_detailed(&item.image, &preset, None, &opts).map_err(|e| e.to_string())?;
            let kept = intersect(&out.retained.foreground(), &poly);
            let gap = max_gap(&poly, &kept);
            match g {
                Granularity::Fine => {
                    fine_worst = fine_worst.max(gap);
                    if gap > n {
                        return Err(format!("{}: gap {gap} > {n} under the line preset", item.name));
                    }
                }
                Granularity::Coarse => coarse_fails += (gap > n) as usize,
            }
        }
    }
    if coarse_fails == 0 {
        return Err("coarse masking never broke a polyline".into());
    }
    Ok(format!(
        "fine max gap {fine_worst} <= {n}; coarse exceeds it on {coarse_fails}/{} charts",
        items.len()
    ))
}

fn c8_visibility() -> Outcome {
    let csf = CsfModel::default();
    let mut notes = Vec::new();
    for name in ["bar", "scatter", "line", "pie"] {
        let p = load_preset(name).unwrap();
        let at = |d: f64| predict_visibility(&p, &ViewingGeometry::new(d, 394.6).unwrap(), &csf).unwrap();
        let (near, mid, far) = (at(30.0), at(60.0), at(90.0));
        if near.verdict != Verdict::Visible || far.verdict != Verdict::Invisible {
            return Err(format!("{name}: {:?} at 30 cm, {:?} at 90 cm", near.verdict, far.verdict));
        }
        if mid.margin >= near.margin {
            return Err(format!("{name}: margin {} at 60 cm >= {} at 30 cm", mid.margin, near.margin));
        }
        notes.push(format!("{name} {:.2}/{:.2}/{:.3}", near.margin, mid.margin, far.margin));
    }
    Ok(notes.join(", "))
}

fn c9_determinism() -> Outcome {
    let items = generate_corpus(&ChartType::ALL, 1, CORPUS_SEED).map_err(|e| e.to_string())?;
    for item in &items {
        let preset = ChartPreset::for_chart(item.spec.chart_type);
        let run = || {
            let (img, report) = transform(&item.image, &preset, None, &TransformOptions::default()).unwrap();
            (encode_png(&img).unwrap(), serde_json::to_string(&report).unwrap())
        };
        let mut outputs = vec![run(), run(), run()];
        for threads in [1, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            outputs.push(pool.install(run));
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            return Err(format!("{}: outputs differ between runs", item.name));
        }
    }
    Ok("identical PNG bytes and reports over 3 runs and 1 or 8 threads".into())
}

fn c10_speed() -> Outcome {
    let (img, _) = generate(&ChartSpec::new(ChartType::Bar).with_size(1080, 2400), 10).map_err(|e| e.to_string())?;
    let preset = ChartPreset::for_chart(ChartType::Bar);
    let opts = TransformOptions::default();
    // One warm-up so thread pool start-up and FFT planning are not timed.
    transform(&img, &preset, None, &opts).map_err(|e| e.to_string())?;
    let start = Instant::now();
    transform(&img, &preset, None, &opts).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    if secs >= 2.0 {
        return Err(format!("1080x2400 transform took {secs:.3} s"));
    }
    Ok(format!("1080x2400 transform in {secs:.3} s"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("spectral shift on the corpus", c1_spectral_shift),
        ("shipped presets and mask sizes", c2_presets),
        ("center-keep tiling", c3_tiling),
        ("re-measured mark lightness", c4_lightness),
        ("Li threshold", c5_li),
        ("thinning invariants", c6_thinning),
        ("line continuity", c7_line_coverage),
        ("visibility at 30/60/90 cm", c8_visibility),
        ("determinism", c9_determinism),
        ("1080x2400 runtime", c10_speed),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
