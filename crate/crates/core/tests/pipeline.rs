use privshade::corpus::{generate, ChartSpec};
use privshade::mask::MaskPlan;
use privshade::pipeline::{
    load_preset, transform, transform_detailed, ChartPreset, ChartType, Granularity,
    TransformOptions,
};
use privshade::raster::{decode_png, encode_png, Rgb};
use privshade::segment::{segment, MarkLabel, SegmentConfig, TextAnnotation};
use privshade::spectral::{analyze_frequency, magnitude_spectrum_with_reference, radial_energy_centroid};
use privshade::{mask, Error};

#[test]
fn blurred_charts_still_shift_upward() {
    for t in ChartType::ALL {
        let (img, _) = generate(&ChartSpec::new(t).blurred(), 31).unwrap();
        let (_, report) = transform(&img, &ChartPreset::for_chart(t), None, &TransformOptions::default()).unwrap();
        let (a, b) = (report.spectrum_before.unwrap(), report.spectrum_after.unwrap());
        assert!(b.radial_centroid > a.radial_centroid, "{}", t.as_str());
        assert!(b.non_dc_energy_fraction > a.non_dc_energy_fraction, "{}", t.as_str());
    }
}

#[test]
fn centroid_grows_with_mask_size_on_a_bar_chart() {
    // Masking alone, no contrast change. Growth with n is close to but not
    // strictly monotone, hence the small slack.
    let (img, truth) = generate(&ChartSpec::new(ChartType::Bar), 12).unwrap();
    let ann = TextAnnotation::external(truth.text_boxes.clone());
    let seg = segment(&img, Some(&ann), &SegmentConfig::default()).unwrap();
    let bg_l = seg.background.to_lab().l;
    let original = radial_energy_centroid(&magnitude_spectrum_with_reference(&img, bg_l));
    let mut last = original;
    for n in [3, 5, 7, 9] {
        let masked = mask::apply_masking(&img, &seg.marks, &MaskPlan::coarse(n).unwrap(), seg.background).unwrap();
        let c = radial_energy_centroid(&magnitude_spectrum_with_reference(&masked, bg_l));
        assert!(c > original, "n={n}: {c} <= {original}");
        assert!(c >= last - 1e-3, "n={n}: {c} < {last}");
        last = c;
    }
}

#[test]
fn blank_image_is_rejected() {
    let img = privshade::raster::RasterImage::new(64, 48, Rgb::WHITE).unwrap();
    let err = transform(&img, &load_preset("bar").unwrap(), None, &TransformOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NoMarks));
}

#[test]
fn external_annotations_are_used() {
    let (img, truth) = generate(&ChartSpec::new(ChartType::Line), 3).unwrap();
    let ann = TextAnnotation::external(truth.text_boxes.clone());
    let out = transform_detailed(&img, &load_preset("line").unwrap(), Some(&ann), &TransformOptions::default()).unwrap();
    assert_eq!(out.report.text_boxes, truth.text_boxes.len());
    let text = &out.report.labels[&MarkLabel::Text];
    assert_eq!(text.pixels, truth.mask_of(MarkLabel::Text).count());
    assert!(text.retained > 0 && text.retained < text.pixels);
}

#[test]
fn retained_fractions_respect_the_tiling_limit() {
    for t in ChartType::ALL {
        let (img, _) = generate(&ChartSpec::new(t), 5).unwrap();
        let preset = ChartPreset::for_chart(t);
        let out = transform_detailed(&img, &preset, None, &TransformOptions::default()).unwrap();
        let area = &out.report.labels[&MarkLabel::AreaMark];
        let n = preset.area_mask_n as f64;
        if area.pixels > 0 {
            assert!(area.retained_fraction <= 4.0 / (n * n) + 0.01, "{} {area:?}", t.as_str());
        }
        for l in MarkLabel::MARKS {
            assert!(out.report.labels[&l].retained <= out.report.labels[&l].pixels);
        }
    }
}

#[test]
fn coarse_and_fine_differ_on_lines() {
    let (img, _) = generate(&ChartSpec::new(ChartType::Line), 2).unwrap();
    let preset = load_preset("line").unwrap();
    let fine = transform(&img, &preset, None, &TransformOptions::default()).unwrap();
    let opts = TransformOptions {
        granularity: Granularity::Coarse,
        ..TransformOptions::default()
    };
    let coarse = transform(&img, &preset, None, &opts).unwrap();
    assert_ne!(fine.0, coarse.0);
    assert_eq!(coarse.1.granularity, Granularity::Coarse);
}

#[test]
fn output_round_trips_and_keeps_size() {
    let (img, _) = generate(&ChartSpec::new(ChartType::Pie).with_size(320, 240), 1).unwrap();
    let (out, report) = transform(&img, &load_preset("pie-study1").unwrap(), None, &TransformOptions::default()).unwrap();
    assert_eq!(out.dims(), img.dims());
    assert_eq!(decode_png(&encode_png(&out).unwrap()).unwrap(), out);
    let json = serde_json::to_value(&report).unwrap();
    for key in ["preset", "plan", "labels", "gamut_events", "spectrum_before", "visibility"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report.visibility.len(), 3);
}

#[test]
fn analysis_of_a_transformed_chart_matches_the_report() {
    let (img, _) = generate(&ChartSpec::new(ChartType::Bar), 6).unwrap();
    let (out, report) = transform(&img, &load_preset("bar").unwrap(), None, &TransformOptions::default()).unwrap();
    let direct = analyze_frequency(&out);
    let after = report.spectrum_after.unwrap();
    assert!((direct.radial_centroid - after.radial_centroid).abs() < 1e-12);
    assert!((direct.non_dc_energy_fraction - after.non_dc_energy_fraction).abs() < 1e-12);
}
