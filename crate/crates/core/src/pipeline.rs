//! Chart presets and the end-to-end transform.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrast::{reduce_contrast, ContrastLevel};
use crate::error::{Error, Result};
use crate::mask::{apply_retained, retained_pixels, AdaptiveTextTable, MaskPlan};
use crate::perception::{
    predict_visibility_with, CsfModel, ViewingGeometry, VisibilityOptions, VisibilityReport,
    DEFAULT_DISTANCES_CM, DEFAULT_PPI,
};
use crate::raster::{RasterImage, Rgb};
use crate::segment::{segment, MarkLabel, MarkMap, SegmentConfig, TextAnnotation};
use crate::spectral::{magnitude_spectrum_with_reference, FrequencySummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Pie,
    Scatter,
    Line,
}

impl ChartType {
    pub const ALL: [ChartType; 4] = [ChartType::Bar, ChartType::Pie, ChartType::Scatter, ChartType::Line];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Pie => "pie",
            ChartType::Scatter => "scatter",
            ChartType::Line => "line",
        }
    }

    fn unknown(name: &str) -> Error {
        Error::UnknownChartType {
            name: name.to_string(),
            valid: ChartType::ALL.iter().map(|c| c.as_str()).collect(),
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChartType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChartType::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ChartType::unknown(s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChartPreset {
    pub name: String,
    pub chart_type: ChartType,
    pub area_mask_n: u32,
    pub line_mask_n: u32,
    pub contrast: ContrastLevel,
}

impl ChartPreset {
    pub const NAMES: [&'static str; 5] = ["bar", "scatter", "line", "pie", "pie-study1"];

    fn make(name: &str, chart_type: ChartType, area: u32, line: u32, contrast: f64) -> Self {
        ChartPreset {
            name: name.to_string(),
            chart_type,
            area_mask_n: area,
            line_mask_n: line,
            contrast: ContrastLevel::new(contrast).expect("built-in contrast is in range"),
        }
    }

    /// Shipped presets. `pie` uses the contrast evaluated in the second
    /// study (25); `pie-study1` keeps the first study's choice (75).
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(match name {
            "bar" => Self::make("bar", ChartType::Bar, 13, 13, 75.0),
            "scatter" => Self::make("scatter", ChartType::Scatter, 5, 9, 75.0),
            "line" => Self::make("line", ChartType::Line, 21, 21, 25.0),
            "pie" => Self::make("pie", ChartType::Pie, 7, 9, 25.0),
            "pie-study1" => Self::make("pie-study1", ChartType::Pie, 7, 9, 75.0),
            other => return Err(ChartType::unknown(other)),
        })
    }

    pub fn for_chart(chart: ChartType) -> Self {
        Self::builtin(chart.as_str()).expect("every chart type has a preset")
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.area_mask_n, self.line_mask_n] {
            if n % 2 == 0 {
                return Err(Error::InvalidMaskSize(n as i64));
            }
        }
        Ok(())
    }

    pub fn apply(&self, o: &PresetOverrides) -> Result<ChartPreset> {
        let mut p = self.clone();
        if let Some(n) = o.area_mask_n {
            p.area_mask_n = checked_size(n)?;
        }
        if let Some(n) = o.line_mask_n {
            p.line_mask_n = checked_size(n)?;
        }
        if let Some(c) = o.contrast {
            p.contrast = ContrastLevel::new(c)?;
        }
        if let Some(name) = &o.name {
            p.name = name.clone();
        }
        Ok(p)
    }
}

fn checked_size(n: i64) -> Result<u32> {
    if n < 1 || n % 2 == 0 || n > u32::MAX as i64 {
        Err(Error::InvalidMaskSize(n))
    } else {
        Ok(n as u32)
    }
}

/// User preset file: `{"chartType": "bar", "areaMaskN": 11, "lineMaskN": 13,
/// "contrast": 50}`; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PresetOverrides {
    pub name: Option<String>,
    pub chart_type: Option<String>,
    pub area_mask_n: Option<i64>,
    pub line_mask_n: Option<i64>,
    pub contrast: Option<f64>,
}

impl PresetOverrides {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidPreset(e.to_string()))
    }
}

/// Resolves a preset from a built-in name or a preset JSON file. A file
/// must name its `chartType` (or a built-in preset name there).
pub fn load_preset(source: &str) -> Result<ChartPreset> {
    if ChartPreset::NAMES.contains(&source) {
        return ChartPreset::builtin(source);
    }
    let path = std::path::Path::new(source);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return preset_from_json(&text, None);
    }
    Err(ChartType::unknown(source))
}

/// Applies a preset file on top of `base`, or on top of the built-in preset
/// named by the file's `chartType`.
pub fn preset_from_json(json: &str, base: Option<&ChartPreset>) -> Result<ChartPreset> {
    let o = PresetOverrides::from_json(json)?;
    let base = match (&o.chart_type, base) {
        (Some(name), _) => ChartPreset::builtin(name)?,
        (None, Some(b)) => b.clone(),
        (None, None) => {
            return Err(Error::InvalidPreset(
                "preset file needs a chartType when no chart is given".into(),
            ))
        }
    };
    base.apply(&o)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Area mask on every mark.
    Coarse,
    /// Per-label masks.
    #[default]
    Fine,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(Granularity::Coarse),
            "fine" => Ok(Granularity::Fine),
            _ => Err(Error::InvalidConfig(format!(
                "granularity must be coarse or fine, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformOptions {
    pub granularity: Granularity,
    pub segment: SegmentConfig,
    pub text_table: AdaptiveTextTable,
    pub csf: CsfModel,
    pub visibility: VisibilityOptions,
    pub ppi: f64,
    pub distances_cm: Vec<f64>,
    /// Compute spectral statistics before and after (two full-size FFTs).
    pub analyze_spectrum: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            granularity: Granularity::Fine,
            segment: SegmentConfig::default(),
            text_table: AdaptiveTextTable::default(),
            csf: CsfModel::default(),
            visibility: VisibilityOptions::default(),
            ppi: DEFAULT_PPI,
            distances_cm: DEFAULT_DISTANCES_CM.to_vec(),
            analyze_spectrum: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub pixels: usize,
    pub retained: usize,
    pub retained_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub preset: ChartPreset,
    pub granularity: Granularity,
    pub plan: MaskPlan,
    pub background: Rgb,
    pub text_boxes: usize,
    pub labels: BTreeMap<MarkLabel, LabelStats>,
    /// Mark pixels whose contrast-adjusted color needed gamut mapping.
    pub gamut_events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_before: Option<FrequencySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_after: Option<FrequencySummary>,
    pub visibility: Vec<VisibilityReport>,
}

/// Everything produced by one transform, including intermediate maps.
#[derive(Clone, Debug)]
pub struct TransformOutput {
    pub image: RasterImage,
    pub marks: MarkMap,
    pub retained: MarkMap,
    pub report: TransformReport,
}

pub fn plan_for(preset: &ChartPreset, granularity: Granularity, table: &AdaptiveTextTable) -> Result<MaskPlan> {
    let plan = match granularity {
        Granularity::Fine => MaskPlan::fine(preset.area_mask_n as i64, preset.line_mask_n as i64)?,
        Granularity::Coarse => MaskPlan::coarse(preset.area_mask_n as i64)?,
    };
    plan.with_text_table(table.clone())
}

/// Segment, mask and recolor one chart image.
pub fn transform(
    img: &RasterImage,
    preset: &ChartPreset,
    text: Option<&TextAnnotation>,
    opts: &TransformOptions,
) -> Result<(RasterImage, TransformReport)> {
    let out = transform_detailed(img, preset, text, opts)?;
    Ok((out.image, out.report))
}

pub fn transform_detailed(
    img: &RasterImage,
    preset: &ChartPreset,
    text: Option<&TextAnnotation>,
    opts: &TransformOptions,
) -> Result<TransformOutput> {
    preset.validate()?;
    let seg = segment(img, text, &opts.segment)?;
    if seg.foreground.count() == 0 {
        return Err(Error::NoMarks);
    }
    let bg = seg.background;
    let bg_l = bg.to_lab().l;
    let marks = seg.marks;

    let plan = plan_for(preset, opts.granularity, &opts.text_table)?;
    let keep = retained_pixels(&marks, &plan)?;
    let masked = apply_retained(img, &marks, &keep, bg);

    let retained_labels: Vec<MarkLabel> = marks
        .labels()
        .iter()
        .zip(keep.data())
        .map(|(&l, &k)| if k { l } else { MarkLabel::Background })
        .collect();
    let retained = MarkMap::new(
        marks.width(),
        marks.height(),
        retained_labels,
        marks.component_ids().to_vec(),
        marks.components().to_vec(),
    )?;
    let dimmed = reduce_contrast(&masked, &retained, preset.contrast, bg_l)?;

    let before = marks.counts();
    let after = retained.counts();
    let labels = MarkLabel::MARKS
        .iter()
        .map(|&l| {
            let (p, r) = (before[l.index()], after[l.index()]);
            let fraction = if p == 0 { 0.0 } else { r as f64 / p as f64 };
            (
                l,
                LabelStats {
                    pixels: p,
                    retained: r,
                    retained_fraction: fraction,
                },
            )
        })
        .collect();

    let (spectrum_before, spectrum_after) = if opts.analyze_spectrum {
        let a = FrequencySummary::of(&magnitude_spectrum_with_reference(img, bg_l));
        let b = FrequencySummary::of(&magnitude_spectrum_with_reference(&dimmed.image, bg_l));
        (Some(a), Some(b))
    } else {
        (None, None)
    };

    let vis_opts = VisibilityOptions {
        background_lightness: bg_l,
        text_table: opts.text_table.clone(),
        ..opts.visibility.clone()
    };
    let visibility = opts
        .distances_cm
        .iter()
        .map(|&d| {
            let geom = ViewingGeometry::new(d, opts.ppi)?;
            predict_visibility_with(preset, &geom, &opts.csf, &vis_opts)
        })
        .collect::<Result<Vec<_>>>()?;

    let report = TransformReport {
        input: None,
        output: None,
        preset: preset.clone(),
        granularity: opts.granularity,
        plan,
        background: bg,
        text_boxes: seg.text.boxes.len(),
        labels,
        gamut_events: dimmed.gamut_events,
        spectrum_before,
        spectrum_after,
        visibility,
    };
    Ok(TransformOutput {
        image: dimmed.image,
        marks,
        retained,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_presets() {
        let expect = [
            ("bar", 13, 75.0),
            ("scatter", 5, 75.0),
            ("line", 21, 25.0),
            ("pie", 7, 25.0),
            ("pie-study1", 7, 75.0),
        ];
        for (name, n, c) in expect {
            let p = load_preset(name).unwrap();
            assert_eq!((p.area_mask_n, p.contrast.value()), (n, c), "{name}");
            assert_eq!(p.line_mask_n % 2, 1);
            assert!(p.line_mask_n >= p.area_mask_n);
        }
    }

    #[test]
    fn unknown_chart_lists_valid_types() {
        let err = load_preset("donut").unwrap_err();
        match &err {
            Error::UnknownChartType { valid, .. } => {
                assert_eq!(valid, &vec!["bar", "pie", "scatter", "line"])
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("bar, pie, scatter, line"));
        assert!("donut".parse::<ChartType>().is_err());
        assert_eq!("pie".parse::<ChartType>().unwrap(), ChartType::Pie);
    }

    #[test]
    fn overrides_are_validated() {
        let bar = ChartPreset::builtin("bar").unwrap();
        assert!(matches!(
            preset_from_json(r#"{"areaMaskN": 4}"#, Some(&bar)),
            Err(Error::InvalidMaskSize(4))
        ));
        assert!(matches!(
            preset_from_json(r#"{"lineMaskN": 0}"#, Some(&bar)),
            Err(Error::InvalidMaskSize(0))
        ));
        assert!(matches!(
            preset_from_json(r#"{"contrast": 101}"#, Some(&bar)),
            Err(Error::InvalidContrast(_))
        ));
        assert!(matches!(
            preset_from_json(r#"{"areaMask": 5}"#, Some(&bar)),
            Err(Error::InvalidPreset(_))
        ));
        assert!(preset_from_json(r#"{"areaMaskN": 5}"#, None).is_err());
        let p = preset_from_json(r#"{"chartType": "line", "contrast": 40}"#, Some(&bar)).unwrap();
        assert_eq!(p.chart_type, ChartType::Line);
        assert_eq!((p.area_mask_n, p.contrast.value()), (21, 40.0));
    }

    #[test]
    fn preset_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("privshade-preset-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.json");
        std::fs::write(&path, r#"{"chartType": "scatter", "areaMaskN": 7}"#).unwrap();
        let p = load_preset(path.to_str().unwrap()).unwrap();
        assert_eq!((p.chart_type, p.area_mask_n, p.line_mask_n), (ChartType::Scatter, 7, 9));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn blank_image_has_no_marks() {
        let img = RasterImage::new(64, 48, Rgb::WHITE).unwrap();
        let bar = ChartPreset::builtin("bar").unwrap();
        assert!(matches!(
            transform(&img, &bar, None, &TransformOptions::default()),
            Err(Error::NoMarks)
        ));
    }
}
