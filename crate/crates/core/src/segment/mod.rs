//! Foreground extraction and mark classification.

mod components;
mod distance;
mod marks;
mod text;
mod thinning;
mod threshold;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{encode_png, estimate_background, srgb_lightness, RasterImage, Rgb};

pub use components::{label_components, Labeling};
pub use distance::{distance_transform, squared_distance_transform};
pub use marks::{area_border, classify_marks, mask_stroke_width, stroke_width};
pub use text::detect_text_heuristic;
pub use thinning::skeletonize;
pub use threshold::{li_criterion, li_threshold, li_threshold_histogram};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMaskImage {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMaskImage {
    pub fn new(width: u32, height: u32) -> Self {
        BinaryMaskImage {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "mask has {} entries, expected {expected}",
                data.len()
            )));
        }
        Ok(BinaryMaskImage { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMaskImage { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < self.width as i64
            && y < self.height as i64
            && self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMaskImage) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkLabel {
    Background,
    AreaMark,
    AreaBorder,
    LineMark,
    Text,
}

impl MarkLabel {
    pub const ALL: [MarkLabel; 5] = [
        MarkLabel::Background,
        MarkLabel::AreaMark,
        MarkLabel::AreaBorder,
        MarkLabel::LineMark,
        MarkLabel::Text,
    ];

    /// Every label that gets a mask pattern.
    pub const MARKS: [MarkLabel; 4] = [
        MarkLabel::AreaMark,
        MarkLabel::AreaBorder,
        MarkLabel::LineMark,
        MarkLabel::Text,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MarkLabel::Background => "background",
            MarkLabel::AreaMark => "area_mark",
            MarkLabel::AreaBorder => "area_border",
            MarkLabel::LineMark => "line_mark",
            MarkLabel::Text => "text",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Display color used by label dumps.
    pub fn color(self) -> Rgb {
        match self {
            MarkLabel::Background => Rgb::WHITE,
            MarkLabel::AreaMark => Rgb::new(66, 133, 244),
            MarkLabel::AreaBorder => Rgb::new(219, 68, 55),
            MarkLabel::LineMark => Rgb::new(15, 157, 88),
            MarkLabel::Text => Rgb::new(0, 0, 0),
        }
    }
}

impl fmt::Display for MarkLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x < self.right() && y < self.bottom()
    }

    pub fn union(&self, o: &BBox) -> BBox {
        let x = self.x.min(o.x);
        let y = self.y.min(o.y);
        BBox {
            x,
            y,
            w: self.right().max(o.right()) - x,
            h: self.bottom().max(o.bottom()) - y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// 1-based; 0 in the id map means "no component".
    pub id: u32,
    pub label: MarkLabel,
    pub bbox: BBox,
    pub pixel_count: usize,
    pub stroke_width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkMap {
    width: u32,
    height: u32,
    labels: Vec<MarkLabel>,
    component_ids: Vec<u32>,
    components: Vec<Component>,
}

impl MarkMap {
    pub fn new(
        width: u32,
        height: u32,
        labels: Vec<MarkLabel>,
        component_ids: Vec<u32>,
        components: Vec<Component>,
    ) -> Result<Self> {
        let n = width as usize * height as usize;
        if labels.len() != n || component_ids.len() != n {
            return Err(Error::InvalidImage(format!(
                "mark map buffers must hold {n} entries"
            )));
        }
        Ok(MarkMap {
            width,
            height,
            labels,
            component_ids,
            components,
        })
    }

    /// A map with every pixel labeled background.
    pub fn background(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        MarkMap {
            width,
            height,
            labels: vec![MarkLabel::Background; n],
            component_ids: vec![0; n],
            components: Vec::new(),
        }
    }

    /// Uniform labeling of a foreground mask, without components.
    pub fn from_mask(mask: &BinaryMaskImage, label: MarkLabel) -> Self {
        let labels = mask
            .data()
            .iter()
            .map(|&v| if v { label } else { MarkLabel::Background })
            .collect();
        MarkMap {
            width: mask.width(),
            height: mask.height(),
            labels,
            component_ids: vec![0; mask.data().len()],
            components: Vec::new(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[MarkLabel] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [MarkLabel] {
        &mut self.labels
    }

    pub fn component_ids(&self) -> &[u32] {
        &self.component_ids
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: u32) -> Option<&Component> {
        id.checked_sub(1)
            .and_then(|i| self.components.get(i as usize))
    }

    pub fn label(&self, x: u32, y: u32) -> MarkLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Pixel counts indexed by `MarkLabel::index`.
    pub fn counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn mask_of(&self, label: MarkLabel) -> BinaryMaskImage {
        let data = self.labels.iter().map(|&l| l == label).collect();
        BinaryMaskImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn foreground(&self) -> BinaryMaskImage {
        let data = self
            .labels
            .iter()
            .map(|&l| l != MarkLabel::Background)
            .collect();
        BinaryMaskImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn to_image(&self) -> RasterImage {
        let pixels = self.labels.iter().map(|l| l.color()).collect();
        RasterImage::from_pixels(self.width, self.height, pixels)
            .expect("mark map dimensions are valid")
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        encode_png(&self.to_image())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl From<TextBox> for BBox {
    fn from(b: TextBox) -> BBox {
        BBox {
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
        }
    }
}

impl From<BBox> for TextBox {
    fn from(b: BBox) -> TextBox {
        TextBox {
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextSource {
    #[default]
    External,
    Heuristic,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextAnnotation {
    pub boxes: Vec<TextBox>,
    #[serde(default)]
    pub source: TextSource,
}

impl TextAnnotation {
    pub fn external(boxes: Vec<TextBox>) -> Self {
        TextAnnotation {
            boxes,
            source: TextSource::External,
        }
    }

    /// Parses a sidecar `{"boxes":[{"x":..,"y":..,"w":..,"h":..}]}` file.
    pub fn from_json(json: &str) -> Result<Self> {
        let mut ann: TextAnnotation = serde_json::from_str(json)?;
        ann.source = TextSource::External;
        Ok(ann)
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        for b in &self.boxes {
            if b.w == 0 || b.h == 0 {
                return Err(Error::InvalidAnnotation(format!(
                    "box at ({}, {}) has zero size",
                    b.x, b.y
                )));
            }
            if b.x as u64 + b.w as u64 > width as u64 || b.y as u64 + b.h as u64 > height as u64 {
                return Err(Error::InvalidAnnotation(format!(
                    "box ({}, {}, {}, {}) exceeds the {width}x{height} image",
                    b.x, b.y, b.w, b.h
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.boxes.iter().any(|&b| BBox::from(b).contains(x, y))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Components with stroke width at or below this are line marks.
    pub line_width_max: f64,
    /// Border thickness, as Chebyshev distance to the outside of a component.
    pub border_thickness: u32,
    /// Neighboring pixels join one component when no channel differs by more.
    pub color_tolerance: u8,
    pub text_max_area: usize,
    /// Vertical center offset allowed between glyphs, relative to glyph height.
    pub text_align_tolerance: f64,
    /// Horizontal gap allowed between glyphs, relative to glyph height.
    pub text_gap_tolerance: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            line_width_max: 8.0,
            border_thickness: 2,
            color_tolerance: 24,
            text_max_area: 400,
            text_align_tolerance: 0.5,
            text_gap_tolerance: 1.0,
        }
    }
}

/// Gray level used for thresholding: CIE lightness rescaled to 0..=255.
pub fn gray_level(c: Rgb) -> u8 {
    (srgb_lightness(c) * 2.55).round().clamp(0.0, 255.0) as u8
}

pub fn grayscale(img: &RasterImage) -> Vec<u8> {
    crate::raster::map_pixels(img, gray_level)
}

/// Most frequent gray value along the outermost rows and columns.
pub fn background_gray(gray: &[u8], width: u32, height: u32) -> u8 {
    let (w, h) = (width as usize, height as usize);
    let mut hist = [0u64; 256];
    for y in 0..h {
        for x in 0..w {
            if y == 0 || x == 0 || y + 1 == h || x + 1 == w {
                hist[gray[y * w + x] as usize] += 1;
            }
        }
    }
    let mut best = 255;
    for v in (0..256).rev() {
        if hist[v] > hist[best] {
            best = v;
        }
    }
    best as u8
}

/// Li-thresholded foreground: the side of the threshold away from the
/// background gray level.
pub fn foreground_mask(img: &RasterImage) -> Result<BinaryMaskImage> {
    let gray = grayscale(img);
    let t = li_threshold(&gray)?;
    let bg = background_gray(&gray, img.width(), img.height());
    let dark_marks = bg >= t;
    let data = gray.iter().map(|&g| (g < t) == dark_marks).collect();
    Ok(BinaryMaskImage {
        width: img.width(),
        height: img.height(),
        data,
    })
}

/// Everything `segment` produces for one image.
#[derive(Clone, Debug)]
pub struct Segmentation {
    pub background: Rgb,
    pub foreground: BinaryMaskImage,
    pub text: TextAnnotation,
    pub marks: MarkMap,
}

/// Foreground, text (external if given, heuristic otherwise) and marks.
/// A single-level image yields an empty foreground instead of an error.
pub fn segment(
    img: &RasterImage,
    text: Option<&TextAnnotation>,
    config: &SegmentConfig,
) -> Result<Segmentation> {
    let foreground = match foreground_mask(img) {
        Ok(fg) => fg,
        Err(Error::DegenerateHistogram) => BinaryMaskImage::new(img.width(), img.height()),
        Err(e) => return Err(e),
    };
    let text = match text {
        Some(t) => {
            t.validate(img.width(), img.height())?;
            t.clone()
        }
        None => detect_text_heuristic(img, &foreground, config),
    };
    let marks = classify_marks(img, &foreground, &text, config)?;
    Ok(Segmentation {
        background: estimate_background(img),
        foreground,
        text,
        marks,
    })
}
