//! Deterministic synthetic charts with pixel-level ground truth.
//!
//! Rendering is aliased: every pixel belongs to exactly one shape, so the
//! label image matches the raster exactly. Geometry is computed in integers
//! or with plain IEEE arithmetic; the only transcendental calls are the sin
//! and cos of pie boundaries and label anchors.

pub mod font;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::ChartType;
use crate::raster::{RasterImage, Rgb};
use crate::segment::{BBox, BinaryMaskImage, MarkLabel, MarkMap, TextBox};

/// Mark colors, all near L* = 50 with evenly spaced hues.
pub const PALETTE: [Rgb; 8] = [
    Rgb::new(190, 86, 95),
    Rgb::new(34, 135, 85),
    Rgb::new(98, 114, 191),
    Rgb::new(166, 105, 49),
    Rgb::new(0, 138, 144),
    Rgb::new(171, 91, 152),
    Rgb::new(115, 125, 42),
    Rgb::new(0, 131, 188),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChartStyle {
    pub background: Rgb,
    pub axis_color: Rgb,
    pub text_color: Rgb,
    pub axis_width: u32,
    pub font_scale: u32,
    /// Bar width as a share of its slot.
    pub bar_width_ratio: f64,
    pub dot_radius: u32,
    pub line_width: u32,
    /// Apply a 3×3 box blur after rendering (ground truth is unchanged).
    pub blur: bool,
}

impl Default for ChartStyle {
    fn default() -> Self {
        ChartStyle {
            background: Rgb::gray(250),
            axis_color: Rgb::gray(100),
            text_color: Rgb::gray(50),
            axis_width: 2,
            font_scale: 2,
            bar_width_ratio: 0.6,
            dot_radius: 6,
            line_width: 3,
            blur: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub chart_type: ChartType,
    pub width: u32,
    pub height: u32,
    /// Number of bars, slices, points or dots when data is generated.
    pub count: usize,
    /// Explicit values for bar, line and pie charts.
    pub values: Option<Vec<f64>>,
    /// Explicit `[x, y]` points for scatter charts, both in [0, 100].
    pub points: Option<Vec<[f64; 2]>>,
    pub title: Option<String>,
    pub style: ChartStyle,
}

impl ChartSpec {
    pub fn new(chart_type: ChartType) -> Self {
        let count = match chart_type {
            ChartType::Bar => 5,
            ChartType::Pie => 4,
            ChartType::Scatter => 20,
            ChartType::Line => 8,
        };
        ChartSpec {
            chart_type,
            width: 1080,
            height: 1080,
            count,
            values: None,
            points: None,
            title: None,
            style: ChartStyle::default(),
        }
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.count = values.len();
        self.values = Some(values);
        self
    }

    pub fn with_points(mut self, points: Vec<[f64; 2]>) -> Self {
        self.count = points.len();
        self.points = Some(points);
        self
    }

    pub fn blurred(mut self) -> Self {
        self.style.blur = true;
        self
    }

    fn default_title(&self) -> &'static str {
        match self.chart_type {
            ChartType::Bar => "QUARTERLY SALES",
            ChartType::Pie => "MARKET SHARE",
            ChartType::Scatter => "HEIGHT VS WEIGHT",
            ChartType::Line => "MONTHLY USERS",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Axes,
    Bar,
    Slice,
    Dot,
    Polyline,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthComponent {
    pub id: u32,
    pub kind: ShapeKind,
    pub label: MarkLabel,
    pub color: Rgb,
    pub bbox: BBox,
    pub pixel_count: usize,
    /// Drawn stroke width for strokes, text and dots.
    pub stroke_width: Option<f64>,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub width: u32,
    pub height: u32,
    pub background: Rgb,
    /// Per pixel: background, area_mark, line_mark or text.
    pub labels: Vec<MarkLabel>,
    /// Per pixel: component id, 0 for background.
    pub component_ids: Vec<u32>,
    pub components: Vec<TruthComponent>,
    pub text_boxes: Vec<TextBox>,
}

/// The JSON side of the ground truth (per-pixel labels go to a PNG).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSummary {
    pub chart_type: ChartType,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub background: Rgb,
    pub components: Vec<TruthComponent>,
    pub text_boxes: Vec<TextBox>,
}

impl GroundTruth {
    pub fn foreground(&self) -> BinaryMaskImage {
        let data = self.labels.iter().map(|&l| l != MarkLabel::Background).collect();
        BinaryMaskImage::from_vec(self.width, self.height, data).expect("sized at construction")
    }

    pub fn mask_of(&self, label: MarkLabel) -> BinaryMaskImage {
        let data = self.labels.iter().map(|&l| l == label).collect();
        BinaryMaskImage::from_vec(self.width, self.height, data).expect("sized at construction")
    }

    pub fn components_of(&self, kind: ShapeKind) -> impl Iterator<Item = &TruthComponent> {
        self.components.iter().filter(move |c| c.kind == kind)
    }

    /// Pixels of one component.
    pub fn component_mask(&self, id: u32) -> BinaryMaskImage {
        let data = self.component_ids.iter().map(|&c| c == id).collect();
        BinaryMaskImage::from_vec(self.width, self.height, data).expect("sized at construction")
    }

    /// Ground-truth labels as a mark map (no border labels).
    pub fn to_mark_map(&self) -> MarkMap {
        MarkMap::new(
            self.width,
            self.height,
            self.labels.clone(),
            self.component_ids.clone(),
            Vec::new(),
        )
        .expect("sized at construction")
    }

    pub fn summary(&self, chart_type: ChartType, seed: u64) -> TruthSummary {
        TruthSummary {
            chart_type,
            seed,
            width: self.width,
            height: self.height,
            background: self.background,
            components: self.components.clone(),
            text_boxes: self.text_boxes.clone(),
        }
    }
}

struct Canvas {
    w: u32,
    h: u32,
    px: Vec<Rgb>,
    labels: Vec<MarkLabel>,
    ids: Vec<u32>,
    components: Vec<TruthComponent>,
}

impl Canvas {
    fn new(w: u32, h: u32, bg: Rgb) -> Self {
        let n = w as usize * h as usize;
        Canvas {
            w,
            h,
            px: vec![bg; n],
            labels: vec![MarkLabel::Background; n],
            ids: vec![0; n],
            components: Vec::new(),
        }
    }

    fn begin(&mut self, kind: ShapeKind, label: MarkLabel, color: Rgb, stroke: Option<f64>) -> u32 {
        let id = self.components.len() as u32 + 1;
        self.components.push(TruthComponent {
            id,
            kind,
            label,
            color,
            bbox: BBox::default(),
            pixel_count: 0,
            stroke_width: stroke,
            value: None,
            text: None,
        });
        id
    }

    fn paint(&mut self, id: u32, x: i64, y: i64) {
        if x < 0 || y < 0 || x >= self.w as i64 || y >= self.h as i64 {
            return;
        }
        let c = &self.components[id as usize - 1];
        let i = y as usize * self.w as usize + x as usize;
        self.px[i] = c.color;
        self.labels[i] = c.label;
        self.ids[i] = id;
    }

    fn rect(&mut self, id: u32, x0: i64, y0: i64, x1: i64, y1: i64) {
        for y in y0.max(0)..y1.min(self.h as i64) {
            for x in x0.max(0)..x1.min(self.w as i64) {
                self.paint(id, x, y);
            }
        }
    }

    fn text(&mut self, s: &str, x0: i64, y0: i64, scale: u32, color: Rgb) -> u32 {
        let id = self.begin(ShapeKind::Text, MarkLabel::Text, color, Some(scale as f64));
        self.components[id as usize - 1].text = Some(s.to_string());
        let mut pts = Vec::new();
        font::render(s, x0, y0, scale, |x, y| pts.push((x, y)));
        for (x, y) in pts {
            self.paint(id, x, y);
        }
        id
    }

    /// Recomputes counts and boxes from the painted pixels and drops
    /// components that were fully clipped or painted over.
    fn finish(mut self, blur: bool, bg: Rgb) -> (RasterImage, GroundTruth) {
        let w = self.w as usize;
        let mut bounds: Vec<Option<(u32, u32, u32, u32)>> = vec![None; self.components.len()];
        let mut counts = vec![0usize; self.components.len()];
        for (i, &id) in self.ids.iter().enumerate() {
            if id == 0 {
                continue;
            }
            let (x, y) = ((i % w) as u32, (i / w) as u32);
            let k = id as usize - 1;
            counts[k] += 1;
            bounds[k] = Some(match bounds[k] {
                None => (x, y, x, y),
                Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
            });
        }
        for (k, c) in self.components.iter_mut().enumerate() {
            c.pixel_count = counts[k];
            if let Some((x0, y0, x1, y1)) = bounds[k] {
                c.bbox = BBox {
                    x: x0,
                    y: y0,
                    w: x1 - x0 + 1,
                    h: y1 - y0 + 1,
                };
            }
        }
        self.components.retain(|c| c.pixel_count > 0);
        let text_boxes = self
            .components
            .iter()
            .filter(|c| c.kind == ShapeKind::Text)
            .map(|c| TextBox::from(c.bbox))
            .collect();

        let px = if blur { box_blur(&self.px, self.w, self.h) } else { self.px };
        let img = RasterImage::from_pixels(self.w, self.h, px).expect("canvas is nonempty");
        let truth = GroundTruth {
            width: self.w,
            height: self.h,
            background: bg,
            labels: self.labels,
            component_ids: self.ids,
            components: self.components,
            text_boxes,
        };
        (img, truth)
    }
}

/// 3×3 mean filter with edge replication and integer rounding.
fn box_blur(px: &[Rgb], w: u32, h: u32) -> Vec<Rgb> {
    let (w, h) = (w as i64, h as i64);
    let mut out = Vec::with_capacity(px.len());
    for y in 0..h {
        for x in 0..w {
            let mut sum = [0u32; 3];
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let sx = (x + dx).clamp(0, w - 1);
                    let sy = (y + dy).clamp(0, h - 1);
                    let c = px[(sy * w + sx) as usize].channels();
                    for k in 0..3 {
                        sum[k] += c[k] as u32;
                    }
                }
            }
            let avg = |s: u32| ((s + 4) / 9) as u8;
            out.push(Rgb::new(avg(sum[0]), avg(sum[1]), avg(sum[2])));
        }
    }
    out
}

struct Layout {
    x0: i64,
    x1: i64,
    y0: i64,
    /// Baseline row: the x axis starts here.
    y1: i64,
}

impl Layout {
    fn of(w: u32, h: u32) -> Self {
        let (w, h) = (w as i64, h as i64);
        Layout {
            x0: w * 120 / 1080,
            x1: w - w * 60 / 1080,
            y0: h * 100 / 1080,
            y1: h - h * 120 / 1080,
        }
    }

    fn plot_w(&self) -> f64 {
        (self.x1 - self.x0).max(1) as f64
    }

    fn plot_h(&self) -> f64 {
        (self.y1 - self.y0).max(1) as f64
    }

    fn y_of(&self, v: f64) -> i64 {
        self.y1 - (v * self.plot_h() / 100.0).round() as i64
    }

    fn x_of(&self, v: f64) -> i64 {
        self.x0 + (v * self.plot_w() / 100.0).round() as i64
    }
}

const TICK_LEN: i64 = 8;
const LABEL_GAP: i64 = 6;

/// Axes with ticks as one component, plus tick labels.
fn draw_axes(cv: &mut Canvas, lay: &Layout, style: &ChartStyle, x_ticks: &[(i64, String)]) {
    let aw = style.axis_width as i64;
    let sc = style.font_scale;
    let glyph_h = (font::GLYPH_H * sc) as i64;
    let axes = cv.begin(ShapeKind::Axes, MarkLabel::LineMark, style.axis_color, Some(aw as f64));
    cv.rect(axes, lay.x0 - aw, lay.y1, lay.x1, lay.y1 + aw);
    cv.rect(axes, lay.x0 - aw, lay.y0, lay.x0, lay.y1 + aw);

    for v in (0..=100).step_by(20) {
        let y = lay.y_of(v as f64);
        let top = y - aw / 2;
        cv.rect(axes, lay.x0 - aw - TICK_LEN, top, lay.x0 - aw, top + aw);
        let s = v.to_string();
        let right = lay.x0 - aw - TICK_LEN - LABEL_GAP;
        let left = right - font::text_width(&s, sc) as i64;
        cv.text(&s, left, y - glyph_h / 2, sc, style.text_color);
    }
    for (x, s) in x_ticks {
        let left = x - aw / 2;
        cv.rect(axes, left, lay.y1 + aw, left + aw, lay.y1 + aw + TICK_LEN);
        let tw = font::text_width(s, sc) as i64;
        cv.text(s, x - tw / 2, lay.y1 + aw + TICK_LEN + LABEL_GAP, sc, style.text_color);
    }
}

fn draw_title(cv: &mut Canvas, lay: &Layout, spec: &ChartSpec, title: &str) {
    let sc = spec.style.font_scale;
    let tw = font::text_width(title, sc) as i64;
    let top = (lay.y0 - (font::GLYPH_H * sc) as i64) / 2;
    cv.text(title, (spec.width as i64 - tw) / 2, top, sc, spec.style.text_color);
}

fn category(i: usize) -> String {
    ((b'A' + (i % 26) as u8) as char).to_string()
}

fn check_values(values: &[f64], min_exclusive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Range("a chart needs at least one value".into()));
    }
    for &v in values {
        let ok = v.is_finite() && v <= 100.0 && if min_exclusive { v > 0.0 } else { v >= 0.0 };
        if !ok {
            let range = if min_exclusive { "(0, 100]" } else { "[0, 100]" };
            return Err(Error::Range(format!("value {v} outside the plot range {range}")));
        }
    }
    Ok(())
}

fn draw_bars(cv: &mut Canvas, lay: &Layout, spec: &ChartSpec, values: &[f64]) {
    let n = values.len();
    let slot = lay.plot_w() / n as f64;
    let bw = (slot * spec.style.bar_width_ratio).round().max(1.0) as i64;
    let ticks: Vec<(i64, String)> = (0..n)
        .map(|i| (lay.x0 + (slot * (i as f64 + 0.5)).round() as i64, category(i)))
        .collect();
    draw_axes(cv, lay, &spec.style, &ticks);
    for (i, &v) in values.iter().enumerate() {
        let left = lay.x0 + (slot * i as f64 + (slot - bw as f64) / 2.0).round() as i64;
        let top = lay.y_of(v);
        let color = PALETTE[i % PALETTE.len()];
        let stroke = (bw.min(lay.y1 - top)) as f64;
        let id = cv.begin(ShapeKind::Bar, MarkLabel::AreaMark, color, Some(stroke));
        cv.components[id as usize - 1].value = Some(v);
        cv.rect(id, left, top, left + bw, lay.y1);
    }
}

/// Pixels within `width / 2` of the segment, by an exact integer test.
fn capsule(cv: &mut Canvas, id: u32, a: (i64, i64), b: (i64, i64), width: i64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let r = (width + 1) / 2;
    let w2 = width * width;
    for y in a.1.min(b.1) - r..=a.1.max(b.1) + r {
        for x in a.0.min(b.0) - r..=a.0.max(b.0) + r {
            let (px, py) = (x - a.0, y - a.1);
            let dot = px * dx + py * dy;
            let inside = if len2 == 0 || dot <= 0 {
                4 * (px * px + py * py) <= w2
            } else if dot >= len2 {
                let (qx, qy) = (x - b.0, y - b.1);
                4 * (qx * qx + qy * qy) <= w2
            } else {
                let cross = (px * dy - py * dx) as i128;
                4 * cross * cross <= w2 as i128 * len2 as i128
            };
            if inside {
                cv.paint(id, x, y);
            }
        }
    }
}

fn draw_line(cv: &mut Canvas, lay: &Layout, spec: &ChartSpec, values: &[f64]) {
    let n = values.len();
    let slot = lay.plot_w() / n as f64;
    let pts: Vec<(i64, i64)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (lay.x0 + (slot * (i as f64 + 0.5)).round() as i64, lay.y_of(v)))
        .collect();
    let ticks: Vec<(i64, String)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.0, (i + 1).to_string()))
        .collect();
    draw_axes(cv, lay, &spec.style, &ticks);
    let width = spec.style.line_width as i64;
    let id = cv.begin(ShapeKind::Polyline, MarkLabel::LineMark, PALETTE[0], Some(width as f64));
    if pts.len() == 1 {
        capsule(cv, id, pts[0], pts[0], width);
    }
    for seg in pts.windows(2) {
        capsule(cv, id, seg[0], seg[1], width);
    }
}

fn draw_scatter(cv: &mut Canvas, lay: &Layout, spec: &ChartSpec, points: &[[f64; 2]]) {
    let ticks: Vec<(i64, String)> = (0..=100)
        .step_by(20)
        .map(|v| (lay.x_of(v as f64), v.to_string()))
        .collect();
    draw_axes(cv, lay, &spec.style, &ticks);
    let r = spec.style.dot_radius as i64;
    for p in points {
        let (cx, cy) = (lay.x_of(p[0]), lay.y_of(p[1]));
        let id = cv.begin(ShapeKind::Dot, MarkLabel::AreaMark, PALETTE[2], Some((2 * r + 1) as f64));
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                    cv.paint(id, x, y);
                }
            }
        }
    }
}

fn cross(u: (i64, i64), v: (i64, i64)) -> i128 {
    u.0 as i128 * v.1 as i128 - u.1 as i128 * v.0 as i128
}

fn draw_pie(cv: &mut Canvas, lay: &Layout, spec: &ChartSpec, values: &[f64]) {
    let total: f64 = values.iter().sum();
    let cx = (lay.x0 + lay.x1) / 2;
    let cy = (lay.y0 + lay.y1) / 2;
    let radius = ((lay.x1 - lay.x0).min(lay.y1 - lay.y0) * 2 / 5).max(1);

    // Boundary directions, clockwise on screen from 12 o'clock, as integer
    // vectors so sector membership is an exact cross-product test.
    let mut cum = 0.0;
    let mut angles = vec![0.0];
    for &v in values {
        cum += v;
        angles.push(cum / total);
    }
    let dirs: Vec<(i64, i64)> = angles
        .iter()
        .map(|&t| {
            let a = -std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * t;
            ((a.cos() * 1e6).round() as i64, (a.sin() * 1e6).round() as i64)
        })
        .collect();

    let ids: Vec<u32> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let id = cv.begin(ShapeKind::Slice, MarkLabel::AreaMark, PALETTE[i % PALETTE.len()], None);
            cv.components[id as usize - 1].value = Some(v);
            id
        })
        .collect();

    for y in cy - radius..=cy + radius {
        for x in cx - radius..=cx + radius {
            let p = (x - cx, y - cy);
            if p.0 * p.0 + p.1 * p.1 > radius * radius {
                continue;
            }
            let k = (0..values.len())
                .find(|&k| {
                    let (a, b) = (dirs[k], dirs[k + 1]);
                    if angles[k + 1] - angles[k] <= 0.5 {
                        cross(a, p) >= 0 && cross(p, b) > 0
                    } else {
                        !(cross(b, p) >= 0 && cross(p, a) > 0)
                    }
                })
                .unwrap_or(0);
            cv.paint(ids[k], x, y);
        }
    }

    let sc = spec.style.font_scale;
    let glyph_h = (font::GLYPH_H * sc) as f64;
    for i in 0..values.len() {
        let mid = -std::f64::consts::FRAC_PI_2
            + std::f64::consts::TAU * 0.5 * (angles[i] + angles[i + 1]);
        let dist = radius as f64 + 2.0 * glyph_h;
        let s = category(i);
        let tw = font::text_width(&s, sc) as f64;
        let lx = (cx as f64 + dist * mid.cos() - tw / 2.0).round() as i64;
        let ly = (cy as f64 + dist * mid.sin() - glyph_h / 2.0).round() as i64;
        cv.text(&s, lx, ly, sc, spec.style.text_color);
    }
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: u32, hi: u32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi) as f64).collect()
}

/// Dot centers at least `2r + 4` pixels apart, placed by rejection; after
/// too many rejections the spacing rule is dropped (tiny canvases).
fn random_points(rng: &mut ChaCha8Rng, n: usize, lay: &Layout, r: i64) -> Vec<[f64; 2]> {
    let min_d2 = (2 * r + 4).pow(2);
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
    let mut centers: Vec<(i64, i64)> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n {
        let p = [rng.random_range(5..=95) as f64, rng.random_range(5..=95) as f64];
        let c = (lay.x_of(p[0]), lay.y_of(p[1]));
        attempts += 1;
        let clear = centers
            .iter()
            .all(|q| (q.0 - c.0).pow(2) + (q.1 - c.1).pow(2) >= min_d2);
        if clear || attempts > 10_000 {
            pts.push(p);
            centers.push(c);
        }
    }
    pts
}

pub fn generate(spec: &ChartSpec, seed: u64) -> Result<(RasterImage, GroundTruth)> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::InvalidImage("canvas must be at least 1x1".into()));
    }
    if spec.count == 0 && spec.values.is_none() && spec.points.is_none() {
        return Err(Error::Range("a chart needs at least one value".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lay = Layout::of(spec.width, spec.height);
    let mut cv = Canvas::new(spec.width, spec.height, spec.style.background);
    let title = spec.title.clone().unwrap_or_else(|| spec.default_title().to_string());
    draw_title(&mut cv, &lay, spec, &title);

    match spec.chart_type {
        ChartType::Bar | ChartType::Line => {
            let values = match &spec.values {
                Some(v) => v.clone(),
                None => random_values(&mut rng, spec.count, 10, 100),
            };
            check_values(&values, false)?;
            if spec.chart_type == ChartType::Bar {
                draw_bars(&mut cv, &lay, spec, &values);
            } else {
                draw_line(&mut cv, &lay, spec, &values);
            }
        }
        ChartType::Pie => {
            let values = match &spec.values {
                Some(v) => v.clone(),
                None => random_values(&mut rng, spec.count, 5, 40),
            };
            check_values(&values, true)?;
            draw_pie(&mut cv, &lay, spec, &values);
        }
        ChartType::Scatter => {
            let points = match &spec.points {
                Some(p) => p.clone(),
                None => random_points(&mut rng, spec.count, &lay, spec.style.dot_radius as i64),
            };
            let flat: Vec<f64> = points.iter().flatten().copied().collect();
            check_values(&flat, false)?;
            draw_scatter(&mut cv, &lay, spec, &points);
        }
    }
    Ok(cv.finish(spec.style.blur, spec.style.background))
}

#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub name: String,
    pub spec: ChartSpec,
    pub seed: u64,
    pub image: RasterImage,
    pub truth: GroundTruth,
}

/// Seed of the `index`-th chart of one type in a corpus built from `seed`.
pub fn item_seed(seed: u64, chart_type: ChartType, index: usize) -> u64 {
    let type_index = ChartType::ALL.iter().position(|&c| c == chart_type).unwrap_or(0) as u64;
    seed.wrapping_mul(1_000_003)
        .wrapping_add(type_index * 1_000 + index as u64)
}

/// `count` charts per type, generated in parallel and returned in
/// type-major order. Item seeds are derived from `seed`, type and index.
pub fn generate_corpus(types: &[ChartType], count: usize, seed: u64) -> Result<Vec<CorpusItem>> {
    let jobs: Vec<(ChartType, usize)> = types
        .iter()
        .flat_map(|&t| (0..count).map(move |i| (t, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(t, i)| {
            let item_seed = item_seed(seed, t, i);
            let spec = ChartSpec::new(t);
            let (image, truth) = generate(&spec, item_seed)?;
            Ok(CorpusItem {
                name: format!("{}_{:02}", t.as_str(), i),
                spec,
                seed: item_seed,
                image,
                truth,
            })
        })
        .collect()
}
