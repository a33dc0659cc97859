//! Tiled center-keep mask patterns.
//!
//! A pattern is an `n × n` tile repeated from the image origin. A mark pixel
//! at `(x, y)` survives iff the tile cell `(x mod n, y mod n)` is kept; every
//! other mark pixel is repainted with the background color.
//!
//! Area masks keep only the tile center. Line masks keep the center row and
//! center column of the tile (a cross, `2n - 1` cells), so any stroke that
//! crosses a tile boundary region still meets a kept cell at least once per
//! tile in both directions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{RasterImage, Rgb};
use crate::segment::{BinaryMaskImage, MarkLabel, MarkMap};

const AREA_SIZES_TESTED: [u32; 7] = [1, 3, 5, 7, 9, 11, 13];
const LINE_SIZES_TESTED: [u32; 7] = [1, 5, 9, 13, 17, 21, 25];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Area,
    Line,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternSpec", into = "PatternSpec")]
pub struct MaskPattern {
    n: u32,
    kind: MaskKind,
    keep: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternSpec {
    kind: MaskKind,
    n: i64,
}

impl TryFrom<PatternSpec> for MaskPattern {
    type Error = Error;

    fn try_from(s: PatternSpec) -> Result<Self> {
        MaskPattern::new(s.kind, s.n)
    }
}

impl From<MaskPattern> for PatternSpec {
    fn from(p: MaskPattern) -> Self {
        PatternSpec {
            kind: p.kind,
            n: p.n as i64,
        }
    }
}

fn check_size(n: i64) -> Result<u32> {
    if n < 1 || n % 2 == 0 || n > u32::MAX as i64 {
        return Err(Error::InvalidMaskSize(n));
    }
    Ok(n as u32)
}

impl MaskPattern {
    pub fn new(kind: MaskKind, n: i64) -> Result<Self> {
        match kind {
            MaskKind::Area => make_area_mask(n),
            MaskKind::Line => make_line_mask(n),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn keeps(&self, cx: u32, cy: u32) -> bool {
        self.keep[(cy * self.n + cx) as usize]
    }

    /// Whether an image pixel survives under origin-anchored tiling.
    #[inline]
    pub fn retains(&self, x: u32, y: u32) -> bool {
        self.keeps(x % self.n, y % self.n)
    }

    pub fn kept_cells(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    /// Share of a large solid region that survives.
    pub fn retained_fraction_limit(&self) -> f64 {
        self.kept_cells() as f64 / (self.n as f64 * self.n as f64)
    }
}

/// Keeps only the tile center.
pub fn make_area_mask(n: i64) -> Result<MaskPattern> {
    let n = check_size(n)?;
    if !AREA_SIZES_TESTED.contains(&n) {
        log::info!("area mask size {n} is outside the tested range {AREA_SIZES_TESTED:?}");
    }
    let c = n / 2;
    let keep = (0..n * n).map(|i| i % n == c && i / n == c).collect();
    Ok(MaskPattern {
        n,
        kind: MaskKind::Area,
        keep,
    })
}

/// Keeps the center row and center column of the tile.
pub fn make_line_mask(n: i64) -> Result<MaskPattern> {
    let n = check_size(n)?;
    if !LINE_SIZES_TESTED.contains(&n) {
        log::info!("line mask size {n} is outside the tested range {LINE_SIZES_TESTED:?}");
    }
    let c = n / 2;
    let keep = (0..n * n).map(|i| i % n == c || i / n == c).collect();
    Ok(MaskPattern {
        n,
        kind: MaskKind::Line,
        keep,
    })
}

/// Stroke-width to line-mask-size table for text: the first row whose
/// `max_width` is not exceeded wins, otherwise `fallback_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveTextTable {
    pub rows: Vec<AdaptiveRow>,
    pub fallback_n: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveRow {
    pub max_width: f64,
    pub n: i64,
}

impl Default for AdaptiveTextTable {
    fn default() -> Self {
        AdaptiveTextTable {
            rows: vec![
                AdaptiveRow { max_width: 2.0, n: 9 },
                AdaptiveRow { max_width: 4.0, n: 13 },
            ],
            fallback_n: 17,
        }
    }
}

impl AdaptiveTextTable {
    pub fn size_for(&self, stroke_width: f64) -> Result<i64> {
        if stroke_width.is_nan() || stroke_width < 1.0 {
            return Err(Error::InvalidStrokeWidth(stroke_width));
        }
        Ok(self
            .rows
            .iter()
            .find(|r| stroke_width <= r.max_width)
            .map_or(self.fallback_n, |r| r.n))
    }

    pub fn pattern_for(&self, stroke_width: f64) -> Result<MaskPattern> {
        make_line_mask(self.size_for(stroke_width)?)
    }

    pub fn validate(&self) -> Result<()> {
        for n in self.rows.iter().map(|r| r.n).chain([self.fallback_n]) {
            check_size(n)?;
        }
        if self.rows.windows(2).any(|w| w[0].max_width >= w[1].max_width) {
            return Err(Error::InvalidConfig(
                "adaptive text rows must have increasing max_width".into(),
            ));
        }
        Ok(())
    }
}

/// Line mask sized from a text stroke width with the default table.
pub fn adaptive_text_mask(stroke_width: f64) -> Result<MaskPattern> {
    AdaptiveTextTable::default().pattern_for(stroke_width)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanEntry {
    Fixed(MaskPattern),
    /// Per text component, sized from its stroke width.
    Adaptive,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AdaptiveTag {
    Adaptive,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Fixed(MaskPattern),
    Adaptive(AdaptiveTag),
}

impl Serialize for PlanEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PlanEntry::Fixed(p) => EntryRepr::Fixed(p.clone()).serialize(s),
            PlanEntry::Adaptive => EntryRepr::Adaptive(AdaptiveTag::Adaptive).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PlanEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match EntryRepr::deserialize(d)? {
            EntryRepr::Fixed(p) => PlanEntry::Fixed(p),
            EntryRepr::Adaptive(_) => PlanEntry::Adaptive,
        })
    }
}

/// Pattern per mark label, serialized as
/// `{"area_mark": {"kind": "area", "n": 13}, ..., "text": "adaptive"}`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<MarkLabel, PlanEntry>", into = "BTreeMap<MarkLabel, PlanEntry>")]
pub struct MaskPlan {
    entries: BTreeMap<MarkLabel, PlanEntry>,
    text_table: AdaptiveTextTable,
}

impl TryFrom<BTreeMap<MarkLabel, PlanEntry>> for MaskPlan {
    type Error = Error;

    fn try_from(entries: BTreeMap<MarkLabel, PlanEntry>) -> Result<Self> {
        let plan = MaskPlan {
            entries,
            text_table: AdaptiveTextTable::default(),
        };
        plan.validate()?;
        Ok(plan)
    }
}

impl From<MaskPlan> for BTreeMap<MarkLabel, PlanEntry> {
    fn from(p: MaskPlan) -> Self {
        p.entries
    }
}

impl MaskPlan {
    pub fn empty() -> Self {
        MaskPlan::default()
    }

    /// Area mask for area marks; line masks for lines and borders; adaptive
    /// line masks for text.
    pub fn fine(area_n: i64, line_n: i64) -> Result<Self> {
        let mut plan = MaskPlan::empty();
        plan.set(MarkLabel::AreaMark, PlanEntry::Fixed(make_area_mask(area_n)?));
        plan.set(MarkLabel::LineMark, PlanEntry::Fixed(make_line_mask(line_n)?));
        plan.set(MarkLabel::AreaBorder, PlanEntry::Fixed(make_line_mask(line_n)?));
        plan.set(MarkLabel::Text, PlanEntry::Adaptive);
        Ok(plan)
    }

    /// The same area mask for every mark.
    pub fn coarse(area_n: i64) -> Result<Self> {
        let pattern = make_area_mask(area_n)?;
        let mut plan = MaskPlan::empty();
        for label in MarkLabel::MARKS {
            plan.set(label, PlanEntry::Fixed(pattern.clone()));
        }
        Ok(plan)
    }

    pub fn set(&mut self, label: MarkLabel, entry: PlanEntry) {
        if label != MarkLabel::Background {
            self.entries.insert(label, entry);
        }
    }

    pub fn entry(&self, label: MarkLabel) -> Option<&PlanEntry> {
        self.entries.get(&label)
    }

    pub fn with_text_table(mut self, table: AdaptiveTextTable) -> Result<Self> {
        table.validate()?;
        self.text_table = table;
        Ok(self)
    }

    pub fn text_table(&self) -> &AdaptiveTextTable {
        &self.text_table
    }

    /// Every mark label has a pattern.
    pub fn validate(&self) -> Result<()> {
        for label in MarkLabel::MARKS {
            if !self.entries.contains_key(&label) {
                return Err(Error::IncompletePlan(label));
            }
        }
        Ok(())
    }

    /// Pattern for a pixel given its label and, for adaptive text, the
    /// stroke width of its component. Missing widths use the narrowest row.
    fn resolve(&self, label: MarkLabel, stroke: Option<f64>) -> Result<MaskPattern> {
        match self.entries.get(&label) {
            Some(PlanEntry::Fixed(p)) => Ok(p.clone()),
            Some(PlanEntry::Adaptive) => self.text_table.pattern_for(stroke.unwrap_or(1.0)),
            None => Err(Error::IncompletePlan(label)),
        }
    }
}

/// Mark pixels that survive the plan. Errors when a label present in `marks`
/// has no entry.
pub fn retained_pixels(marks: &MarkMap, plan: &MaskPlan) -> Result<BinaryMaskImage> {
    let (w, h) = marks.dims();
    let present = marks.counts();

    let mut fixed: [Option<MaskPattern>; 5] = Default::default();
    for label in MarkLabel::MARKS {
        if present[label.index()] > 0 && label != MarkLabel::Text {
            fixed[label.index()] = Some(plan.resolve(label, None)?);
        }
    }
    // Component id -> pattern, for pixels whose pattern depends on their
    // component (adaptive text).
    let mut per_component: BTreeMap<u32, MaskPattern> = BTreeMap::new();
    if present[MarkLabel::Text.index()] > 0 {
        match plan.entry(MarkLabel::Text) {
            Some(PlanEntry::Fixed(p)) => fixed[MarkLabel::Text.index()] = Some(p.clone()),
            Some(PlanEntry::Adaptive) => {
                for c in marks.components().iter().filter(|c| c.label == MarkLabel::Text) {
                    per_component.insert(c.id, plan.resolve(MarkLabel::Text, c.stroke_width)?);
                }
                // Text pixels without a component fall back to the default row.
                fixed[MarkLabel::Text.index()] = Some(plan.resolve(MarkLabel::Text, None)?);
            }
            None => return Err(Error::IncompletePlan(MarkLabel::Text)),
        }
    }

    let labels = marks.labels();
    let ids = marks.component_ids();
    let mut data = vec![false; labels.len()];
    data.par_chunks_mut(w as usize)
        .enumerate()
        .for_each(|(y, row)| {
            let base = y * w as usize;
            for (x, out) in row.iter_mut().enumerate() {
                let label = labels[base + x];
                if label == MarkLabel::Background {
                    continue;
                }
                let pattern = if label == MarkLabel::Text {
                    per_component.get(&ids[base + x])
                } else {
                    None
                }
                .or(fixed[label.index()].as_ref())
                .expect("pattern resolved for every present label");
                *out = pattern.retains(x as u32, y as u32);
            }
        });
    BinaryMaskImage::from_vec(w, h, data)
}

/// Repaints every non-retained mark pixel with `bg`. Background pixels and
/// retained pixels are copied unchanged.
pub fn apply_masking(
    img: &RasterImage,
    marks: &MarkMap,
    plan: &MaskPlan,
    bg: Rgb,
) -> Result<RasterImage> {
    img.check_same_dims(marks.width(), marks.height())?;
    let keep = retained_pixels(marks, plan)?;
    Ok(apply_retained(img, marks, &keep, bg))
}

pub(crate) fn apply_retained(
    img: &RasterImage,
    marks: &MarkMap,
    keep: &BinaryMaskImage,
    bg: Rgb,
) -> RasterImage {
    let mut out = img.clone();
    let labels = marks.labels();
    let kept = keep.data();
    let w = img.width() as usize;
    out.pixels_mut()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let i = y * w + x;
                if labels[i] != MarkLabel::Background && !kept[i] {
                    *px = bg;
                }
            }
        });
    out
}
