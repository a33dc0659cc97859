use thiserror::Error;

use crate::segment::MarkLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PNG at byte offset {offset}: {message}")]
    Decode { offset: u64, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("PNG encoding failed: {0}")]
    Encode(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image dimensions differ: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },

    #[error("histogram has fewer than two distinct gray levels")]
    DegenerateHistogram,

    #[error("stroke width is undefined for an empty skeleton")]
    UndefinedStrokeWidth,

    #[error("mask size must be a positive odd integer, got {0}")]
    InvalidMaskSize(i64),

    #[error("stroke width must be at least 1 pixel, got {0}")]
    InvalidStrokeWidth(f64),

    #[error("contrast must lie in [0, 100], got {0}")]
    InvalidContrast(f64),

    #[error("mask plan has no entry for label `{0}`")]
    IncompletePlan(MarkLabel),

    #[error("image contains no marks distinguishable from the background")]
    NoMarks,

    #[error("unknown chart type `{name}`; valid types are {}", valid.join(", "))]
    UnknownChartType {
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("invalid preset: {0}")]
    InvalidPreset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid viewing geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid text annotation: {0}")]
    InvalidAnnotation(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Decode { .. } => "decode",
            Error::UnsupportedFormat(_) => "unsupported_format",
            Error::Encode(_) => "encode",
            Error::InvalidImage(_) => "invalid_image",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DegenerateHistogram => "degenerate_histogram",
            Error::UndefinedStrokeWidth => "undefined_stroke_width",
            Error::InvalidMaskSize(_) => "invalid_mask_size",
            Error::InvalidStrokeWidth(_) => "invalid_stroke_width",
            Error::InvalidContrast(_) => "invalid_contrast",
            Error::IncompletePlan(_) => "incomplete_plan",
            Error::NoMarks => "no_marks",
            Error::UnknownChartType { .. } => "unknown_chart_type",
            Error::InvalidPreset(_) => "invalid_preset",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::InvalidAnnotation(_) => "invalid_annotation",
            Error::Range(_) => "range",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
