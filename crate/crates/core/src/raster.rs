//! Pixel containers, PNG I/O and sRGB <-> CIELAB conversion.
//!
//! All color math uses the sRGB transfer curve and the D65 reference white.
//! Alpha is never carried past decoding: translucent pixels are composited over
//! opaque white.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An opaque 8-bit sRGB color.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Rgb { r: v, g: v, b: v }
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub fn to_lab(self) -> Lab {
        srgb_to_lab(self)
    }

    /// Largest per-channel absolute difference.
    pub fn max_channel_diff(self, other: Rgb) -> u8 {
        self.r
            .abs_diff(other.r)
            .max(self.g.abs_diff(other.g))
            .max(self.b.abs_diff(other.b))
    }
}

/// A CIELAB color relative to D65.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Lab { l, a, b }
    }

    pub fn chroma(self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Hue angle in degrees, `atan2(b, a)`.
    pub fn hue_degrees(self) -> f64 {
        self.b.atan2(self.a).to_degrees()
    }
}

/// Row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Result<Self> {
        check_dims(width, height)?;
        Ok(RasterImage {
            width,
            height,
            pixels: vec![fill; width as usize * height as usize],
        })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
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

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = self.index(x, y);
        self.pixels[i] = c;
    }

    /// Interleaved RGB bytes.
    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.channels()).collect()
    }

    pub(crate) fn check_same_dims(&self, width: u32, height: u32) -> Result<()> {
        if self.dims() != (width, height) {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: (width, height),
            });
        }
        Ok(())
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Row-major CIELAB image.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: u32,
    height: u32,
    pixels: Vec<Lab>,
}

impl LabImage {
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Lab>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(LabImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Lab] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Lab] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Lab {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

// ---------------------------------------------------------------------------
// Color conversion

const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

fn linear_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 256];
        for (i, v) in t.iter_mut().enumerate() {
            *v = srgb_decode(i as f64 / 255.0);
        }
        t
    })
}

/// sRGB transfer curve, encoded [0,1] -> linear [0,1].
pub fn srgb_decode(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Inverse sRGB transfer curve, linear -> encoded. Negative input maps to
/// negative output so callers can detect out-of-gamut values.
pub fn srgb_encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let f3 = f * f * f;
    if f3 > EPSILON {
        f3
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Relative luminance Y in [0,1] for a CIE lightness L*.
pub fn lightness_to_luminance(l: f64) -> f64 {
    if l > KAPPA * EPSILON {
        let f = (l + 16.0) / 116.0;
        f * f * f
    } else {
        l / KAPPA
    }
}

/// CIE lightness L* for a relative luminance Y in [0,1].
pub fn luminance_to_lightness(y: f64) -> f64 {
    116.0 * lab_f(y) - 16.0
}

/// CIE L* alone; equal to `srgb_to_lab(c).l`.
pub fn srgb_lightness(c: Rgb) -> f64 {
    let t = linear_table();
    let y = mat_mul(&RGB_TO_XYZ, [t[c.r as usize], t[c.g as usize], t[c.b as usize]])[1];
    (116.0 * lab_f(y / WHITE_Y) - 16.0).clamp(0.0, 100.0)
}

pub fn srgb_to_lab(c: Rgb) -> Lab {
    let t = linear_table();
    let lin = [t[c.r as usize], t[c.g as usize], t[c.b as usize]];
    let xyz = mat_mul(&RGB_TO_XYZ, lin);
    let fx = lab_f(xyz[0] / WHITE_X);
    let fy = lab_f(xyz[1] / WHITE_Y);
    let fz = lab_f(xyz[2] / WHITE_Z);
    Lab {
        l: (116.0 * fy - 16.0).clamp(0.0, 100.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// Unclamped linear-light RGB for a Lab color. Components outside [0,1] mean
/// the color is outside the sRGB gamut.
pub fn lab_to_linear_rgb(c: Lab) -> [f64; 3] {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let xyz = [
        WHITE_X * lab_f_inv(fx),
        WHITE_Y * lightness_to_luminance(c.l),
        WHITE_Z * lab_f_inv(fz),
    ];
    mat_mul(&XYZ_TO_RGB, xyz)
}

/// Converts a Lab color to 8-bit sRGB, clamping each channel independently.
/// The flag is true when any channel had to be clamped.
pub fn lab_to_srgb(c: Lab) -> (Rgb, bool) {
    let lin = lab_to_linear_rgb(c);
    let mut clamped = false;
    let mut out = [0u8; 3];
    for (o, v) in out.iter_mut().zip(lin) {
        let scaled = srgb_encode(v) * 255.0;
        if !(-0.5..=255.5).contains(&scaled) || scaled.is_nan() {
            clamped = true;
        }
        *o = scaled.round().clamp(0.0, 255.0) as u8;
    }
    (Rgb::new(out[0], out[1], out[2]), clamped)
}

fn mat_mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Applies `f` to every pixel, row-parallel, reusing the previous result
/// within a row while the color repeats (charts are mostly flat runs).
pub(crate) fn map_pixels<T: Copy + Send>(img: &RasterImage, f: impl Fn(Rgb) -> T + Sync) -> Vec<T> {
    let rows: Vec<Vec<T>> = img
        .pixels
        .par_chunks(img.width as usize)
        .map(|row| {
            let mut last: Option<(Rgb, T)> = None;
            row.iter()
                .map(|&p| match last {
                    Some((q, v)) if q == p => v,
                    _ => {
                        let v = f(p);
                        last = Some((p, v));
                        v
                    }
                })
                .collect()
        })
        .collect();
    rows.concat()
}

pub fn rgb_to_lab(img: &RasterImage) -> LabImage {
    let pixels = map_pixels(img, srgb_to_lab);
    LabImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Result of converting a Lab image back to sRGB.
#[derive(Clone, Debug)]
pub struct LabConversion {
    pub image: RasterImage,
    /// Number of pixels where at least one channel fell outside [0, 255].
    pub clamped_pixels: usize,
}

pub fn lab_to_rgb(img: &LabImage) -> LabConversion {
    let converted: Vec<(Rgb, bool)> = img.pixels.par_iter().map(|&p| lab_to_srgb(p)).collect();
    let clamped_pixels = converted.iter().filter(|(_, c)| *c).count();
    LabConversion {
        image: RasterImage {
            width: img.width,
            height: img.height,
            pixels: converted.into_iter().map(|(p, _)| p).collect(),
        },
        clamped_pixels,
    }
}

/// Modal color of the outermost ring of pixels. Ties go to the lexically
/// larger color, which favours lighter backgrounds.
pub fn estimate_background(img: &RasterImage) -> Rgb {
    let (w, h) = img.dims();
    let mut counts: HashMap<Rgb, usize> = HashMap::new();
    let mut bump = |c: Rgb| *counts.entry(c).or_default() += 1;
    for x in 0..w {
        bump(img.get(x, 0));
        if h > 1 {
            bump(img.get(x, h - 1));
        }
    }
    for y in 1..h.saturating_sub(1) {
        bump(img.get(0, y));
        if w > 1 {
            bump(img.get(w - 1, y));
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(c, _)| c)
        .unwrap_or(Rgb::WHITE)
}

// ---------------------------------------------------------------------------
// PNG

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

struct ChunkLayout {
    first_idat: u64,
}

/// Walks the chunk structure so structural damage can be reported with the
/// byte offset where it was found.
fn check_chunks(bytes: &[u8]) -> Result<ChunkLayout> {
    let malformed = |offset: usize, message: String| Error::Decode {
        offset: offset as u64,
        message,
    };
    if bytes.len() < PNG_SIGNATURE.len() || bytes[..8] != PNG_SIGNATURE {
        return Err(malformed(0, "missing PNG signature".into()));
    }
    let mut offset = 8usize;
    let mut first_idat = None;
    loop {
        if offset + 12 > bytes.len() {
            return Err(malformed(offset, "truncated chunk header".into()));
        }
        let len = u32::from_be_bytes(bytes[offset..offset + 4].try_into().unwrap()) as usize;
        let kind = &bytes[offset + 4..offset + 8];
        let name = String::from_utf8_lossy(kind).into_owned();
        if !kind.iter().all(u8::is_ascii_alphabetic) {
            return Err(malformed(offset + 4, format!("invalid chunk type {kind:?}")));
        }
        if len > i32::MAX as usize || offset + 12 + len > bytes.len() {
            return Err(malformed(
                offset,
                format!("chunk {name} claims {len} bytes past the end of the data"),
            ));
        }
        if offset == 8 && kind != b"IHDR" {
            return Err(malformed(offset, format!("first chunk is {name}, expected IHDR")));
        }
        let data_end = offset + 8 + len;
        let stored = u32::from_be_bytes(bytes[data_end..data_end + 4].try_into().unwrap());
        if crc32fast::hash(&bytes[offset + 4..data_end]) != stored {
            return Err(malformed(data_end, format!("CRC mismatch in chunk {name}")));
        }
        if kind == b"IDAT" && first_idat.is_none() {
            first_idat = Some(offset as u64);
        }
        offset = data_end + 4;
        if kind == b"IEND" {
            break;
        }
    }
    let first_idat =
        first_idat.ok_or_else(|| malformed(offset, "no IDAT chunk before IEND".into()))?;
    Ok(ChunkLayout { first_idat })
}

#[inline]
fn over_white(c: u8, alpha: u8) -> u8 {
    let (c, a) = (c as u32, alpha as u32);
    ((c * a + 255 * (255 - a) + 127) / 255) as u8
}

/// Decodes an 8-bit grayscale, gray+alpha, RGB, RGBA or palette PNG.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let layout = check_chunks(bytes)?;
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let decode_err = |e: png::DecodingError| Error::Decode {
        offset: layout.first_idat,
        message: e.to_string(),
    };
    let mut reader = decoder.read_info().map_err(|e| Error::Decode {
        offset: 8,
        message: e.to_string(),
    })?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "bit depth {:?}; only 8-bit channels are supported",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width, info.height);
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        offset: 8,
        message: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(decode_err)?;
    let data = &buf[..frame.buffer_size()];
    let pixels: Vec<Rgb> = match frame.color_type {
        png::ColorType::Grayscale => data.iter().map(|&g| Rgb::gray(g)).collect(),
        png::ColorType::GrayscaleAlpha => data
            .chunks_exact(2)
            .map(|p| Rgb::gray(over_white(p[0], p[1])))
            .collect(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|p| Rgb::new(p[0], p[1], p[2]))
            .collect(),
        png::ColorType::Rgba => data
            .chunks_exact(4)
            .map(|p| {
                Rgb::new(
                    over_white(p[0], p[3]),
                    over_white(p[1], p[3]),
                    over_white(p[2], p[3]),
                )
            })
            .collect(),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat(
                "palette image was not expanded".into(),
            ))
        }
    };
    RasterImage::from_pixels(width, height, pixels)
}

/// Encodes as 8-bit RGB with fixed compression and filter settings, so equal
/// images always produce equal bytes.
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width, img.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        encoder.set_filter(png::Filter::Adaptive);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(&img.to_rgb_bytes())
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Encodes a single-channel 8-bit image, used for spectra and debug dumps.
pub fn encode_gray_png(width: u32, height: u32, data: &[u8]) -> Result<Vec<u8>> {
    check_dims(width, height)?;
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        encoder.set_filter(png::Filter::Adaptive);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}
