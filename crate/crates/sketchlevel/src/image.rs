//! Decoding player drawings from PNG and binary PGM.

use std::fmt;
use std::io::Cursor;
use std::str::FromStr;

use image::{DynamicImage, ImageEncoder};
use sketchlevel_core::SketchImage;
use thiserror::Error;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Accepted input encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// PNG, any color type; color is reduced to luminance.
    Png,
    /// Binary portable graymap (`P5`), maxval up to 255.
    Pgm,
}

impl FromStr for ImageFormat {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ImageFormat::Png),
            "pgm" => Ok(ImageFormat::Pgm),
            other => Err(ImageError::Format(format!("unsupported image format {other:?}"))),
        }
    }
}

impl fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        })
    }
}

/// Image loading failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    /// Bytes are malformed or truncated.
    #[error("decode error at byte {offset}: {message}")]
    Decode {
        /// Byte offset where decoding failed.
        offset: usize,
        /// What was wrong.
        message: String,
    },
    /// Not a format this tool reads.
    #[error("{0}")]
    Format(String),
}

fn decode_err(offset: usize, message: impl Into<String>) -> ImageError {
    ImageError::Decode {
        offset,
        message: message.into(),
    }
}

/// Guesses the format from magic bytes.
pub fn detect_format(bytes: &[u8]) -> Option<ImageFormat> {
    if bytes.starts_with(PNG_SIGNATURE) {
        Some(ImageFormat::Png)
    } else if bytes.starts_with(b"P5") {
        Some(ImageFormat::Pgm)
    } else {
        None
    }
}

/// Decodes `bytes` as `format` into a grayscale sketch.
pub fn load_image(bytes: &[u8], format: ImageFormat) -> Result<SketchImage, ImageError> {
    match format {
        ImageFormat::Png => decode_png(bytes),
        ImageFormat::Pgm => decode_pgm(bytes),
    }
}

/// Detects the format, then decodes.
pub fn load_any(bytes: &[u8]) -> Result<SketchImage, ImageError> {
    let format = detect_format(bytes).ok_or_else(|| {
        ImageError::Format("unrecognized image data: expected a PNG or binary PGM (P5) file".into())
    })?;
    load_image(bytes, format)
}

/// Luminance `0.299 R + 0.587 G + 0.114 B`, rounded half up.
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Composites a gray value with alpha over white paper.
fn over_white(gray: u8, alpha: u8) -> u8 {
    let (g, a) = (u32::from(gray), u32::from(alpha));
    ((g * a + 255 * (255 - a) + 127) / 255) as u8
}

/// Walks the PNG chunk structure so malformed files report a byte offset.
/// Returns the offset of the first IDAT chunk.
fn check_png_chunks(bytes: &[u8]) -> Result<usize, ImageError> {
    if !bytes.starts_with(PNG_SIGNATURE) {
        let at = bytes
            .iter()
            .zip(PNG_SIGNATURE)
            .position(|(a, b)| a != b)
            .unwrap_or(bytes.len());
        return Err(decode_err(at, "missing PNG signature"));
    }
    let mut pos = PNG_SIGNATURE.len();
    let mut first_idat = None;
    loop {
        if pos + 8 > bytes.len() {
            return Err(decode_err(pos, "truncated chunk header"));
        }
        let len = u32::from_be_bytes(bytes[pos..pos + 4].try_into().expect("4 bytes")) as usize;
        let kind = &bytes[pos + 4..pos + 8];
        let end = pos
            .checked_add(12)
            .and_then(|p| p.checked_add(len))
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| decode_err(pos, format!("truncated {} chunk", String::from_utf8_lossy(kind))))?;
        let stored = u32::from_be_bytes(bytes[end - 4..end].try_into().expect("4 bytes"));
        if crc32fast::hash(&bytes[pos + 4..end - 4]) != stored {
            return Err(decode_err(
                pos,
                format!("CRC mismatch in {} chunk", String::from_utf8_lossy(kind)),
            ));
        }
        if pos == PNG_SIGNATURE.len() && kind != b"IHDR" {
            return Err(decode_err(pos, "first chunk is not IHDR"));
        }
        if kind == b"IDAT" && first_idat.is_none() {
            first_idat = Some(pos);
        }
        if kind == b"IEND" {
            return first_idat.ok_or_else(|| decode_err(pos, "no IDAT chunk before IEND"));
        }
        pos = end;
    }
}

fn decode_png(bytes: &[u8]) -> Result<SketchImage, ImageError> {
    let idat = check_png_chunks(bytes)?;
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| decode_err(idat, format!("invalid PNG image data: {e}")))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<u8> = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| over_white(p[0], p[1])).collect(),
        other => other
            .to_rgba8()
            .pixels()
            .map(|p| over_white(luminance(p[0], p[1], p[2]), p[3]))
            .collect(),
    };
    SketchImage::new(width, height, pixels).map_err(|e| decode_err(idat, e.to_string()))
}

struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmHeader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Reads a whitespace-prefixed decimal; returns it and its offset.
    fn number(&mut self, what: &str) -> Result<(usize, usize), ImageError> {
        let before = self.pos;
        self.skip_space_and_comments();
        if self.pos == before {
            return Err(decode_err(self.pos, format!("expected whitespace before {what}")));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(decode_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map(|n| (n, start))
            .map_err(|_| decode_err(start, format!("{what} is too large")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<SketchImage, ImageError> {
    if !bytes.starts_with(b"P5") {
        return Err(decode_err(0, "missing P5 magic"));
    }
    let mut header = PgmHeader { bytes, pos: 2 };
    let (width, _) = header.number("width")?;
    let (height, _) = header.number("height")?;
    let (maxval, maxval_at) = header.number("maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(decode_err(maxval_at, format!("maxval {maxval} outside 1..=255")));
    }
    if width == 0 || height == 0 {
        return Err(decode_err(maxval_at, "image has zero width or height"));
    }
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(decode_err(header.pos, "expected one whitespace byte after maxval")),
    }
    let start = header.pos;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| decode_err(start, "image dimensions overflow"))?;
    let raster = bytes
        .get(start..)
        .filter(|r| r.len() >= count)
        .ok_or_else(|| decode_err(bytes.len(), format!("raster truncated, expected {count} bytes")))?;
    if raster.len() > count {
        return Err(decode_err(start + count, "trailing bytes after raster"));
    }
    let pixels = raster
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if usize::from(v) > maxval {
                Err(decode_err(start + i, format!("sample {v} exceeds maxval {maxval}")))
            } else if maxval == 255 {
                Ok(v)
            } else {
                Ok(((u32::from(v) * 255 + maxval as u32 / 2) / maxval as u32) as u8)
            }
        })
        .collect::<Result<Vec<u8>, _>>()?;
    SketchImage::new(width, height, pixels).map_err(|e| decode_err(start, e.to_string()))
}

/// Encodes a sketch as binary PGM with maxval 255.
pub fn encode_pgm(img: &SketchImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Encodes a sketch as an 8-bit grayscale PNG.
pub fn encode_png(img: &SketchImage) -> Vec<u8> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(Cursor::new(&mut out))
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
        )
        .expect("encoding into memory cannot fail");
    out
}

/// Encodes 8-bit RGBA pixels as PNG.
pub fn encode_rgba_png(width: u32, height: u32, rgba: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(Cursor::new(&mut out))
        .write_image(rgba, width, height, image::ExtendedColorType::Rgba8)
        .expect("encoding into memory cannot fail");
    out
}
