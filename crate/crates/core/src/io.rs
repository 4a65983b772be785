//! Image files (PNG, binary PNM) and the lossless ATWR raster format.
//!
//! ATWR layout, all little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `ATWR`                            |
//! | 4      | 4    | width, `u32`                            |
//! | 8      | 4    | height, `u32`                           |
//! | 12     | 4    | channels, `u32`                         |
//! | 16     | 4·n  | `f32` samples, row-major, interleaved   |

use std::fs;
use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat, ImageReader};

use crate::buffer::{ImageBuffer, ResidualMap};
use crate::error::{Error, Result};

pub const ATWR_MAGIC: &[u8; 4] = b"ATWR";
const ATWR_HEADER: usize = 16;

fn format_for(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(ImageFormat::Png),
        "ppm" | "pgm" | "pnm" => Ok(ImageFormat::Pnm),
        _ => Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: format!("extension {ext:?}; expected png, ppm or pgm"),
        }),
    }
}

fn image_error(path: &Path, err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: other.to_string(),
        },
    }
}

/// Reads an 8-bit gray or RGB image into `[-1, 1]`.
///
/// Alpha is dropped. Deeper samples are reduced to 8 bits first.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| image_error(path, e))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => ImageBuffer::from_u8(w, h, 1, decoded.to_luma8().as_raw()),
        other => ImageBuffer::from_u8(w, h, 3, other.to_rgb8().as_raw()),
    }
}

/// Quantizes to 8 bits and writes PNG or PNM, chosen by extension.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let color = match img.channels() {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        n => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                reason: format!("{n}-channel rasters cannot be stored as images"),
            })
        }
    };
    image::save_buffer_with_format(
        path,
        &img.to_u8(),
        img.width() as u32,
        img.height() as u32,
        color,
        format,
    )
    .map_err(|e| image_error(path, e))
}

/// Offset-encodes a residual (`(r + 2) / 4`) so it fits an 8-bit image.
/// Lossy; use ATWR when the values matter.
pub fn save_residual_image(residual: &ResidualMap, path: impl AsRef<Path>) -> Result<()> {
    let shifted: Vec<f32> = residual
        .data()
        .iter()
        .map(|&r| ((r + 2.0) / 4.0) * 2.0 - 1.0)
        .collect();
    let img = ImageBuffer::new(residual.width(), residual.height(), residual.channels(), shifted)?;
    save_image(&img, path)
}

/// Inverse of [`save_residual_image`].
pub fn load_residual_image(path: impl AsRef<Path>) -> Result<ResidualMap> {
    let img = load_image(path)?;
    let data = img.data().iter().map(|&v| (v + 1.0) * 0.5 * 4.0 - 2.0).collect();
    ImageBuffer::new(img.width(), img.height(), img.channels(), data)
}

pub fn encode_atwr(img: &ImageBuffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(ATWR_HEADER + img.data().len() * 4);
    out.extend_from_slice(ATWR_MAGIC);
    for dim in [img.width(), img.height(), img.channels()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_atwr(bytes: &[u8], path: &Path) -> Result<ImageBuffer> {
    if bytes.len() < 4 || &bytes[..4] != ATWR_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_owned(),
            expected: "ATWR",
        });
    }
    if bytes.len() < ATWR_HEADER {
        return Err(Error::TruncatedFile {
            path: path.to_owned(),
            expected: ATWR_HEADER,
            found: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h, c) = (word(4), word(8), word(12));
    let expected = ATWR_HEADER + w * h * c * 4;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            path: path.to_owned(),
            expected,
            found: bytes.len(),
        });
    }
    let data = bytes[ATWR_HEADER..expected]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    ImageBuffer::new(w, h, c, data)
}

pub fn save_atwr(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_atwr(img)).map_err(|e| Error::io(path, e))
}

pub fn load_atwr(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_atwr(&bytes, path)
}
