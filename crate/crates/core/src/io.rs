//! PNG ingest and egress.
//!
//! Only 8-bit RGB images are accepted. Bytes map to intensities as `v / 255`
//! and back as `round(v * 255)` clamped to `[0, 255]`. Every writer goes
//! through [`write_atomic`], so a failed run never leaves a partial file.

use std::io::Write;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Result, TvrError};
use crate::scalar::Scalar;
use crate::tensor::{ImageTensor, Mask, CHANNELS};

pub fn to_byte<T: Scalar>(v: T) -> u8 {
    (v.to_f64_lossy() * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn from_byte<T: Scalar>(v: u8) -> T {
    T::from_u8(v).unwrap() / T::lit(255.0)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| TvrError::Io(e.error))?;
    Ok(())
}

fn load_rgb8(path: &Path) -> Result<image::RgbImage> {
    let decoded = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
    match decoded {
        DynamicImage::ImageRgb8(rgb) => Ok(rgb),
        other => {
            let reason = if other.color().has_alpha() {
                "alpha channels are not supported; expected 8-bit RGB".to_string()
            } else {
                format!("expected 8-bit RGB, found {:?}", other.color())
            };
            Err(TvrError::Format {
                path: path.to_path_buf(),
                reason,
            })
        }
    }
}

fn square_side(path: &Path, width: u32, height: u32) -> Result<usize> {
    if width != height {
        return Err(TvrError::Format {
            path: path.to_path_buf(),
            reason: format!("image must be square, got {width}x{height}"),
        });
    }
    Ok(width as usize)
}

pub fn read_png<T: Scalar>(path: &Path) -> Result<ImageTensor<T>> {
    let rgb = load_rgb8(path)?;
    let n = square_side(path, rgb.width(), rgb.height())?;
    let raw = rgb.as_raw();
    ImageTensor::from_fn(n, |c, r, col| from_byte(raw[(r * n + col) * CHANNELS + c]))
}

fn encode_png(side: usize, interleaved: &[u8], color: ExtendedColorType) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf).write_image(interleaved, side as u32, side as u32, color)?;
    Ok(buf)
}

pub fn encode_image_png<T: Scalar>(img: &ImageTensor<T>) -> Result<Vec<u8>> {
    let n = img.side();
    let mut raw = vec![0u8; CHANNELS * n * n];
    for c in 0..CHANNELS {
        for (p, v) in img.channel(c).iter().enumerate() {
            raw[p * CHANNELS + c] = to_byte(*v);
        }
    }
    encode_png(n, &raw, ExtendedColorType::Rgb8)
}

pub fn write_png<T: Scalar>(img: &ImageTensor<T>, path: &Path) -> Result<()> {
    write_atomic(path, &encode_image_png(img)?)
}

/// Mask as an 8-bit RGB image, 255 where set.
pub fn encode_mask_png(mask: &Mask) -> Result<Vec<u8>> {
    let n = mask.side();
    let mut raw = vec![0u8; CHANNELS * n * n];
    let plane = n * n;
    for (i, on) in mask.bits().iter().enumerate() {
        if *on {
            raw[(i % plane) * CHANNELS + i / plane] = 255;
        }
    }
    encode_png(n, &raw, ExtendedColorType::Rgb8)
}

pub fn write_mask_png(mask: &Mask, path: &Path) -> Result<()> {
    write_atomic(path, &encode_mask_png(mask)?)
}

/// Single-channel binary image (0 or 255) of side `side`, row-major.
pub fn encode_binary_png(side: usize, bits: &[bool]) -> Result<Vec<u8>> {
    let raw: Vec<u8> = bits.iter().map(|on| if *on { 255 } else { 0 }).collect();
    encode_png(side, &raw, ExtendedColorType::L8)
}

/// Reads a binary image written by [`encode_binary_png`] or
/// [`encode_mask_png`] and returns its first channel as booleans.
pub fn read_binary_png(path: &Path) -> Result<(usize, Vec<bool>)> {
    let decoded = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
    let luma = match decoded {
        DynamicImage::ImageLuma8(l) => l,
        DynamicImage::ImageRgb8(rgb) => {
            image::ImageBuffer::from_fn(rgb.width(), rgb.height(), |x, y| image::Luma([rgb.get_pixel(x, y)[0]]))
        }
        other => {
            return Err(TvrError::Format {
                path: path.to_path_buf(),
                reason: format!("expected an 8-bit binary mask, found {:?}", other.color()),
            })
        }
    };
    let n = square_side(path, luma.width(), luma.height())?;
    let mut bits = Vec::with_capacity(n * n);
    for (index, v) in luma.as_raw().iter().enumerate() {
        match v {
            0 => bits.push(false),
            255 => bits.push(true),
            _ => {
                return Err(TvrError::NonBinary {
                    index,
                    value: *v as f64,
                })
            }
        }
    }
    Ok((n, bits))
}
