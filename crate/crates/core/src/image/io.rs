//! Raster file formats.
//!
//! * Binary PGM (`P5`, maxval ≤ 255) for display. Real images are quantized
//!   by an affine map of `[lo, hi]` onto `0..=255` with rounding and clamping.
//! * `PTF1` float rasters for lossless pipelines: the 4 ASCII bytes `PTF1`,
//!   then width, height and a reserved zero word as little-endian `u32`
//!   (16 header bytes), then `width·height` little-endian `f32` samples in
//!   row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::image::grid::ImageGrid;
use crate::scalar::Real;

const PTF_MAGIC: &[u8; 4] = b"PTF1";

/// Quantizes `[lo, hi]` onto `0..=255`. A degenerate range maps to 128.
pub fn quantize<T: Real>(image: &ImageGrid<T>, lo: T, hi: T) -> Vec<u8> {
    image
        .as_slice()
        .iter()
        .map(|&v| {
            if !(hi > lo) {
                return 128;
            }
            let t = ((v - lo) / (hi - lo) * T::lit(255.0)).round();
            t.max(T::zero()).min(T::lit(255.0)).to_u8().unwrap_or(0)
        })
        .collect()
}

/// Writes `image` as P5, mapping `[lo, hi]` to `[0, 255]`.
pub fn write_pgm<T: Real, W: Write>(mut out: W, image: &ImageGrid<T>, lo: T, hi: T) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", image.width(), image.height())?;
    out.write_all(&quantize(image, lo, hi))?;
    Ok(())
}

/// Writes `image` as P5 using its own min/max as the quantization range.
pub fn write_pgm_auto<T: Real, W: Write>(out: W, image: &ImageGrid<T>) -> Result<()> {
    let (lo, hi) = image.min_max();
    write_pgm(out, image, lo, hi)
}

/// Reads a P5 file; samples keep their raw 0..=maxval values.
pub fn read_pgm<T: Real, R: Read>(mut input: R) -> Result<ImageGrid<T>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::input("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::input(format!("unsupported PGM magic {:?}", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::input(format!("bad PGM header field {s:?}")));
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::input("only 8-bit PGM is supported"));
    }
    pos += 1; // single whitespace after maxval
    let need = w * h;
    if bytes.len() < pos + need {
        return Err(Error::input("truncated PGM raster"));
    }
    let data = bytes[pos..pos + need].iter().map(|&b| T::from_u8(b).expect("u8 fits")).collect();
    ImageGrid::new(w, h, data)
}

pub fn write_ptf<T: Real, W: Write>(mut out: W, image: &ImageGrid<T>) -> Result<()> {
    out.write_all(PTF_MAGIC)?;
    out.write_all(&(image.width() as u32).to_le_bytes())?;
    out.write_all(&(image.height() as u32).to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    for v in image.as_slice() {
        out.write_all(&(v.as_f64() as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_ptf<T: Real, R: Read>(mut input: R) -> Result<ImageGrid<T>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..4] != PTF_MAGIC {
        return Err(Error::input("not a PTF1 raster"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (w, h) = (word(4), word(8));
    let mut raw = vec![0u8; w * h * 4];
    input.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(4)
        .map(|b| T::lit(f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64))
        .collect();
    ImageGrid::new(w, h, data)
}

/// Reads either format, dispatching on the magic bytes.
pub fn read_image<T: Real>(bytes: &[u8]) -> Result<ImageGrid<T>> {
    if bytes.starts_with(PTF_MAGIC) {
        read_ptf(bytes)
    } else {
        read_pgm(bytes)
    }
}
