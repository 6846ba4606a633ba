//! Binary (P5) PGM images with 8- or 16-bit samples.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Format(format!("invalid PGM {what} `{tok}`")))
}

/// Parses a P5 image; samples keep their raw integer values.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    if next_token(bytes, &mut pos)? != "P5" {
        return Err(Error::Format("only binary P5 PGM is supported".into()));
    }
    let cols = header_number(bytes, &mut pos, "width")?;
    let rows = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let width = if maxval < 256 { 1 } else { 2 };
    let need = rows * cols * width;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Format(format!("expected {need} raster bytes")))?;
    let pixels = if width == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    Image::new(rows, cols, pixels)
}

pub fn read_pgm(path: &Path) -> Result<Image> {
    decode_pgm(&fs::read(path)?)
}

/// Encodes with rounding and clamping to `[0, maxval]`; `maxval > 255` selects 16-bit samples.
pub fn encode_pgm(image: &Image, maxval: u16) -> Result<Vec<u8>> {
    if maxval == 0 {
        return Err(Error::Format("maxval must be positive".into()));
    }
    let mut out = format!("P5\n{} {}\n{}\n", image.cols, image.rows, maxval).into_bytes();
    let m = maxval as f64;
    for &v in &image.pixels {
        let s = if v.is_finite() { v.round().clamp(0.0, m) } else { 0.0 };
        if maxval < 256 {
            out.push(s as u8);
        } else {
            out.extend_from_slice(&(s as u16).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn write_pgm(path: &Path, image: &Image, maxval: u16) -> Result<()> {
    fs::write(path, encode_pgm(image, maxval)?)?;
    Ok(())
}

/// Writes the image linearly stretched to the full 8-bit range.
pub fn write_pgm_normalized(path: &Path, image: &Image) -> Result<()> {
    let (lo, hi) = image.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels = image.pixels.iter().map(|v| (v - lo) / span * 255.0).collect();
    write_pgm(path, &Image::new(image.rows, image.cols, pixels)?, 255)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_8_and_16_bit() {
        let img = Image::new(2, 3, vec![0.0, 1.0, 7.0, 255.0, 128.0, 3.0]).unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img, 255).unwrap()).unwrap(), img);
        let wide = Image::new(1, 2, vec![1000.0, 65535.0]).unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&wide, 65535).unwrap()).unwrap(), wide);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 10]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![9.0, 10.0]);
    }

    #[test]
    fn malformed_input_is_a_format_error() {
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n0"), Err(Error::Format(_))));
        assert!(matches!(decode_pgm(b"P5\n4 4\n255\n\x01"), Err(Error::Format(_))));
    }
}
