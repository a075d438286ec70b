//! Binary PGM (P5) reading and writing, maxval 255.
//!
//! The writer emits the canonical header `P5\n{w} {h}\n255\n`; the reader
//! accepts any standards-conforming whitespace and `#` comments, so
//! save(load(x)) reproduces canonical comment-free inputs byte for byte.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Decodes a binary P5 portable graymap.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;

    let magic = take_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::ParseError(format!(
            "expected magic P5, got {:?}",
            String::from_utf8_lossy(&magic)
        )));
    }

    let width = parse_number(&take_token(bytes, &mut pos)?)?;
    let height = parse_number(&take_token(bytes, &mut pos)?)?;
    let maxval = parse_number(&take_token(bytes, &mut pos)?)?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "only maxval 255 is supported, got {maxval}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::ParseError("zero image dimension".into()));
    }

    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::ParseError("missing raster separator".into()));
    }
    pos += 1;

    let expected = width * height;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::ParseError(format!(
            "raster truncated: expected {expected} bytes, found {}",
            raster.len()
        )));
    }
    GrayImage::from_pixels(width, height, raster[..expected].to_vec())
}

/// Encodes an image as canonical binary P5.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Returns the next header token, skipping whitespace and `#` comments.
fn take_token(bytes: &[u8], pos: &mut usize) -> Result<Vec<u8>> {
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
        return Err(Error::ParseError("unexpected end of header".into()));
    }
    Ok(bytes[start..*pos].to_vec())
}

fn parse_number(token: &[u8]) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::ParseError(format!(
                "invalid header number {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}
