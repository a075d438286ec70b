//! Sobel gradient-magnitude edge detection.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// 3x3 Sobel gradient magnitude, linearly rescaled to [0, 255].
/// Border pixels are zero.
pub fn edge_magnitude(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidParameter(format!(
            "edge detection needs at least 3x3, got {w}x{h}"
        )));
    }

    let mut mags = vec![0f64; w * h];
    let mut max_mag = 0f64;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| {
                img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as f64
            };
            let gx = -p(-1, -1) + p(1, -1) - 2.0 * p(-1, 0) + 2.0 * p(1, 0) - p(-1, 1) + p(1, 1);
            let gy = -p(-1, -1) - 2.0 * p(0, -1) - p(1, -1) + p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
            let m = (gx * gx + gy * gy).sqrt();
            mags[y * w + x] = m;
            max_mag = max_mag.max(m);
        }
    }

    let mut out = GrayImage::filled(w, h, 0).expect("validated dimensions");
    if let Some(p) = img.pixel_pitch() {
        out = out.with_pixel_pitch(p).expect("pitch already validated");
    }
    if max_mag > 0.0 {
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, (255.0 * mags[y * w + x] / max_mag).round() as u8);
            }
        }
    }
    Ok(out)
}
