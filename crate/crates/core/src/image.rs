//! Core raster types: 8-bit grayscale images and {0,1} foreground masks.
//!
//! Both types are immutable-by-convention after construction: every operation
//! in this crate takes `&self` and returns a fresh image, so values can be
//! shared freely across threads.

use crate::error::{Error, Result};

/// Rectangular grid of 8-bit intensities, row-major.
///
/// `pixel_pitch` is the optional physical side length of one pixel in mm;
/// operations that convert to physical units require it.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    pixel_pitch: Option<f64>,
}

impl GrayImage {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "image dimensions must be at least 1x1".into(),
            ));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            pixel_pitch: None,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::from_pixels(width, height, vec![value; width * height])
    }

    /// Sets the physical pixel pitch in mm. Must be positive.
    pub fn with_pixel_pitch(mut self, pitch_mm: f64) -> Result<Self> {
        if !(pitch_mm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pixel pitch must be positive, got {pitch_mm}"
            )));
        }
        self.pixel_pitch = Some(pitch_mm);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_pitch(&self) -> Option<f64> {
        self.pixel_pitch
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = value;
    }

    /// Mean gray value.
    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&v| v as f64).sum::<f64>() / self.pixels.len() as f64
    }

    /// Population variance of gray values.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.pixels
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / self.pixels.len() as f64
    }

    /// Sub-rectangle copy. The rectangle must lie inside the image.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            pixels.extend_from_slice(&self.pixels[y * self.width + x0..y * self.width + x0 + w]);
        }
        Ok(Self {
            width: w,
            height: h,
            pixels,
            pixel_pitch: self.pixel_pitch,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut pixels = vec![0u8; self.pixels.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                pixels[x * self.height + y] = self.get(x, y);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            pixels,
            pixel_pitch: self.pixel_pitch,
        }
    }
}

/// Rectangular {0,1} mask, row-major. Convention: 1 = foreground (fiber)
/// unless an operation documents otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
    pixel_pitch: Option<f64>,
}

impl BinaryImage {
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "image dimensions must be at least 1x1".into(),
            ));
        }
        if bits.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "bit buffer length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("mask values must be 0 or 1".into()));
        }
        Ok(Self {
            width,
            height,
            bits,
            pixel_pitch: None,
        })
    }

    pub fn filled(width: usize, height: usize, bit: u8) -> Result<Self> {
        Self::from_bits(width, height, vec![bit; width * height])
    }

    pub fn with_pixel_pitch(mut self, pitch_mm: f64) -> Result<Self> {
        if !(pitch_mm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pixel pitch must be positive, got {pitch_mm}"
            )));
        }
        self.pixel_pitch = Some(pitch_mm);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_pitch(&self) -> Option<f64> {
        self.pixel_pitch
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> u8 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, bit: u8) {
        debug_assert!(x < self.width && y < self.height);
        debug_assert!(bit <= 1);
        self.bits[y * self.width + x] = bit;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
            pixel_pitch: self.pixel_pitch,
        }
    }

    /// Number of 8-connected foreground components.
    pub fn count_components_8(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if self.bits[start] == 0 || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let x = (idx % self.width) as isize;
                let y = (idx / self.width) as isize;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0
                            || ny < 0
                            || nx as usize >= self.width
                            || ny as usize >= self.height
                        {
                            continue;
                        }
                        let nidx = ny as usize * self.width + nx as usize;
                        if self.bits[nidx] == 1 && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push(nidx);
                        }
                    }
                }
            }
        }
        count
    }

    /// Renders the mask to gray: foreground 255, background 0. Pitch metadata
    /// is carried over.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .bits
                .iter()
                .map(|&b| if b == 1 { 255 } else { 0 })
                .collect(),
            pixel_pitch: self.pixel_pitch,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(GrayImage::from_pixels(0, 4, vec![]).is_err());
        assert!(BinaryImage::from_bits(4, 0, vec![]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(GrayImage::from_pixels(2, 2, vec![0, 1, 2]).is_err());
    }

    #[test]
    fn rejects_non_binary_bits() {
        assert!(BinaryImage::from_bits(2, 1, vec![0, 2]).is_err());
    }

    #[test]
    fn rejects_nonpositive_pitch() {
        let img = GrayImage::filled(2, 2, 0).unwrap();
        assert!(img.clone().with_pixel_pitch(0.0).is_err());
        assert!(img.with_pixel_pitch(-1.0).is_err());
    }

    #[test]
    fn crop_is_subrectangle() {
        let img = GrayImage::from_pixels(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let c = img.crop(1, 0, 2, 2).unwrap();
        assert_eq!(c.pixels(), &[2, 3, 5, 6]);
    }

    #[test]
    fn component_count_basic() {
        // two diagonal pixels touch under 8-connectivity
        let img = BinaryImage::from_bits(3, 3, vec![1, 0, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(img.count_components_8(), 1);
        let img = BinaryImage::from_bits(3, 3, vec![1, 0, 1, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(img.count_components_8(), 2);
    }
}
