//! Gray-level histograms and histogram equalization.

use crate::image::GrayImage;

/// Occupancy counts for the 256 gray levels of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn count(&self, level: u8) -> u64 {
        self.counts[level as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cumulative count up to and including `level`.
    pub fn cdf(&self, level: u8) -> u64 {
        self.counts[..=level as usize].iter().sum()
    }

    /// Number of occupied gray levels.
    pub fn occupied_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Tallies the gray-level occupancy of an image.
pub fn histogram(img: &GrayImage) -> Histogram256 {
    let mut counts = [0u64; 256];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    Histogram256::from_counts(counts)
}

/// Standard CDF-remap histogram equalization.
///
/// Each level v maps to round(255 * (cdf(v) - cdf_min) / (total - cdf_min)).
/// Images occupying a single gray level are returned unchanged.
pub fn equalize_histogram(img: &GrayImage) -> GrayImage {
    let hist = histogram(img);
    if hist.occupied_levels() <= 1 {
        return img.clone();
    }

    let total = hist.total();
    let mut cdf = [0u64; 256];
    let mut acc = 0u64;
    for (level, &c) in hist.counts().iter().enumerate() {
        acc += c;
        cdf[level] = acc;
    }
    let cdf_min = *cdf
        .iter()
        .find(|&&c| c > 0)
        .expect("non-empty image has a nonzero cdf entry");

    let denom = (total - cdf_min) as f64;
    let mut lut = [0u8; 256];
    for level in 0..256 {
        let num = cdf[level].saturating_sub(cdf_min) as f64;
        lut[level] = (255.0 * num / denom).round() as u8;
    }

    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.set(x, y, lut[img.get(x, y) as usize]);
        }
    }
    out
}
