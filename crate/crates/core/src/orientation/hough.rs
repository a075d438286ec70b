//! Line detection in the (rho, theta) parameter plane: every foreground
//! pixel votes once per theta bin at rho = x cos(theta) + y sin(theta),
//! with theta restricted to [0, 180) degrees and rho signed.

use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::orientation::fft::OrientationDistribution;

/// Vote accumulator over the quantized (rho, theta) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct HoughAccumulator {
    counts: Vec<u32>,
    rho_bins: usize,
    theta_bins: usize,
    delta_rho: f64,
    delta_theta: f64,
    /// rho value of bin 0 (= -diagonal)
    rho_min: f64,
}

impl HoughAccumulator {
    pub fn rho_bins(&self) -> usize {
        self.rho_bins
    }

    pub fn theta_bins(&self) -> usize {
        self.theta_bins
    }

    pub fn delta_rho(&self) -> f64 {
        self.delta_rho
    }

    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, rho_idx: usize, theta_idx: usize) -> u32 {
        self.counts[rho_idx * self.theta_bins + theta_idx]
    }

    /// rho value at a bin index.
    pub fn rho_value(&self, rho_idx: usize) -> f64 {
        self.rho_min + rho_idx as f64 * self.delta_rho
    }

    /// theta value (degrees) at a bin index.
    pub fn theta_value(&self, theta_idx: usize) -> f64 {
        theta_idx as f64 * self.delta_theta
    }

    pub fn total_votes(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Builds the accumulator for a binary image.
pub fn hough_transform(
    bin: &BinaryImage,
    delta_rho: f64,
    delta_theta: f64,
) -> Result<HoughAccumulator> {
    if !(delta_rho > 0.0) || !(delta_theta > 0.0) {
        return Err(Error::InvalidParameter(
            "rho and theta steps must be positive".into(),
        ));
    }
    let (w, h) = (bin.width(), bin.height());
    let diag = ((w * w + h * h) as f64).sqrt().ceil();
    let rho_bins = (2.0 * diag / delta_rho).round() as usize + 1;
    let theta_bins = (180.0 / delta_theta).ceil() as usize;

    let trig: Vec<(f64, f64)> = (0..theta_bins)
        .map(|t| {
            let rad = (t as f64 * delta_theta).to_radians();
            (rad.cos(), rad.sin())
        })
        .collect();

    let mut counts = vec![0u32; rho_bins * theta_bins];
    for y in 0..h {
        for x in 0..w {
            if bin.get(x, y) == 0 {
                continue;
            }
            for (t, &(c, s)) in trig.iter().enumerate() {
                let rho = x as f64 * c + y as f64 * s;
                let idx = ((rho + diag) / delta_rho).round() as usize;
                counts[idx * theta_bins + t] += 1;
            }
        }
    }
    Ok(HoughAccumulator {
        counts,
        rho_bins,
        theta_bins,
        delta_rho,
        delta_theta,
        rho_min: -diag,
    })
}

/// One extracted accumulator peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedLine {
    /// signed normal distance in px
    pub rho: f64,
    /// normal angle in degrees, [0, 180)
    pub theta_deg: f64,
    /// pixels supporting the line (accumulator count, later the band count)
    pub support: u32,
    /// largest gap-free extent along the line, px (0 until estimated)
    pub estimated_length: f64,
}

impl DetectedLine {
    /// Fiber-axis angle: the line direction is normal to theta.
    pub fn fiber_angle_deg(&self) -> f64 {
        (self.theta_deg - 90.0).rem_euclid(180.0)
    }
}

/// Greedy descending-count peak extraction with rectangular non-maximum
/// suppression.
///
/// `nms_window` gives the suppression half-widths in (rho bins, theta
/// bins); the theta axis wraps at 180 degrees with the rho axis mirrored.
/// Extraction stops below `min_support` or after `max_lines` peaks. Ties
/// resolve to the lower theta bin, then the lower rho bin.
pub fn hough_peaks(
    acc: &HoughAccumulator,
    max_lines: usize,
    nms_window: (usize, usize),
    min_support: u32,
) -> Result<Vec<DetectedLine>> {
    if max_lines == 0 {
        return Err(Error::InvalidParameter("max_lines must be >= 1".into()));
    }
    let (rho_radius, theta_radius) = nms_window;

    // candidates sorted by (count desc, theta asc, rho asc); visiting them
    // in order while marking suppressed cells matches a repeated
    // global-max scan, since suppression only removes cells
    let mut candidates: Vec<(u32, usize, usize)> = Vec::new();
    for t in 0..acc.theta_bins {
        for r in 0..acc.rho_bins {
            let c = acc.counts[r * acc.theta_bins + t];
            if c >= min_support.max(1) {
                candidates.push((c, t, r));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut suppressed = vec![false; acc.counts.len()];
    let mut out = Vec::new();
    for (c, t, r) in candidates {
        if out.len() >= max_lines {
            break;
        }
        if suppressed[r * acc.theta_bins + t] {
            continue;
        }
        out.push(DetectedLine {
            rho: acc.rho_value(r),
            theta_deg: acc.theta_value(t),
            support: c,
            estimated_length: 0.0,
        });

        // suppress the window, wrapping theta with a rho mirror
        for dt in -(theta_radius as isize)..=theta_radius as isize {
            for dr in -(rho_radius as isize)..=rho_radius as isize {
                let mut tt = t as isize + dt;
                let mut rr = r as isize + dr;
                if tt < 0 || tt >= acc.theta_bins as isize {
                    tt = tt.rem_euclid(acc.theta_bins as isize);
                    rr = acc.rho_bins as isize - 1 - rr;
                }
                if rr < 0 || rr >= acc.rho_bins as isize {
                    continue;
                }
                suppressed[rr as usize * acc.theta_bins + tt as usize] = true;
            }
        }
    }
    Ok(out)
}

/// For each line, collects foreground pixels within perpendicular distance
/// `band`, projects them onto the line direction, and reports the largest
/// extent whose internal gaps never exceed 2 px. `support` becomes the
/// in-band pixel count.
pub fn estimate_line_lengths(
    bin: &BinaryImage,
    lines: &[DetectedLine],
    band: f64,
) -> Result<Vec<DetectedLine>> {
    if !(band >= 1.0) {
        return Err(Error::InvalidParameter("band must be >= 1 px".into()));
    }
    const GAP_TOLERANCE: f64 = 2.0;
    let foreground: Vec<(f64, f64)> = (0..bin.height())
        .flat_map(|y| (0..bin.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| bin.get(x, y) == 1)
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    let mut out = Vec::with_capacity(lines.len());
    for line in lines {
        let rad = line.theta_deg.to_radians();
        let (c, s) = (rad.cos(), rad.sin());
        let mut projections = Vec::new();
        for &(x, y) in &foreground {
            let d = x * c + y * s - line.rho;
            if d.abs() <= band {
                projections.push(-x * s + y * c);
            }
        }
        projections.sort_by(|a, b| a.partial_cmp(b).expect("finite projections"));

        let mut best = 0f64;
        let mut run_start = 0usize;
        for i in 1..=projections.len() {
            let broken = i == projections.len()
                || projections[i] - projections[i - 1] > GAP_TOLERANCE;
            if broken {
                if i > run_start {
                    best = best.max(projections[i - 1] - projections[run_start] + 1.0);
                }
                run_start = i;
            }
        }
        out.push(DetectedLine {
            estimated_length: if projections.is_empty() { 0.0 } else { best },
            support: projections.len() as u32,
            ..*line
        });
    }
    Ok(out)
}

/// How detected lines contribute to the orientation histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoughWeighting {
    ByLength,
    ByCount,
}

/// Histogram of fiber-axis angles over the detected lines.
pub fn orientation_from_hough(
    lines: &[DetectedLine],
    bins: usize,
    weighting: HoughWeighting,
) -> Result<OrientationDistribution> {
    if lines.is_empty() {
        return Err(Error::NoSignal("no detected lines".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter("need at least two bins".into()));
    }
    let bin_width = 180.0 / bins as f64;
    let mut weights = vec![0f64; bins];
    for line in lines {
        let k = ((line.fiber_angle_deg() / bin_width) as usize).min(bins - 1);
        weights[k] += match weighting {
            HoughWeighting::ByLength => line.estimated_length,
            HoughWeighting::ByCount => 1.0,
        };
    }
    OrientationDistribution::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn horizontal_line_image(w: usize, h: usize, row: usize, x0: usize, len: usize) -> BinaryImage {
        let mut img = BinaryImage::filled(w, h, 0).unwrap();
        for x in x0..x0 + len {
            img.set(x, row, 1);
        }
        img
    }

    #[test]
    fn horizontal_line_peaks_at_theta_90() {
        let img = horizontal_line_image(64, 64, 20, 5, 40);
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let peaks = hough_peaks(&acc, 1, (4, 4), 10).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].support, 40);
        assert_eq!(peaks[0].theta_deg, 90.0);
        assert_eq!(peaks[0].rho, 20.0);
    }

    #[test]
    fn diagonal_through_origin_peaks_at_135() {
        let mut img = BinaryImage::filled(64, 64, 0).unwrap();
        for i in 0..64 {
            img.set(i, i, 1);
        }
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let peaks = hough_peaks(&acc, 1, (4, 4), 10).unwrap();
        assert_eq!(peaks[0].theta_deg, 135.0);
        assert_eq!(peaks[0].rho, 0.0);
        assert_eq!(peaks[0].support, 64);
        assert_eq!(peaks[0].fiber_angle_deg(), 45.0);
    }

    #[test]
    fn empty_image_gives_empty_accumulator() {
        let img = BinaryImage::filled(32, 32, 0).unwrap();
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        assert!(acc.counts().iter().all(|&c| c == 0));
        assert!(hough_peaks(&acc, 5, (2, 2), 1).unwrap().is_empty());
    }

    #[test]
    fn every_pixel_votes_once_per_theta_bin() {
        let mut rng = SplitMix64::new(17);
        let bits: Vec<u8> = (0..48 * 40).map(|_| (rng.next_f64() < 0.2) as u8).collect();
        let img = BinaryImage::from_bits(48, 40, bits).unwrap();
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let expected = img.count_foreground() as u64 * acc.theta_bins() as u64;
        assert_eq!(acc.total_votes(), expected);
    }

    #[test]
    fn two_separated_lines_in_order_of_support() {
        let mut img = BinaryImage::filled(128, 128, 0).unwrap();
        for x in 10..110 {
            img.set(x, 30, 1); // support 100
        }
        for y in 20..100 {
            img.set(60, y, 1); // support 80
        }
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let peaks = hough_peaks(&acc, 2, (5, 5), 20).unwrap();
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[0].theta_deg, 90.0);
        assert!(peaks[0].support >= 100);
        assert_eq!(peaks[1].theta_deg, 0.0);
        assert!(peaks[1].support >= 80);
    }

    #[test]
    fn min_support_above_max_yields_nothing() {
        let img = horizontal_line_image(64, 64, 10, 0, 50);
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        assert!(hough_peaks(&acc, 5, (2, 2), 1000).unwrap().is_empty());
    }

    #[test]
    fn nms_keeps_only_the_stronger_of_two_close_lines() {
        let mut img = BinaryImage::filled(64, 64, 0).unwrap();
        for x in 0..60 {
            img.set(x, 20, 1);
        }
        for x in 0..40 {
            img.set(x, 22, 1); // 2 rho bins away, same theta
        }
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let peaks = hough_peaks(&acc, 4, (5, 5), 30).unwrap();
        let at_90: Vec<&DetectedLine> =
            peaks.iter().filter(|p| p.theta_deg == 90.0).collect();
        assert_eq!(at_90.len(), 1);
        assert_eq!(at_90[0].rho, 20.0);
    }

    #[test]
    fn straight_line_length_within_five_percent() {
        let img = horizontal_line_image(128, 64, 31, 10, 100);
        let acc = hough_transform(&img, 1.0, 1.0).unwrap();
        let peaks = hough_peaks(&acc, 1, (4, 4), 20).unwrap();
        let measured = estimate_line_lengths(&img, &peaks, 1.0).unwrap();
        let len = measured[0].estimated_length;
        assert!((95.0..=100.0).contains(&len), "length {len}");
    }

    #[test]
    fn empty_band_has_zero_length() {
        let img = horizontal_line_image(64, 64, 10, 0, 30);
        let fake = DetectedLine {
            rho: 55.0,
            theta_deg: 90.0,
            support: 0,
            estimated_length: 0.0,
        };
        let out = estimate_line_lengths(&img, &[fake], 1.0).unwrap();
        assert_eq!(out[0].estimated_length, 0.0);
        assert_eq!(out[0].support, 0);
    }

    #[test]
    fn gap_tolerance_bridges_small_holes_only() {
        let mut img = BinaryImage::filled(128, 16, 0).unwrap();
        // two 30 px runs separated by a 10 px hole on one row
        for x in 0..30 {
            img.set(x, 8, 1);
        }
        for x in 40..70 {
            img.set(x, 8, 1);
        }
        let line = DetectedLine {
            rho: 8.0,
            theta_deg: 90.0,
            support: 0,
            estimated_length: 0.0,
        };
        let out = estimate_line_lengths(&img, &[line], 1.0).unwrap();
        assert!((out[0].estimated_length - 30.0).abs() < 1.0);
    }

    #[test]
    fn orientation_single_family_is_one_bin() {
        let lines = vec![
            DetectedLine {
                rho: 3.0,
                theta_deg: 90.0,
                support: 40,
                estimated_length: 40.0,
            },
            DetectedLine {
                rho: 9.0,
                theta_deg: 90.0,
                support: 25,
                estimated_length: 25.0,
            },
        ];
        let dist = orientation_from_hough(&lines, 4, HoughWeighting::ByLength).unwrap();
        assert_eq!(dist.bins()[0], 1.0); // fiber axis 0 degrees
    }

    #[test]
    fn two_equal_perpendicular_families_split_evenly() {
        let lines = vec![
            DetectedLine {
                rho: 3.0,
                theta_deg: 90.0,
                support: 0,
                estimated_length: 50.0,
            },
            DetectedLine {
                rho: 9.0,
                theta_deg: 0.0,
                support: 0,
                estimated_length: 50.0,
            },
        ];
        let dist = orientation_from_hough(&lines, 4, HoughWeighting::ByLength).unwrap();
        assert_eq!(dist.bins()[0], 0.5);
        assert_eq!(dist.bins()[2], 0.5);
    }

    #[test]
    fn empty_lines_is_no_signal() {
        assert!(matches!(
            orientation_from_hough(&[], 4, HoughWeighting::ByCount),
            Err(Error::NoSignal(_))
        ));
    }
}
