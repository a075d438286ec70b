//! Fiber-orientation estimation via the 2D FFT spectrum and via Hough line
//! detection, plus the acquisition-effect studies (magnification, frame
//! shape, brightness uniformity).

mod fft;
mod hough;

pub use fft::{angular_distribution, fft2, Complex, OrientationDistribution, Spectrum};
pub use hough::{
    estimate_line_lengths, hough_peaks, hough_transform, orientation_from_hough, DetectedLine,
    HoughAccumulator, HoughWeighting,
};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Acquisition variants studied against the unmodified web.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudyVariant {
    /// Center-crop to 1/m of each side, the field-of-view analog of an
    /// m-times magnification.
    Magnification(u32),
    /// Zero everything outside the inscribed disk (circular frame);
    /// the baseline is the square frame.
    FrameCircle,
    /// Add a constant to every pixel (saturating at 255). With a clamp-free
    /// offset the FFT path is exactly invariant: only DC moves, and DC is
    /// excluded from the distribution.
    BrightnessUniform(u8),
    /// Multiply by a horizontal 0.5 -> 1.5 ramp, clamped to [0, 255].
    BrightnessGradient,
}

/// Paired result of an effect study.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectStudy {
    pub baseline: OrientationDistribution,
    pub variant: OrientationDistribution,
    pub l1_distance: f64,
}

/// FFT-path orientation analysis of the web and one acquisition variant of
/// it, with the L1 distance between the two distributions.
pub fn study_effects(web: &GrayImage, variant: StudyVariant, bins: usize) -> Result<EffectStudy> {
    let baseline = angular_distribution(&fft2(web), bins)?;
    let modified = apply_variant(web, variant)?;
    let changed = angular_distribution(&fft2(&modified), bins)?;
    let l1 = baseline.l1_distance(&changed);
    Ok(EffectStudy {
        baseline,
        variant: changed,
        l1_distance: l1,
    })
}

fn apply_variant(web: &GrayImage, variant: StudyVariant) -> Result<GrayImage> {
    match variant {
        StudyVariant::Magnification(m) => {
            if m < 2 {
                return Err(Error::InvalidParameter("magnification must be >= 2".into()));
            }
            let cw = (web.width() as f64 / m as f64).round() as usize;
            let ch = (web.height() as f64 / m as f64).round() as usize;
            if cw < 32 || ch < 32 {
                return Err(Error::InvalidParameter(format!(
                    "magnification {m}x crop {cw}x{ch} is below 32x32"
                )));
            }
            web.crop((web.width() - cw) / 2, (web.height() - ch) / 2, cw, ch)
        }
        StudyVariant::FrameCircle => {
            let (w, h) = (web.width(), web.height());
            let r = w.min(h) as f64 / 2.0;
            let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
            let mut out = web.clone();
            for y in 0..h {
                for x in 0..w {
                    let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    if d2 > r * r {
                        out.set(x, y, 0);
                    }
                }
            }
            Ok(out)
        }
        StudyVariant::BrightnessUniform(offset) => {
            let pixels = web.pixels().iter().map(|&p| p.saturating_add(offset)).collect();
            GrayImage::from_pixels(web.width(), web.height(), pixels)
        }
        StudyVariant::BrightnessGradient => {
            let (w, h) = (web.width(), web.height());
            let mut out = web.clone();
            for y in 0..h {
                for x in 0..w {
                    let gain = 0.5 + x as f64 / (w.max(2) - 1) as f64;
                    let v = (web.get(x, y) as f64 * gain).round().clamp(0.0, 255.0);
                    out.set(x, y, v as u8);
                }
            }
            Ok(out)
        }
    }
}
