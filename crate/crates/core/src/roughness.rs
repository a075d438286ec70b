//! Surface-roughness pipeline: gray-to-height mapping, profile peak
//! detection, the five profile criteria, the roughness factor against an
//! ideal sinusoidal surface, and the embedded roughness/friction dataset
//! with its regression.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Default mapping ceiling: full white corresponds to 2.5 um.
pub const DEFAULT_H_MAX_UM: f64 = 2.5;

/// Per-pixel physical heights in micrometers.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    width: usize,
    height: usize,
    heights: Vec<f64>,
    pixel_pitch: f64,
}

impl HeightMap {
    pub fn from_heights(
        width: usize,
        height: usize,
        heights: Vec<f64>,
        pixel_pitch: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 || heights.len() != width * height {
            return Err(Error::InvalidParameter(
                "height buffer does not match dimensions".into(),
            ));
        }
        if !(pixel_pitch > 0.0) {
            return Err(Error::InvalidParameter("pixel pitch must be positive".into()));
        }
        if heights.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::InvalidParameter(
                "heights must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            heights,
            pixel_pitch,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Physical pixel side length in mm.
    pub fn pixel_pitch(&self) -> f64 {
        self.pixel_pitch
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.heights[y * self.width + x]
    }

    /// Renders heights back to gray levels against a mapping ceiling.
    pub fn to_gray(&self, h_max_um: f64) -> Result<GrayImage> {
        if !(h_max_um > 0.0) {
            return Err(Error::InvalidParameter("h_max must be positive".into()));
        }
        let pixels = self
            .heights
            .iter()
            .map(|&h| (h / h_max_um * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        GrayImage::from_pixels(self.width, self.height, pixels)?.with_pixel_pitch(self.pixel_pitch)
    }
}

/// One detected surface peak: plateau centroid and plateau height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub height_um: f64,
}

/// The five profile criteria evaluated on a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCriteria {
    /// N: number of surface peaks.
    pub n_peaks: usize,
    /// T: variance of nearest-neighbor peak spacing, px^2.
    pub peak_spacing_var: f64,
    /// E: material volume under the profile, um * mm^2.
    pub volume: f64,
    /// I_d: variance of the gray deviation from the mean gray, gray^2.
    pub gray_deviation_var: f64,
    /// V: variance of the gray values at peak locations, gray^2.
    pub peak_value_var: f64,
    /// Set when fewer than two peaks exist, in which case T and V are 0.
    pub degenerate: bool,
}

/// Linear gray-to-height mapping: h = g / 255 * h_max.
/// The image must carry a pixel pitch for the later volume criterion.
pub fn to_height_map(img: &GrayImage, h_max_um: f64) -> Result<HeightMap> {
    if !(h_max_um > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h_max must be positive, got {h_max_um}"
        )));
    }
    let pitch = img.pixel_pitch().ok_or(Error::MissingCalibration)?;
    let heights = img
        .pixels()
        .iter()
        .map(|&g| g as f64 / 255.0 * h_max_um)
        .collect();
    HeightMap::from_heights(img.width(), img.height(), heights, pitch)
}

/// Plateau-merged local maxima.
///
/// A peak is a connected component of pixels whose height is >= all of
/// their 8-neighbors, with at least one strictly lower neighbor somewhere
/// on the component border. Components touching the image border are kept;
/// each yields one peak at its centroid.
pub fn detect_peaks(hm: &HeightMap) -> Vec<Peak> {
    let (w, h) = (hm.width(), hm.height());
    let candidate = |x: usize, y: usize| -> bool {
        let v = hm.get(x, y);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                if hm.get(nx as usize, ny as usize) > v {
                    return false;
                }
            }
        }
        true
    };

    let mut cand = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            cand[y * w + x] = candidate(x, y);
        }
    }

    let mut seen = vec![false; w * h];
    let mut peaks = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !cand[start] || seen[start] {
            continue;
        }
        // flood one plateau component
        let mut members = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            members.push(idx);
            let (x, y) = ((idx % w) as isize, (idx / w) as isize);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    let nidx = ny as usize * w + nx as usize;
                    if cand[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }

        let value = hm.heights()[members[0]];
        let mut has_lower_border = false;
        'outer: for &idx in &members {
            let (x, y) = ((idx % w) as isize, (idx / w) as isize);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    if hm.get(nx as usize, ny as usize) < value {
                        has_lower_border = true;
                        break 'outer;
                    }
                }
            }
        }
        if !has_lower_border {
            continue;
        }

        let n = members.len() as f64;
        let cx = members.iter().map(|&i| (i % w) as f64).sum::<f64>() / n;
        let cy = members.iter().map(|&i| (i / w) as f64).sum::<f64>() / n;
        peaks.push(Peak {
            x: cx,
            y: cy,
            height_um: value,
        });
    }
    peaks
}

/// Evaluates the five profile criteria for a gray image and its height map.
pub fn profile_criteria(img: &GrayImage, hm: &HeightMap) -> Result<ProfileCriteria> {
    if img.width() != hm.width() || img.height() != hm.height() {
        return Err(Error::InvalidParameter(
            "image and height map dimensions differ".into(),
        ));
    }
    let peaks = detect_peaks(hm);
    let n_peaks = peaks.len();

    let pitch = hm.pixel_pitch();
    let volume: f64 = hm.heights().iter().sum::<f64>() * pitch * pitch;

    let gray_deviation_var = img.variance();

    let (peak_spacing_var, peak_value_var, degenerate) = if n_peaks < 2 {
        (0.0, 0.0, true)
    } else {
        // nearest-neighbor spacing per peak
        let mut dists = Vec::with_capacity(n_peaks);
        for (i, p) in peaks.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, q) in peaks.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                best = best.min(d);
            }
            dists.push(best);
        }
        let t = population_variance(&dists);

        let grays: Vec<f64> = peaks
            .iter()
            .map(|p| {
                let x = (p.x.round() as usize).min(img.width() - 1);
                let y = (p.y.round() as usize).min(img.height() - 1);
                img.get(x, y) as f64
            })
            .collect();
        (t, population_variance(&grays), false)
    };

    Ok(ProfileCriteria {
        n_peaks,
        peak_spacing_var,
        volume,
        gray_deviation_var,
        peak_value_var,
        degenerate,
    })
}

fn population_variance(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64
}

/// Combines the five criteria of a sample and the ideal surface into the
/// roughness factor
///
/// R_s = sum_i w_i |c_i(sample) - c_i(ideal)| / (|c_i(sample)| + |c_i(ideal)| + eps)
///
/// which is 0 for a sample matching the ideal, bounded by 1, symmetric, and
/// monotone in each criterion's deviation.
pub fn surface_roughness(
    sample: &ProfileCriteria,
    ideal: &ProfileCriteria,
    weights: &[f64; 5],
) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "weights must be non-negative and sum to 1, got sum {sum}"
        )));
    }
    const EPS: f64 = 1e-12;
    let cs = |c: &ProfileCriteria| {
        [
            c.n_peaks as f64,
            c.peak_spacing_var,
            c.volume,
            c.gray_deviation_var,
            c.peak_value_var,
        ]
    };
    let a = cs(sample);
    let b = cs(ideal);
    Ok((0..5)
        .map(|i| weights[i] * (a[i] - b[i]).abs() / (a[i].abs() + b[i].abs() + EPS))
        .sum())
}

/// Uniform criterion weights.
pub const UNIFORM_WEIGHTS: [f64; 5] = [0.2; 5];

/// One measured (surface roughness, friction coefficient) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionRecord {
    pub surface_roughness: f64,
    pub friction_coefficient: f64,
}

/// The 30-sample roughness/friction reference dataset (normal force 28 cN).
pub fn table1_dataset() -> Vec<FrictionRecord> {
    const ROWS: [(f64, f64); 30] = [
        (0.410, 0.395),
        (0.376, 0.362),
        (0.364, 0.348),
        (0.368, 0.347),
        (0.384, 0.373),
        (0.398, 0.386),
        (0.384, 0.378),
        (0.378, 0.362),
        (0.371, 0.357),
        (0.403, 0.394),
        (0.369, 0.360),
        (0.361, 0.354),
        (0.408, 0.401),
        (0.389, 0.367),
        (0.391, 0.383),
        (0.381, 0.371),
        (0.384, 0.363),
        (0.392, 0.376),
        (0.388, 0.375),
        (0.387, 0.365),
        (0.392, 0.378),
        (0.377, 0.359),
        (0.393, 0.379),
        (0.396, 0.384),
        (0.385, 0.368),
        (0.397, 0.389),
        (0.372, 0.364),
        (0.358, 0.344),
        (0.393, 0.384),
        (0.363, 0.354),
    ];
    ROWS.iter()
        .map(|&(surface_roughness, friction_coefficient)| FrictionRecord {
            surface_roughness,
            friction_coefficient,
        })
        .collect()
}

/// Ordinary least squares fit of friction on roughness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub n: usize,
}

/// Closed-form OLS of friction coefficient on surface roughness.
pub fn fit_friction_regression(data: &[FrictionRecord]) -> Result<RegressionFit> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "regression needs at least two records".into(),
        ));
    }
    let nf = n as f64;
    let sx: f64 = data.iter().map(|r| r.surface_roughness).sum();
    let sy: f64 = data.iter().map(|r| r.friction_coefficient).sum();
    let sxx: f64 = data.iter().map(|r| r.surface_roughness.powi(2)).sum();
    let syy: f64 = data.iter().map(|r| r.friction_coefficient.powi(2)).sum();
    let sxy: f64 = data
        .iter()
        .map(|r| r.surface_roughness * r.friction_coefficient)
        .sum();

    let den_x = nf * sxx - sx * sx;
    if den_x.abs() < 1e-300 {
        return Err(Error::DegenerateFit);
    }
    let slope = (nf * sxy - sx * sy) / den_x;
    let intercept = (sy - slope * sx) / nf;
    let den_y = nf * syy - sy * sy;
    let pearson_r = if den_y.abs() < 1e-300 {
        // flat response: correlation undefined, report 0
        0.0
    } else {
        (nf * sxy - sx * sy) / (den_x * den_y).sqrt()
    };
    Ok(RegressionFit {
        slope,
        intercept,
        pearson_r,
        n,
    })
}
