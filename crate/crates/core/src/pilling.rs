//! Pilling grading: cascaded 2D Haar wavelet analysis, the SDcA statistic
//! (standard deviation of level-n approximation coefficients), the
//! five-way crop augmentation protocol and calibrated grade interpolation.

use crate::error::{Error, Result};
use crate::histogram::equalize_histogram;
use crate::image::GrayImage;

/// Real-valued matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidParameter(
                "grid buffer does not match dimensions".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Edge-replicates the last column/row as needed to make both
    /// dimensions even.
    fn padded_even(&self) -> Grid {
        let w = self.width + self.width % 2;
        let h = self.height + self.height % 2;
        if (w, h) == (self.width, self.height) {
            return self.clone();
        }
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            let sy = y.min(self.height - 1);
            for x in 0..w {
                let sx = x.min(self.width - 1);
                data.push(self.get(sx, sy));
            }
        }
        Grid {
            width: w,
            height: h,
            data,
        }
    }

    /// Population standard deviation of all entries.
    pub fn population_sd(&self) -> f64 {
        let n = self.data.len() as f64;
        let mean = self.data.iter().sum::<f64>() / n;
        (self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
    }
}

/// One analysis level: approximation plus horizontal/vertical/diagonal
/// detail grids.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletLevel {
    pub approx: Grid,
    pub horizontal: Grid,
    pub vertical: Grid,
    pub diagonal: Grid,
}

/// Orthonormal single-level 2D Haar analysis (rows first, then columns;
/// filter taps +-1/sqrt(2)). Odd dimensions are edge-replicated to even
/// before filtering, so level-k grids have side ceil(prev / 2).
pub fn haar_dwt2(grid: &Grid) -> Result<WaveletLevel> {
    if grid.width < 2 || grid.height < 2 {
        return Err(Error::InvalidParameter(format!(
            "haar analysis needs at least 2x2, got {}x{}",
            grid.width, grid.height
        )));
    }
    let g = grid.padded_even();
    let (w, h) = (g.width, g.height);
    let (hw, hh) = (w / 2, h / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    // row pass: per row, lowpass into the left half, highpass into the right
    let mut rows = vec![0f64; w * h];
    for y in 0..h {
        for j in 0..hw {
            let a = g.get(2 * j, y);
            let b = g.get(2 * j + 1, y);
            rows[y * w + j] = s * (a + b);
            rows[y * w + hw + j] = s * (a - b);
        }
    }

    // column pass on both halves
    let mut ca = vec![0f64; hw * hh];
    let mut ch = vec![0f64; hw * hh];
    let mut cv = vec![0f64; hw * hh];
    let mut cd = vec![0f64; hw * hh];
    for i in 0..hh {
        for x in 0..hw {
            let lo_a = rows[(2 * i) * w + x];
            let lo_b = rows[(2 * i + 1) * w + x];
            ca[i * hw + x] = s * (lo_a + lo_b);
            ch[i * hw + x] = s * (lo_a - lo_b);
            let hi_a = rows[(2 * i) * w + hw + x];
            let hi_b = rows[(2 * i + 1) * w + hw + x];
            cv[i * hw + x] = s * (hi_a + hi_b);
            cd[i * hw + x] = s * (hi_a - hi_b);
        }
    }

    Ok(WaveletLevel {
        approx: Grid::new(hw, hh, ca)?,
        horizontal: Grid::new(hw, hh, ch)?,
        vertical: Grid::new(hw, hh, cv)?,
        diagonal: Grid::new(hw, hh, cd)?,
    })
}

/// Inverse of [`haar_dwt2`] for even-sized sources.
pub fn haar_idwt2(level: &WaveletLevel) -> Result<Grid> {
    let (hw, hh) = (level.approx.width, level.approx.height);
    for g in [&level.horizontal, &level.vertical, &level.diagonal] {
        if (g.width, g.height) != (hw, hh) {
            return Err(Error::InvalidParameter(
                "coefficient grids must share dimensions".into(),
            ));
        }
    }
    let (w, h) = (2 * hw, 2 * hh);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    // invert the column pass
    let mut rows = vec![0f64; w * h];
    for i in 0..hh {
        for x in 0..hw {
            let ca = level.approx.get(x, i);
            let ch = level.horizontal.get(x, i);
            let cv = level.vertical.get(x, i);
            let cd = level.diagonal.get(x, i);
            rows[(2 * i) * w + x] = s * (ca + ch);
            rows[(2 * i + 1) * w + x] = s * (ca - ch);
            rows[(2 * i) * w + hw + x] = s * (cv + cd);
            rows[(2 * i + 1) * w + hw + x] = s * (cv - cd);
        }
    }
    // invert the row pass
    let mut data = vec![0f64; w * h];
    for y in 0..h {
        for j in 0..hw {
            let lo = rows[y * w + j];
            let hi = rows[y * w + hw + j];
            data[y * w + 2 * j] = s * (lo + hi);
            data[y * w + 2 * j + 1] = s * (lo - hi);
        }
    }
    Grid::new(w, h, data)
}

/// Full multi-level decomposition, level 1..=levels along the
/// approximation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub levels: Vec<WaveletLevel>,
    pub source_width: usize,
    pub source_height: usize,
}

impl WaveletDecomposition {
    pub fn analyze(grid: &Grid, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter("need at least one level".into()));
        }
        let mut out = Vec::with_capacity(levels);
        let mut current = grid.clone();
        for _ in 0..levels {
            let level = haar_dwt2(&current)?;
            current = level.approx.clone();
            out.push(level);
        }
        Ok(Self {
            levels: out,
            source_width: grid.width,
            source_height: grid.height,
        })
    }

    /// Inverts the cascade. Exact (to rounding) for even-sized sources.
    pub fn reconstruct(&self) -> Result<Grid> {
        let mut current = self
            .levels
            .last()
            .expect("analyze produces at least one level")
            .approx
            .clone();
        for level in self.levels.iter().rev() {
            let with_details = WaveletLevel {
                approx: current,
                horizontal: level.horizontal.clone(),
                vertical: level.vertical.clone(),
                diagonal: level.diagonal.clone(),
            };
            current = haar_idwt2(&with_details)?;
        }
        Ok(current)
    }
}

/// SDcA_n: histogram-equalize the image, run `level` cascaded Haar
/// analyses along the approximation chain, and take the population
/// standard deviation of the final approximation coefficients.
pub fn sd_approx(img: &GrayImage, level: usize) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    // the level-n approximation must keep at least 4 coefficients
    let (mut w, mut h) = (img.width(), img.height());
    for _ in 0..level {
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    if w < 2 || h < 2 {
        return Err(Error::InvalidParameter(format!(
            "{}x{} image is too small for level {level}",
            img.width(),
            img.height()
        )));
    }

    let equalized = equalize_histogram(img);
    let mut current = Grid::from_gray(&equalized);
    for _ in 0..level {
        current = haar_dwt2(&current)?.approx;
    }
    Ok(current.population_sd())
}

/// Fraction of each image edge removed by one crop variant.
pub const CROP_FRACTION: f64 = 0.15;

/// The original plus four variants, each with 15% (rounded) removed from
/// exactly one edge: top, bottom, left, right.
pub fn crop_augment(img: &GrayImage) -> Result<Vec<GrayImage>> {
    let (w, h) = (img.width(), img.height());
    if w < 20 || h < 20 {
        return Err(Error::InvalidParameter(format!(
            "crop augmentation needs at least 20x20, got {w}x{h}"
        )));
    }
    let dx = (CROP_FRACTION * w as f64).round() as usize;
    let dy = (CROP_FRACTION * h as f64).round() as usize;
    Ok(vec![
        img.clone(),
        img.crop(0, dy, w, h - dy)?, // top edge removed
        img.crop(0, 0, w, h - dy)?,  // bottom edge removed
        img.crop(dx, 0, w - dx, h)?, // left edge removed
        img.crop(0, 0, w - dx, h)?,  // right edge removed
    ])
}

/// Calibrated characteristic curve linking pilling grade to mean SDcA.
#[derive(Debug, Clone, PartialEq)]
pub struct PillingCalibration {
    level: usize,
    /// (grade, mean SDcA) for grades 1..=5, ascending grade
    points: [(u8, f64); 5],
    /// true when mean SDcA increases with grade
    increasing: bool,
}

impl PillingCalibration {
    /// Validates strict monotonicity across grades and fixes the direction.
    pub fn from_points(level: usize, points: [(u8, f64); 5]) -> Result<Self> {
        let mut sorted = points;
        sorted.sort_by_key(|&(g, _)| g);
        if sorted.map(|(g, _)| g) != [1, 2, 3, 4, 5] {
            let have: Vec<u8> = sorted.iter().map(|&(g, _)| g).collect();
            let missing = (1..=5).find(|g| !have.contains(g)).unwrap_or(0);
            return Err(Error::IncompleteCalibration(missing));
        }
        let increasing = sorted.windows(2).all(|w| w[1].1 > w[0].1);
        let decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);
        if !increasing && !decreasing {
            return Err(Error::NonMonotoneCalibration(level));
        }
        Ok(Self {
            level,
            points: sorted,
            increasing,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn points(&self) -> &[(u8, f64); 5] {
        &self.points
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// Line-oriented text record: level, then five "grade mean" lines.
    pub fn to_record(&self) -> String {
        let mut out = format!("{}\n", self.level);
        for (g, m) in &self.points {
            out.push_str(&format!("{g} {m}\n"));
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let level: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::ParseError("missing calibration level".into()))?;
        let mut points = [(0u8, 0f64); 5];
        for slot in &mut points {
            let line = lines
                .next()
                .ok_or_else(|| Error::ParseError("missing calibration point".into()))?;
            let mut it = line.split_whitespace();
            let grade: u8 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::ParseError(format!("bad calibration line {line:?}")))?;
            let mean: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::ParseError(format!("bad calibration line {line:?}")))?;
            *slot = (grade, mean);
        }
        Self::from_points(level, points)
    }
}

/// Builds a calibration from graded sample images.
///
/// Every sample is crop-augmented five ways, SDcA at `level` is computed
/// for each variant, and per-grade means must come out strictly monotone
/// (callers should move to a different analysis level when they do not).
pub fn calibrate(samples: &[(u8, GrayImage)], level: usize) -> Result<PillingCalibration> {
    let mut sums = [0f64; 5];
    let mut counts = [0usize; 5];
    for (grade, img) in samples {
        if !(1..=5).contains(grade) {
            return Err(Error::InvalidParameter(format!("grade {grade} out of range")));
        }
        for variant in crop_augment(img)? {
            sums[(*grade - 1) as usize] += sd_approx(&variant, level)?;
            counts[(*grade - 1) as usize] += 1;
        }
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::IncompleteCalibration(missing as u8 + 1));
    }
    let mut points = [(0u8, 0f64); 5];
    for g in 0..5 {
        points[g] = (g as u8 + 1, sums[g] / counts[g] as f64);
    }
    PillingCalibration::from_points(level, points)
}

/// Grades an image by piecewise-linear inverse interpolation of its SDcA
/// through the calibration points, clamped to [1, 5].
pub fn grade(img: &GrayImage, cal: &PillingCalibration) -> Result<f64> {
    let s = sd_approx(img, cal.level)?;
    Ok(grade_from_sd(s, cal))
}

/// Interpolates a grade for an already-computed SDcA value.
pub fn grade_from_sd(s: f64, cal: &PillingCalibration) -> f64 {
    let pts = &cal.points;
    // clamp beyond the calibrated range
    let (first, last) = (pts[0], pts[4]);
    if cal.increasing {
        if s <= first.1 {
            return first.0 as f64;
        }
        if s >= last.1 {
            return last.0 as f64;
        }
    } else {
        if s >= first.1 {
            return first.0 as f64;
        }
        if s <= last.1 {
            return last.0 as f64;
        }
    }
    for w in pts.windows(2) {
        let (g0, m0) = w[0];
        let (g1, m1) = w[1];
        let inside = if cal.increasing {
            (m0..=m1).contains(&s)
        } else {
            (m1..=m0).contains(&s)
        };
        if inside {
            let t = (s - m0) / (m1 - m0);
            return g0 as f64 + t * (g1 - g0) as f64;
        }
    }
    // monotone points cover the whole range; unreachable in practice
    last.0 as f64
}
