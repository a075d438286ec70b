//! Geotextile pore analysis: binary morphology with small square
//! structuring elements, morphological denoising, the cross-section slicing
//! grid, longitudinal porosity, band-local pore-opening measurement and the
//! cumulative pore-size distribution with its O50/O95 percentiles.

use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::skeleton::{prune, skeletonize};

/// Default pixel pitch preset for planar captures (mm).
pub const PLANAR_PIXEL_PITCH_MM: f64 = 4.83e-3;
/// Default pixel pitch preset for cross-section captures (mm).
pub const CROSS_SECTION_PIXEL_PITCH_MM: f64 = 9.43e-3;
/// Default structuring-element side for planar images.
pub const PLANAR_SE_SIDE: usize = 2;
/// Default structuring-element side for cross-section images.
pub const CROSS_SECTION_SE_SIDE: usize = 3;

/// Square structuring element. The origin is fixed at the top-left cell;
/// [`StructuringElement::reflected`] moves it to the bottom-right, which is
/// what the open/close duality identity needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    side: usize,
    origin: (usize, usize),
}

impl StructuringElement {
    pub fn square(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidParameter("SE side must be >= 1".into()));
        }
        Ok(Self {
            side,
            origin: (0, 0),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// The point-reflected element: offsets negated about the origin.
    pub fn reflected(&self) -> Self {
        Self {
            side: self.side,
            origin: (self.side - 1 - self.origin.0, self.side - 1 - self.origin.1),
        }
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (ox, oy) = (self.origin.0 as isize, self.origin.1 as isize);
        let side = self.side as isize;
        (0..side).flat_map(move |dy| (0..side).map(move |dx| (dx - ox, dy - oy)))
    }
}

/// Erosion: a pixel survives iff every SE offset lands on foreground.
/// Pixels beyond the border read as background.
pub fn erode(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let mut out = BinaryImage::filled(bin.width(), bin.height(), 0)
        .expect("dimensions come from a valid image");
    for y in 0..bin.height() {
        for x in 0..bin.width() {
            let all = se
                .offsets()
                .all(|(dx, dy)| bin.get_or_bg(x as isize + dx, y as isize + dy) == 1);
            if all {
                out.set(x, y, 1);
            }
        }
    }
    carry_pitch(bin, out)
}

/// Dilation: a pixel fires iff any reflected-offset source is foreground.
pub fn dilate(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let mut out = BinaryImage::filled(bin.width(), bin.height(), 0)
        .expect("dimensions come from a valid image");
    for y in 0..bin.height() {
        for x in 0..bin.width() {
            let any = se
                .offsets()
                .any(|(dx, dy)| bin.get_or_bg(x as isize - dx, y as isize - dy) == 1);
            if any {
                out.set(x, y, 1);
            }
        }
    }
    carry_pitch(bin, out)
}

/// Opening: erosion then dilation. Removes foreground features smaller
/// than the SE.
pub fn open(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate(&erode(bin, se), se)
}

/// Closing: dilation then erosion. Fills background features smaller than
/// the SE.
pub fn close(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode(&dilate(bin, se), se)
}

/// Morphological denoising: opening first (speck removal), then closing of
/// the opened image (pinhole removal), both with the same SE.
pub fn denoise(bin: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    close(&open(bin, se), se)
}

fn carry_pitch(src: &BinaryImage, out: BinaryImage) -> BinaryImage {
    match src.pixel_pitch() {
        Some(p) => out.with_pixel_pitch(p).expect("pitch already validated"),
        None => out,
    }
}

/// Mean fiber width in pixels: foreground area divided by skeleton length.
pub fn estimate_fiber_thickness(bin: &BinaryImage) -> Result<f64> {
    let fg = bin.count_foreground();
    if fg == 0 {
        return Err(Error::EmptyForeground);
    }
    let skel = skeletonize(bin);
    let len = skel.count_foreground().max(1);
    Ok(fg as f64 / len as f64)
}

/// Horizontal slicing grid positioned on a cross-section image.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicingGrid {
    /// ideal band count: floor(physical thickness / mean fiber thickness)
    pub slice_count: usize,
    /// strictly increasing row boundaries from 0 to image height
    pub boundaries: Vec<usize>,
    /// chosen cyclic vertical shift in px
    pub offset: usize,
    /// mean fiber thickness in px
    pub fiber_thickness_px: f64,
}

impl SlicingGrid {
    /// Disjoint, exhaustive band ranges.
    pub fn bands(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }
}

/// Builds the optimally shifted uniform slicing grid.
///
/// The band count divides the physical thickness by the mean fiber
/// thickness. Horizontally oriented fiber pixels are extracted from the
/// pruned skeleton with a 1x5 horizontal run filter (at least 4 hits) and
/// a 3x3 dilation; every cyclic vertical offset is scored by how many of
/// those pixels land on grid boundary rows, and the best (smallest on
/// ties) wins.
pub fn build_slicing_grid(cross: &BinaryImage, physical_thickness_mm: f64) -> Result<SlicingGrid> {
    let pitch = cross.pixel_pitch().ok_or(Error::MissingCalibration)?;
    if !(physical_thickness_mm > 0.0) {
        return Err(Error::InvalidParameter(
            "physical thickness must be positive".into(),
        ));
    }
    let fiber_px = estimate_fiber_thickness(cross)?;
    let slice_count = ((physical_thickness_mm / (fiber_px * pitch)).floor() as usize).max(1);
    if slice_count == 1 {
        return Ok(SlicingGrid {
            slice_count,
            boundaries: vec![0, cross.height()],
            offset: 0,
            fiber_thickness_px: fiber_px,
        });
    }

    let horizontal = horizontal_fiber_mask(cross);
    let h = cross.height();
    let mut row_counts = vec![0usize; h];
    for y in 0..h {
        for x in 0..cross.width() {
            if horizontal.get(x, y) == 1 {
                row_counts[y] += 1;
            }
        }
    }

    let band_height = (h / slice_count).max(1);
    let mut best_offset = 0usize;
    let mut best_score = usize::MAX; // sentinel: replaced on first pass
    for offset in 0..band_height {
        let mut score = 0usize;
        let mut rows: Vec<usize> = (0..slice_count)
            .map(|i| (i * h / slice_count + offset) % h)
            .collect();
        rows.sort_unstable();
        rows.dedup();
        for &r in &rows {
            score += row_counts[r];
        }
        // strict improvement only: ties keep the smaller offset
        if best_score == usize::MAX || score > best_score {
            best_offset = offset;
            best_score = score;
        }
    }

    let mut boundaries: Vec<usize> = (0..slice_count)
        .map(|i| (i * h / slice_count + best_offset) % h)
        .collect();
    boundaries.push(0);
    boundaries.push(h);
    boundaries.sort_unstable();
    boundaries.dedup();

    Ok(SlicingGrid {
        slice_count,
        boundaries,
        offset: best_offset,
        fiber_thickness_px: fiber_px,
    })
}

/// Skeletonize, prune short spurs, keep skeleton pixels with >= 4 set
/// cells in their centered 1x5 horizontal window, then grow by the
/// centered 3x3 neighborhood back to fiber width.
fn horizontal_fiber_mask(cross: &BinaryImage) -> BinaryImage {
    let skel = prune(&skeletonize(cross), 5);
    let (w, h) = (cross.width(), cross.height());
    let mut kept = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if skel.get(x, y) == 0 {
                continue;
            }
            let hits: usize = (-2isize..=2)
                .map(|dx| skel.get_or_bg(x as isize + dx, y as isize) as usize)
                .sum();
            if hits >= 4 {
                kept.push((x, y));
            }
        }
    }
    let mut mask = BinaryImage::filled(w, h, 0).expect("valid dimensions");
    for (x, y) in kept {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    mask.set(nx as usize, ny as usize, 1);
                }
            }
        }
    }
    mask
}

/// Pore fraction of each grid band (pore = background).
pub fn longitudinal_porosity(cross: &BinaryImage, grid: &SlicingGrid) -> Vec<f64> {
    grid.bands()
        .map(|band| {
            let mut pore = 0usize;
            let mut total = 0usize;
            for y in band {
                for x in 0..cross.width() {
                    total += 1;
                    if cross.get(x, y) == 0 {
                        pore += 1;
                    }
                }
            }
            pore as f64 / total.max(1) as f64
        })
        .collect()
}

/// Shape-equivalent pore openings per band, in mm.
///
/// Within each band, pore pixels form 4-connected segments (the band
/// boundary acts as a wall); each segment reports the diameter of the
/// circle with its area: d = 2 sqrt(area / pi) * pitch.
pub fn measure_pore_openings(cross: &BinaryImage, grid: &SlicingGrid) -> Result<Vec<f64>> {
    let pitch = cross.pixel_pitch().ok_or(Error::MissingCalibration)?;
    let w = cross.width();
    let mut openings = Vec::new();
    let mut seen = vec![false; w * cross.height()];
    let mut stack = Vec::new();

    for band in grid.bands() {
        for y in band.clone() {
            for x in 0..w {
                let idx = y * w + x;
                if cross.get(x, y) == 1 || seen[idx] {
                    continue;
                }
                // flood one 4-connected pore segment inside the band
                let mut area = 0usize;
                seen[idx] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    area += 1;
                    let neighbors = [
                        (cx.wrapping_sub(1), cy),
                        (cx + 1, cy),
                        (cx, cy.wrapping_sub(1)),
                        (cx, cy + 1),
                    ];
                    for (nx, ny) in neighbors {
                        if nx >= w || !band.contains(&ny) {
                            continue;
                        }
                        let nidx = ny * w + nx;
                        if cross.get(nx, ny) == 0 && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
                openings.push(2.0 * (area as f64 / std::f64::consts::PI).sqrt() * pitch);
            }
        }
    }
    Ok(openings)
}

/// Empirical cumulative distribution of pore-opening sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCurve {
    /// ascending opening sizes in mm
    sizes: Vec<f64>,
    /// fraction of openings <= size, ending at 1
    cumulative: Vec<f64>,
}

impl PsdCurve {
    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// Count-weighted empirical CDF over the opening sizes.
pub fn psd_curve(sizes: &[f64]) -> Result<PsdCurve> {
    if sizes.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if sizes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sizes"));
    let n = sorted.len();
    let cumulative = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(PsdCurve {
        sizes: sorted,
        cumulative,
    })
}

/// O_p: linear interpolation between order statistics at rank
/// 1 + (n - 1) p / 100.
pub fn percentile(curve: &PsdCurve, p: f64) -> Result<f64> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "percentile must be in [0, 100], got {p}"
        )));
    }
    let s = &curve.sizes;
    let h = (s.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= s.len() {
        return Ok(s[s.len() - 1]);
    }
    Ok(s[lo] + frac * (s[lo + 1] - s[lo]))
}

/// Pore-pixel fraction of a planar mask (pore = background).
pub fn planar_porosity(planar: &BinaryImage) -> f64 {
    let total = planar.width() * planar.height();
    (total - planar.count_foreground()) as f64 / total as f64
}

/// Catalog entry for a reference geotextile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeotextileRecord {
    pub name: &'static str,
    pub structure: &'static str,
    pub grammage_g_m2: f64,
    pub thickness_mm: f64,
    pub aos_min_mm: f64,
    pub aos_max_mm: f64,
    pub porosity_pct: f64,
    pub permittivity_per_s: f64,
}

/// Reference metadata for the five catalogued geotextiles. Report context
/// only; nothing here is recomputed.
pub fn geotextile_catalog() -> [GeotextileRecord; 5] {
    [
        GeotextileRecord {
            name: "N",
            structure: "nonwoven, needle-punched, heat-bonded, polypropylene",
            grammage_g_m2: 136.0,
            thickness_mm: 0.45,
            aos_min_mm: 0.28,
            aos_max_mm: 0.28,
            porosity_pct: 66.4,
            permittivity_per_s: 0.70,
        },
        GeotextileRecord {
            name: "P",
            structure: "nonwoven, needle-punched, staple-fiber, polypropylene",
            grammage_g_m2: 387.0,
            thickness_mm: 3.0,
            aos_min_mm: 0.106,
            aos_max_mm: 0.106,
            porosity_pct: 85.7,
            permittivity_per_s: 0.80,
        },
        GeotextileRecord {
            name: "M",
            structure: "nonwoven, needle-punched, continuous filament, polypropylene",
            grammage_g_m2: 340.0,
            thickness_mm: 2.53,
            aos_min_mm: 0.15,
            aos_max_mm: 0.15,
            porosity_pct: 85.0,
            permittivity_per_s: 1.10,
        },
        GeotextileRecord {
            name: "C4",
            structure: "nonwoven, needle-punched, continuous filament, polypropylene",
            grammage_g_m2: 401.0,
            thickness_mm: 2.92,
            aos_min_mm: 0.15,
            aos_max_mm: 0.15,
            porosity_pct: 84.7,
            permittivity_per_s: 1.0,
        },
        GeotextileRecord {
            name: "D1",
            structure: "nonwoven, needle-punched, staple-fiber, polypropylene/polyester",
            grammage_g_m2: 228.0,
            thickness_mm: 2.21,
            aos_min_mm: 0.075,
            aos_max_mm: 0.104,
            porosity_pct: 88.5,
            permittivity_per_s: 1.35,
        },
    ]
}
