//! Deterministic, seeded generators for synthetic validation inputs: fiber
//! webs (straight or curved), ideal sinusoidal surfaces, pilled textures,
//! defect webs and two-phase pore media with exact ground truth.
//!
//! Every generator is bit-reproducible for a fixed seed, and the returned
//! [`GroundTruth`] is exact by construction, never estimated.

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::rng::SplitMix64;
use crate::roughness::HeightMap;

/// Parameters of a synthetic fiber web.
#[derive(Debug, Clone, PartialEq)]
pub struct WebSpec {
    pub width: usize,
    pub height: usize,
    pub line_count: usize,
    /// (fiber-axis angle in degrees within [0, 180), weight > 0)
    pub angle_distribution: Vec<(f64, f64)>,
    /// arc length range in pixels (min, max)
    pub length_range: (f64, f64),
    /// stroke thickness in pixels
    pub thickness: usize,
    /// sagitta-to-chord ratio; 0 draws straight segments
    pub curvature: f64,
    pub seed: u64,
}

impl WebSpec {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("zero-area canvas".into()));
        }
        if self.angle_distribution.is_empty() && self.line_count > 0 {
            return Err(Error::InvalidParameter("empty angle distribution".into()));
        }
        let wsum: f64 = self.angle_distribution.iter().map(|&(_, w)| w).sum();
        if self.line_count > 0 && !(wsum > 0.0 && wsum.is_finite()) {
            return Err(Error::InvalidParameter(
                "angle weights must sum to a positive finite value".into(),
            ));
        }
        for &(a, w) in &self.angle_distribution {
            if !(0.0..180.0).contains(&a) || !(w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "bad angle distribution entry ({a}, {w})"
                )));
            }
        }
        let (lo, hi) = self.length_range;
        if !(lo > 0.0) || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "bad length range ({lo}, {hi})"
            )));
        }
        if self.thickness == 0 {
            return Err(Error::InvalidParameter("thickness must be >= 1".into()));
        }
        if !(self.curvature >= 0.0) {
            return Err(Error::InvalidParameter("curvature must be >= 0".into()));
        }
        Ok(())
    }
}

/// Exact per-line record of a generated web.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthLine {
    /// fiber-axis (chord) angle in degrees, [0, 180)
    pub angle_deg: f64,
    /// arc length in pixels
    pub arc_length_px: f64,
    /// continuous chord endpoints
    pub endpoints: ((f64, f64), (f64, f64)),
    /// true when any rasterized pixel fell outside the canvas
    pub clipped: bool,
}

/// Exact construction record for a generated image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub lines: Vec<TruthLine>,
    /// punched pore diameters in mm, placement order
    pub pores: Vec<f64>,
    /// punched-area fraction (analytic, not rasterized)
    pub porosity_2d: f64,
}

/// Draws `line_count` hard (non-anti-aliased) white strokes on black.
///
/// Angle families receive exact line counts by largest-remainder allocation
/// of the distribution weights, so the ground-truth tally matches the
/// requested mix exactly.
pub fn gen_fiber_web(spec: &WebSpec) -> Result<(GrayImage, GroundTruth)> {
    spec.validate()?;
    let mut img = GrayImage::filled(spec.width, spec.height, 0)?;
    let mut truth = GroundTruth::default();
    if spec.line_count == 0 {
        return Ok((img, truth));
    }

    let counts = largest_remainder_counts(
        &spec
            .angle_distribution
            .iter()
            .map(|&(_, w)| w)
            .collect::<Vec<_>>(),
        spec.line_count,
    );

    let mut rng = SplitMix64::new(spec.seed);
    for (family, &count) in counts.iter().enumerate() {
        let angle_deg = spec.angle_distribution[family].0;
        for _ in 0..count {
            let length = if spec.length_range.0 == spec.length_range.1 {
                spec.length_range.0
            } else {
                rng.uniform(spec.length_range.0, spec.length_range.1)
            };
            let cx = rng.uniform(0.0, spec.width as f64);
            let cy = rng.uniform(0.0, spec.height as f64);
            let line = draw_stroke(&mut img, (cx, cy), angle_deg, length, spec);
            truth.lines.push(line);
        }
    }
    Ok((img, truth))
}

/// Exact integer allocation of `total` into parts proportional to `weights`.
fn largest_remainder_counts(weights: &[f64], total: usize) -> Vec<usize> {
    let wsum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / wsum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut remaining = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = exact[i] - exact[i].floor();
        let rj = exact[j] - exact[j].floor();
        rj.partial_cmp(&ri).expect("finite remainders").then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        counts[i] += 1;
        remaining -= 1;
    }
    counts
}

/// Rasterizes one straight or arc stroke centered at `center` and returns
/// its exact truth record.
fn draw_stroke(
    img: &mut GrayImage,
    center: (f64, f64),
    angle_deg: f64,
    length: f64,
    spec: &WebSpec,
) -> TruthLine {
    let theta = angle_deg.to_radians();
    let dir = (theta.cos(), theta.sin());
    let normal = (-theta.sin(), theta.cos());

    let n_steps = length.round().max(1.0) as usize;
    let mut clipped = false;
    let endpoints;

    if spec.curvature == 0.0 {
        let half = length / 2.0;
        let p0 = (center.0 - dir.0 * half, center.1 - dir.1 * half);
        let p1 = (center.0 + dir.0 * half, center.1 + dir.1 * half);
        endpoints = (p0, p1);
        for k in 0..n_steps {
            let s = (k as f64 + 0.5) * length / n_steps as f64;
            let p = (p0.0 + dir.0 * s, p0.1 + dir.1 * s);
            clipped |= stamp(img, p, spec.thickness);
        }
    } else {
        // circular arc with the requested sagitta/chord ratio: the half
        // subtended angle follows from s/c = tan(phi/2)/2
        let phi = 2.0 * (2.0 * spec.curvature).atan();
        let radius = length / (2.0 * phi);
        let arc_center = (
            center.0 + normal.0 * radius * phi.cos(),
            center.1 + normal.1 * radius * phi.cos(),
        );
        let half_chord = radius * phi.sin();
        endpoints = (
            (center.0 - dir.0 * half_chord, center.1 - dir.1 * half_chord),
            (center.0 + dir.0 * half_chord, center.1 + dir.1 * half_chord),
        );
        for k in 0..n_steps {
            let s = (k as f64 + 0.5) * length / n_steps as f64;
            let t = -phi + s / radius;
            let p = (
                arc_center.0 + radius * (t.sin() * dir.0 - t.cos() * normal.0),
                arc_center.1 + radius * (t.sin() * dir.1 - t.cos() * normal.1),
            );
            clipped |= stamp(img, p, spec.thickness);
        }
    }

    TruthLine {
        angle_deg,
        arc_length_px: length,
        endpoints,
        clipped,
    }
}

/// Stamps a thickness x thickness square brush; returns true when any part
/// fell outside the canvas.
fn stamp(img: &mut GrayImage, p: (f64, f64), thickness: usize) -> bool {
    let t = thickness as isize;
    let lo = -(t - 1) / 2;
    let hi = t / 2;
    let (px, py) = (p.0.floor() as isize, p.1.floor() as isize);
    let mut clipped = false;
    for dy in lo..=hi {
        for dx in lo..=hi {
            let (x, y) = (px + dx, py + dy);
            if x < 0 || y < 0 || x as usize >= img.width() || y as usize >= img.height() {
                clipped = true;
            } else {
                img.set(x as usize, y as usize, 255);
            }
        }
    }
    clipped
}

/// Ideal comfort surface: a sinusoid along x with the requested physical
/// wavelength and amplitude, sampled at `dpi`.
///
/// h(x, y) = amplitude/2 * (1 + sin(2 pi x pitch / wavelength)),
/// pitch = 25.4 / dpi mm; peaks reach `amplitude_um`, troughs 0.
pub fn gen_ideal_surface(
    wavelength_mm: f64,
    amplitude_um: f64,
    dpi: f64,
    width: usize,
    height: usize,
) -> Result<HeightMap> {
    if !(wavelength_mm > 0.0) || !(dpi > 0.0) || !(amplitude_um >= 0.0) {
        return Err(Error::InvalidParameter(
            "wavelength and dpi must be positive, amplitude non-negative".into(),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("zero-area canvas".into()));
    }
    let pitch = 25.4 / dpi;
    let mut heights = Vec::with_capacity(width * height);
    for _y in 0..height {
        for x in 0..width {
            let phase = std::f64::consts::TAU * (x as f64) * pitch / wavelength_mm;
            heights.push(amplitude_um / 2.0 * (1.0 + phase.sin()));
        }
    }
    HeightMap::from_heights(width, height, heights, pitch)
}

/// Number of bright blobs added per grade step below 5.
pub const PILLING_BLOBS_PER_GRADE: usize = 8;

/// Blobs stamped onto a texture of the given grade: (5 - grade) * 8,
/// monotone in pilling intensity.
pub fn pilled_blob_count(grade_level: u8) -> Result<usize> {
    if !(1..=5).contains(&grade_level) {
        return Err(Error::InvalidParameter(format!(
            "grade must be 1..=5, got {grade_level}"
        )));
    }
    Ok((5 - grade_level) as usize * PILLING_BLOBS_PER_GRADE)
}

/// Synthetic pilled texture: a fixed seeded base texture plus
/// (5 - grade) * 8 bright Gaussian blobs (sigma 4-8 px) at seeded positions.
/// Grade 5 is the base texture alone. The blob sequence is a fixed stream,
/// so lower grades add blobs on top of exactly the higher grades' blobs.
pub fn gen_pilled_texture(
    base_seed: u64,
    grade_level: u8,
    width: usize,
    height: usize,
) -> Result<GrayImage> {
    if !(1..=5).contains(&grade_level) {
        return Err(Error::InvalidParameter(format!(
            "grade must be 1..=5, got {grade_level}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("zero-area canvas".into()));
    }

    let mut base_rng = SplitMix64::new(base_seed);
    let mut field: Vec<f64> = (0..width * height)
        .map(|_| base_rng.uniform(80.0, 170.0))
        .collect();

    // independent blob stream so the base is identical across grades
    let mut blob_rng = SplitMix64::new(base_seed ^ 0xb10b_b10b_b10b_b10b);
    let blob_count = (5 - grade_level) as usize * PILLING_BLOBS_PER_GRADE;
    for _ in 0..blob_count {
        let cx = blob_rng.uniform(0.0, width as f64);
        let cy = blob_rng.uniform(0.0, height as f64);
        let sigma = blob_rng.uniform(4.0, 8.0);
        let amp = blob_rng.uniform(60.0, 110.0);
        let reach = (3.0 * sigma).ceil() as isize;
        let (px, py) = (cx.floor() as isize, cy.floor() as isize);
        for dy in -reach..=reach {
            let y = py + dy;
            if y < 0 || y as usize >= height {
                continue;
            }
            for dx in -reach..=reach {
                let x = px + dx;
                if x < 0 || x as usize >= width {
                    continue;
                }
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                field[y as usize * width + x as usize] +=
                    amp * (-r2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }

    let pixels = field
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_pixels(width, height, pixels)
}

/// Defect classes generated by [`gen_defect_web`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    NonDefect,
    ThickSpot,
    ThinSpot,
    Neps,
}

/// Synthetic web patch with one defect type stamped on a seeded base
/// texture. The base is identical across kinds for the same seed.
pub fn gen_defect_web(
    kind: DefectKind,
    seed: u64,
    width: usize,
    height: usize,
) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("zero-area canvas".into()));
    }
    let mut base_rng = SplitMix64::new(seed);
    let mut field: Vec<f64> = (0..width * height)
        .map(|_| base_rng.uniform(68.0, 94.0))
        .collect();

    let mut region_rng = SplitMix64::new(seed ^ 0xdefe_c7de_fec7_defe);
    let min_dim = width.min(height) as f64;
    match kind {
        DefectKind::NonDefect => {}
        DefectKind::ThickSpot | DefectKind::ThinSpot => {
            // one broad disk, brightened or darkened
            let r = region_rng.uniform(0.25, 0.32) * min_dim;
            let cx = region_rng.uniform(r, width as f64 - r);
            let cy = region_rng.uniform(r, height as f64 - r);
            let delta = if kind == DefectKind::ThickSpot { 75.0 } else { -45.0 };
            for y in 0..height {
                for x in 0..width {
                    let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    if d2 <= r * r {
                        field[y * width + x] += delta;
                    }
                }
            }
        }
        DefectKind::Neps => {
            // a cluster of small very bright specks
            let cluster_r = 0.15 * min_dim;
            let ccx = region_rng.uniform(cluster_r, width as f64 - cluster_r);
            let ccy = region_rng.uniform(cluster_r, height as f64 - cluster_r);
            for _ in 0..12 {
                let ang = region_rng.uniform(0.0, std::f64::consts::TAU);
                let rad = region_rng.uniform(0.0, cluster_r);
                let (sx, sy) = (ccx + rad * ang.cos(), ccy + rad * ang.sin());
                let speck_r = region_rng.uniform(1.0, 2.5);
                let reach = speck_r.ceil() as isize;
                let (px, py) = (sx.floor() as isize, sy.floor() as isize);
                for dy in -reach..=reach {
                    let y = py + dy;
                    if y < 0 || y as usize >= height {
                        continue;
                    }
                    for dx in -reach..=reach {
                        let x = px + dx;
                        if x < 0 || x as usize >= width {
                            continue;
                        }
                        let d2 = (x as f64 - sx).powi(2) + (y as f64 - sy).powi(2);
                        if d2 <= speck_r * speck_r {
                            field[y as usize * width + x as usize] = 235.0;
                        }
                    }
                }
            }
        }
    }

    let pixels = field
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_pixels(width, height, pixels)
}

/// Solid fiber sheet with `pore_count` non-overlapping disks punched out.
///
/// Disk radii cycle through `pore_radii_mm` in order, so the ground-truth
/// diameter distribution is exact. Placement is rejection sampling with at
/// most 10^4 attempts per disk.
pub fn gen_pore_medium(
    seed: u64,
    width: usize,
    height: usize,
    pixel_pitch_mm: f64,
    pore_radii_mm: &[f64],
    pore_count: usize,
) -> Result<(BinaryImage, GroundTruth)> {
    const MAX_ATTEMPTS: usize = 10_000;
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("zero-area canvas".into()));
    }
    if !(pixel_pitch_mm > 0.0) {
        return Err(Error::InvalidParameter("pixel pitch must be positive".into()));
    }
    if pore_count > 0 && pore_radii_mm.is_empty() {
        return Err(Error::InvalidParameter("no pore radii given".into()));
    }
    for &r in pore_radii_mm {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("bad pore radius {r}")));
        }
        let r_px = r / pixel_pitch_mm;
        if 2.0 * r_px >= width.min(height) as f64 {
            return Err(Error::InvalidParameter(format!(
                "pore radius {r} mm does not fit the canvas"
            )));
        }
    }

    let mut bin = BinaryImage::filled(width, height, 1)?.with_pixel_pitch(pixel_pitch_mm)?;
    let mut truth = GroundTruth::default();
    let mut rng = SplitMix64::new(seed);
    let mut placed: Vec<(f64, f64, f64)> = Vec::new(); // (cx, cy, r_px)

    for i in 0..pore_count {
        let r_mm = pore_radii_mm[i % pore_radii_mm.len()];
        let r_px = r_mm / pixel_pitch_mm;
        let mut attempt = 0;
        let center = loop {
            if attempt >= MAX_ATTEMPTS {
                return Err(Error::PlacementFailure(MAX_ATTEMPTS));
            }
            attempt += 1;
            let cx = rng.uniform(r_px, width as f64 - r_px);
            let cy = rng.uniform(r_px, height as f64 - r_px);
            let ok = placed.iter().all(|&(ox, oy, or)| {
                let d2 = (cx - ox).powi(2) + (cy - oy).powi(2);
                let min_d = r_px + or + 1.0;
                d2 > min_d * min_d
            });
            if ok {
                break (cx, cy);
            }
        };
        placed.push((center.0, center.1, r_px));
        truth.pores.push(2.0 * r_mm);

        let reach = r_px.ceil() as isize;
        let (px, py) = (center.0.floor() as isize, center.1.floor() as isize);
        for dy in -reach - 1..=reach + 1 {
            let y = py + dy;
            if y < 0 || y as usize >= height {
                continue;
            }
            for dx in -reach - 1..=reach + 1 {
                let x = px + dx;
                if x < 0 || x as usize >= width {
                    continue;
                }
                let d2 = (x as f64 + 0.5 - center.0).powi(2) + (y as f64 + 0.5 - center.1).powi(2);
                if d2 <= r_px * r_px {
                    bin.set(x as usize, y as usize, 0);
                }
            }
        }
    }

    let area_mm2 = width as f64 * height as f64 * pixel_pitch_mm * pixel_pitch_mm;
    truth.porosity_2d = placed
        .iter()
        .map(|&(_, _, r_px)| {
            let r_mm = r_px * pixel_pitch_mm;
            std::f64::consts::PI * r_mm * r_mm
        })
        .sum::<f64>()
        / area_mm2;
    Ok((bin, truth))
}
