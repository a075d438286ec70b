//! Subcommand definitions and their pipeline drivers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nonwoven_core::defect::{
    extract_features, mlp_classify, mlp_train, DefectClass, FeatureVector, MlpNetwork,
};
use nonwoven_core::edge::edge_magnitude;
use nonwoven_core::filter::{gaussian_filter, median_filter_1d, wiener_filter};
use nonwoven_core::histogram::{equalize_histogram, histogram, Histogram256};
use nonwoven_core::orientation::{
    angular_distribution, estimate_line_lengths, fft2, hough_peaks, hough_transform,
    orientation_from_hough, study_effects, HoughWeighting, OrientationDistribution, StudyVariant,
};
use nonwoven_core::pilling::{calibrate, grade, sd_approx, PillingCalibration};
use nonwoven_core::pores::{
    build_slicing_grid, denoise, geotextile_catalog, longitudinal_porosity, measure_pore_openings,
    percentile, planar_porosity, psd_curve, StructuringElement, CROSS_SECTION_SE_SIDE,
    PLANAR_SE_SIDE,
};
use nonwoven_core::roughness::{
    fit_friction_regression, profile_criteria, surface_roughness, table1_dataset, to_height_map,
    FrictionRecord, ProfileCriteria,
};
use nonwoven_core::synth::{
    gen_defect_web, gen_fiber_web, gen_ideal_surface, gen_pilled_texture, gen_pore_medium,
    DefectKind, GroundTruth, WebSpec,
};
use nonwoven_core::threshold::{chow_kaneko_threshold, global_threshold, Foreground};

use crate::output::{fmt_f64, read_image, write_image, write_text, Csv};
use crate::CliError;

#[derive(Parser)]
#[command(
    name = "nonwoven",
    version,
    about = "Nonwoven fabric image analysis: roughness, fiber orientation, pilling, defects and pore size distribution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate synthetic validation inputs with exact ground truth
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
    /// Surface-roughness profile analysis of a grayscale scan
    Roughness(RoughnessArgs),
    /// Ordinary least squares of friction on roughness
    Regress(RegressArgs),
    /// Fiber-orientation distribution of a web image
    Orient(OrientArgs),
    /// Paired orientation analysis under an acquisition variant
    OrientStudy(OrientStudyArgs),
    /// Pilling calibration and grading
    Pilling {
        #[command(subcommand)]
        action: PillingCommand,
    },
    /// Defect classifier training and classification
    Defect {
        #[command(subcommand)]
        action: DefectCommand,
    },
    /// Pore structure analysis of geotextile images
    Pores(PoresArgs),
}

#[derive(Subcommand)]
pub enum SynthCommand {
    /// Fiber web of straight or curved strokes
    Web(SynthWebArgs),
    /// Ideal sinusoidal comfort surface, rendered to gray
    Surface(SynthSurfaceArgs),
    /// Pilled texture series member
    Pilled(SynthPilledArgs),
    /// Web patch with one defect kind
    Defect(SynthDefectArgs),
    /// Two-phase pore medium (white fibers, black pores)
    Pores(SynthPoresArgs),
}

#[derive(Args)]
pub struct SynthWebArgs {
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = 100)]
    pub lines: usize,
    /// angle:weight pairs, e.g. "0:0.8,90:0.2"
    #[arg(long, default_value = "0:1")]
    pub angles: String,
    #[arg(long, default_value_t = 40.0)]
    pub length_min: f64,
    #[arg(long, default_value_t = 80.0)]
    pub length_max: f64,
    #[arg(long, default_value_t = 1)]
    pub thickness: usize,
    /// sagitta-to-chord ratio; 0 = straight
    #[arg(long, default_value_t = 0.0)]
    pub curvature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// optional ground-truth JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthSurfaceArgs {
    #[arg(long, default_value_t = 1.0)]
    pub wavelength_mm: f64,
    #[arg(long, default_value_t = 2.5)]
    pub amplitude_um: f64,
    #[arg(long, default_value_t = 600.0)]
    pub dpi: f64,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// gray rendering ceiling in micrometers
    #[arg(long, default_value_t = 2.5)]
    pub h_max_um: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthPilledArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 5 = unpilled ... 1 = heavily pilled
    #[arg(long)]
    pub grade: u8,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DefectKindArg {
    NonDefect,
    ThickSpot,
    ThinSpot,
    Neps,
}

impl From<DefectKindArg> for DefectKind {
    fn from(k: DefectKindArg) -> Self {
        match k {
            DefectKindArg::NonDefect => DefectKind::NonDefect,
            DefectKindArg::ThickSpot => DefectKind::ThickSpot,
            DefectKindArg::ThinSpot => DefectKind::ThinSpot,
            DefectKindArg::Neps => DefectKind::Neps,
        }
    }
}

#[derive(Args)]
pub struct SynthDefectArgs {
    #[arg(long, value_enum)]
    pub kind: DefectKindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub width: usize,
    #[arg(long, default_value_t = 200)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthPoresArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub width: usize,
    #[arg(long, default_value_t = 400)]
    pub height: usize,
    #[arg(long, default_value_t = 0.01)]
    pub pitch_mm: f64,
    /// comma-separated pore radii in mm, cycled in order
    #[arg(long, default_value = "0.08,0.12")]
    pub radii_mm: String,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Args)]
pub struct RoughnessArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// physical pixel side in mm
    #[arg(long)]
    pub pitch_mm: f64,
    #[arg(long, default_value_t = 2.5)]
    pub h_max_um: f64,
    /// Gaussian denoising strength; 0 skips the filter
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Wiener window (odd); 0 skips the filter
    #[arg(long, default_value_t = 5)]
    pub wiener_window: usize,
    /// skip histogram equalization
    #[arg(long)]
    pub no_equalize: bool,
    /// five criterion weights summing to 1
    #[arg(long, default_value = "0.2,0.2,0.2,0.2,0.2")]
    pub weights: String,
    #[arg(long, default_value_t = 1.0)]
    pub ideal_wavelength_mm: f64,
    #[arg(long, default_value_t = 2.5)]
    pub ideal_amplitude_um: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RegressArgs {
    /// use the embedded 30-row roughness/friction dataset
    #[arg(long)]
    pub table1: bool,
    /// CSV with surface_roughness,friction_coefficient columns
    #[arg(long, conflicts_with = "table1")]
    pub input: Option<PathBuf>,
    /// also write the scatter data that was fit
    #[arg(long)]
    pub dump_data: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrientMethod {
    Fft,
    Hough,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Length,
    Count,
}

#[derive(Args)]
pub struct OrientArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = OrientMethod::Fft)]
    pub method: OrientMethod,
    #[arg(long, default_value_t = 18)]
    pub bins: usize,
    /// apply Sobel edge magnitude before thresholding (Hough path)
    #[arg(long)]
    pub edge_detect: bool,
    /// binarization threshold for the Hough path
    #[arg(long, default_value_t = 127)]
    pub threshold: u8,
    #[arg(long, default_value_t = 1.0)]
    pub delta_rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_theta: f64,
    #[arg(long, default_value_t = 400)]
    pub max_lines: usize,
    #[arg(long, default_value_t = 1)]
    pub nms_rho: usize,
    #[arg(long, default_value_t = 1)]
    pub nms_theta: usize,
    #[arg(long, default_value_t = 25)]
    pub min_support: u32,
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[arg(long, value_enum, default_value_t = WeightingArg::Length)]
    pub weighting: WeightingArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OrientStudyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// one of: "magnification:M", "frame:circle", "brightness:uniform"
    /// (optionally "brightness:uniform:OFFSET"), "brightness:gradient"
    #[arg(long)]
    pub variant: String,
    #[arg(long, default_value_t = 18)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum PillingCommand {
    /// Build a grade calibration from graded sample images
    Calibrate(PillingCalibrateArgs),
    /// Grade an image against a saved calibration
    Grade(PillingGradeArgs),
}

#[derive(Args)]
pub struct PillingCalibrateArgs {
    /// repeated grade:path pairs, e.g. --sample 5:clean.pgm
    #[arg(long = "sample", required = true)]
    pub samples: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub level: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PillingGradeArgs {
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// optional CSV with the SDcA value and the interpolated grade
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum DefectCommand {
    /// Train the classifier from labeled patch images
    Train(DefectTrainArgs),
    /// Classify a patch image with a trained network
    Classify(DefectClassifyArgs),
}

#[derive(Args)]
pub struct DefectTrainArgs {
    /// repeated class:path pairs, e.g. --sample neps:patch.pgm
    #[arg(long = "sample", required = true)]
    pub samples: Vec<String>,
    /// comma-separated hidden layer sizes
    #[arg(long, default_value = "8,6")]
    pub hidden: String,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// optional per-epoch MSE curve CSV
    #[arg(long)]
    pub mse_curve: Option<PathBuf>,
}

#[derive(Args)]
pub struct DefectClassifyArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// JSON result
    #[arg(long)]
    pub out: PathBuf,
    /// optional box-counting scaling curve CSV for the thresholded patch
    #[arg(long)]
    pub fractal_curve: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
pub enum PoresMode {
    /// cross-section slicing analysis with the pore-size distribution
    Cross,
    /// planar porosity only
    Planar,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
pub enum FiberShade {
    /// fibers are the darker phase
    Dark,
    /// fibers are the brighter phase
    Bright,
}

#[derive(Args)]
pub struct PoresArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = PoresMode::Cross)]
    pub mode: PoresMode,
    /// physical pixel side in mm (defaults to the capture presets:
    /// 9.43e-3 cross-section, 4.83e-3 planar)
    #[arg(long)]
    pub pitch_mm: Option<f64>,
    /// geotextile physical thickness in mm (cross mode)
    #[arg(long, default_value_t = 3.0)]
    pub thickness_mm: f64,
    /// structuring element side (defaults: 3 cross-section, 2 planar)
    #[arg(long)]
    pub se_side: Option<usize>,
    /// apply Sobel edge magnitude before thresholding (thin-fiber inputs)
    #[arg(long)]
    pub edge_detect: bool,
    /// median window applied to the histogram before threshold selection;
    /// 0 disables
    #[arg(long, default_value_t = 0)]
    pub hist_median: usize,
    /// fixed binarization threshold; omitted selects the bimodal fit
    #[arg(long)]
    pub threshold: Option<u8>,
    #[arg(long, value_enum, default_value_t = FiberShade::Dark)]
    pub fiber: FiberShade,
    /// attach this catalogued geotextile's reference properties to the report
    #[arg(long)]
    pub geotextile: Option<String>,
    #[arg(long)]
    pub out_report: PathBuf,
    /// PSD curve CSV (cross mode)
    #[arg(long)]
    pub out_psd: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { what } => match what {
            SynthCommand::Web(a) => synth_web(a),
            SynthCommand::Surface(a) => synth_surface(a),
            SynthCommand::Pilled(a) => synth_pilled(a),
            SynthCommand::Defect(a) => synth_defect(a),
            SynthCommand::Pores(a) => synth_pores(a),
        },
        Command::Roughness(a) => run_roughness(a),
        Command::Regress(a) => run_regress(a),
        Command::Orient(a) => run_orient(a),
        Command::OrientStudy(a) => run_orient_study(a),
        Command::Pilling { action } => match action {
            PillingCommand::Calibrate(a) => run_pilling_calibrate(a),
            PillingCommand::Grade(a) => run_pilling_grade(a),
        },
        Command::Defect { action } => match action {
            DefectCommand::Train(a) => run_defect_train(a),
            DefectCommand::Classify(a) => run_defect_classify(a),
        },
        Command::Pores(a) => run_pores(a),
    }
}

fn parse_angles(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|pair| {
            let (a, w) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("bad angle entry {pair:?}")))?;
            let angle: f64 = a
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad angle {a:?}")))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad weight {w:?}")))?;
            Ok((angle, weight))
        })
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad number {t:?}")))
        })
        .collect()
}

#[derive(Serialize)]
struct TruthLineOut {
    angle_deg: f64,
    arc_length_px: f64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    clipped: bool,
}

#[derive(Serialize)]
struct TruthOut {
    lines: Vec<TruthLineOut>,
    pore_diameters_mm: Vec<f64>,
    porosity_2d: f64,
}

fn truth_json(truth: &GroundTruth) -> Result<String, CliError> {
    let out = TruthOut {
        lines: truth
            .lines
            .iter()
            .map(|l| TruthLineOut {
                angle_deg: l.angle_deg,
                arc_length_px: l.arc_length_px,
                x0: l.endpoints.0 .0,
                y0: l.endpoints.0 .1,
                x1: l.endpoints.1 .0,
                y1: l.endpoints.1 .1,
                clipped: l.clipped,
            })
            .collect(),
        pore_diameters_mm: truth.pores.clone(),
        porosity_2d: truth.porosity_2d,
    };
    serde_json::to_string_pretty(&out).map_err(|e| CliError::Data(e.to_string()))
}

fn synth_web(a: SynthWebArgs) -> Result<(), CliError> {
    let spec = WebSpec {
        width: a.width,
        height: a.height,
        line_count: a.lines,
        angle_distribution: parse_angles(&a.angles)?,
        length_range: (a.length_min, a.length_max),
        thickness: a.thickness,
        curvature: a.curvature,
        seed: a.seed,
    };
    let (img, truth) = gen_fiber_web(&spec)?;
    write_image(&a.out, &img)?;
    if let Some(path) = a.truth {
        write_text(&path, &truth_json(&truth)?)?;
    }
    Ok(())
}

fn synth_surface(a: SynthSurfaceArgs) -> Result<(), CliError> {
    let hm = gen_ideal_surface(a.wavelength_mm, a.amplitude_um, a.dpi, a.width, a.height)?;
    write_image(&a.out, &hm.to_gray(a.h_max_um)?)
}

fn synth_pilled(a: SynthPilledArgs) -> Result<(), CliError> {
    let img = gen_pilled_texture(a.seed, a.grade, a.width, a.height)?;
    write_image(&a.out, &img)
}

fn synth_defect(a: SynthDefectArgs) -> Result<(), CliError> {
    let img = gen_defect_web(a.kind.into(), a.seed, a.width, a.height)?;
    write_image(&a.out, &img)
}

fn synth_pores(a: SynthPoresArgs) -> Result<(), CliError> {
    let radii = parse_f64_list(&a.radii_mm)?;
    let (bin, truth) = gen_pore_medium(a.seed, a.width, a.height, a.pitch_mm, &radii, a.count)?;
    write_image(&a.out, &bin.to_gray())?;
    if let Some(path) = a.truth {
        write_text(&path, &truth_json(&truth)?)?;
    }
    Ok(())
}

fn criteria_cells(c: &ProfileCriteria) -> Vec<String> {
    vec![
        c.n_peaks.to_string(),
        fmt_f64(c.peak_spacing_var),
        fmt_f64(c.volume),
        fmt_f64(c.gray_deviation_var),
        fmt_f64(c.peak_value_var),
    ]
}

fn run_roughness(a: RoughnessArgs) -> Result<(), CliError> {
    let weights_v = parse_f64_list(&a.weights)?;
    let weights: [f64; 5] = weights_v
        .try_into()
        .map_err(|_| CliError::Usage("need exactly five weights".into()))?;

    let mut img = read_image(&a.input)?.with_pixel_pitch(a.pitch_mm)?;
    if !a.no_equalize {
        img = equalize_histogram(&img);
    }
    if a.sigma > 0.0 {
        img = gaussian_filter(&img, a.sigma)?;
    }
    if a.wiener_window > 0 {
        img = wiener_filter(&img, a.wiener_window)?;
    }
    let hm = to_height_map(&img, a.h_max_um)?;
    let sample = profile_criteria(&img, &hm)?;

    // ideal reference at the same sampling and size
    let dpi = 25.4 / a.pitch_mm;
    let ideal_hm = gen_ideal_surface(
        a.ideal_wavelength_mm,
        a.ideal_amplitude_um,
        dpi,
        img.width(),
        img.height(),
    )?;
    let ideal_img = ideal_hm.to_gray(a.h_max_um)?;
    let ideal = profile_criteria(&ideal_img, &ideal_hm)?;

    let rs = surface_roughness(&sample, &ideal, &weights)?;

    let mut csv = Csv::new(&[
        "subject",
        "n_peaks",
        "peak_spacing_var_px2",
        "volume_um_mm2",
        "gray_deviation_var",
        "peak_value_var",
        "surface_roughness",
    ]);
    let mut sample_cells = vec!["sample".to_string()];
    sample_cells.extend(criteria_cells(&sample));
    sample_cells.push(fmt_f64(rs));
    csv.row(&sample_cells);
    let mut ideal_cells = vec!["ideal".to_string()];
    ideal_cells.extend(criteria_cells(&ideal));
    ideal_cells.push(fmt_f64(0.0));
    csv.row(&ideal_cells);
    write_text(&a.out, &csv.finish())
}

fn run_regress(a: RegressArgs) -> Result<(), CliError> {
    let data: Vec<FrictionRecord> = if a.table1 {
        table1_dataset()
    } else {
        let path = a
            .input
            .ok_or_else(|| CliError::Usage("need --table1 or --input".into()))?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_alphabetic())) {
                continue; // header or blank
            }
            let mut cells = line.split(',');
            let rs: f64 = cells
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| CliError::Data(format!("bad row {i}: {line:?}")))?;
            let mu: f64 = cells
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| CliError::Data(format!("bad row {i}: {line:?}")))?;
            rows.push(FrictionRecord {
                surface_roughness: rs,
                friction_coefficient: mu,
            });
        }
        rows
    };
    let fit = fit_friction_regression(&data)?;
    let mut csv = Csv::new(&["slope", "intercept", "pearson_r", "r_squared", "n"]);
    csv.row(&[
        fmt_f64(fit.slope),
        fmt_f64(fit.intercept),
        fmt_f64(fit.pearson_r),
        fmt_f64(fit.pearson_r * fit.pearson_r),
        fit.n.to_string(),
    ]);
    write_text(&a.out, &csv.finish())?;
    if let Some(path) = a.dump_data {
        let mut scatter = Csv::new(&["surface_roughness", "friction_coefficient"]);
        for r in &data {
            scatter.row(&[fmt_f64(r.surface_roughness), fmt_f64(r.friction_coefficient)]);
        }
        write_text(&path, &scatter.finish())?;
    }
    Ok(())
}

fn distribution_csv(dist: &OrientationDistribution) -> String {
    let mut csv = Csv::new(&["angle_bin_start_deg", "weight"]);
    for (k, &w) in dist.bins().iter().enumerate() {
        csv.row(&[fmt_f64(dist.bin_start_deg(k)), fmt_f64(w)]);
    }
    csv.finish()
}

fn run_orient(a: OrientArgs) -> Result<(), CliError> {
    let img = read_image(&a.input)?;
    let dist = match a.method {
        OrientMethod::Fft => angular_distribution(&fft2(&img), a.bins)?,
        OrientMethod::Hough => {
            let prepared = if a.edge_detect {
                edge_magnitude(&img)?
            } else {
                img
            };
            let bin = global_threshold(&prepared, a.threshold, Foreground::Above);
            let acc = hough_transform(&bin, a.delta_rho, a.delta_theta)?;
            let peaks = hough_peaks(&acc, a.max_lines, (a.nms_rho, a.nms_theta), a.min_support)?;
            let lines = estimate_line_lengths(&bin, &peaks, a.band)?;
            let weighting = match a.weighting {
                WeightingArg::Length => HoughWeighting::ByLength,
                WeightingArg::Count => HoughWeighting::ByCount,
            };
            orientation_from_hough(&lines, a.bins, weighting)?
        }
    };
    write_text(&a.out, &distribution_csv(&dist))
}

fn parse_variant(text: &str) -> Result<StudyVariant, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["magnification", m] => {
            let m: u32 = m
                .parse()
                .map_err(|_| CliError::Usage(format!("bad magnification {m:?}")))?;
            Ok(StudyVariant::Magnification(m))
        }
        ["frame", "circle"] => Ok(StudyVariant::FrameCircle),
        ["brightness", "uniform"] => Ok(StudyVariant::BrightnessUniform(40)),
        ["brightness", "uniform", off] => {
            let off: u8 = off
                .parse()
                .map_err(|_| CliError::Usage(format!("bad offset {off:?}")))?;
            Ok(StudyVariant::BrightnessUniform(off))
        }
        ["brightness", "gradient"] => Ok(StudyVariant::BrightnessGradient),
        _ => Err(CliError::Usage(format!(
            "unknown variant {text:?}; expected magnification:<m>, frame:circle, \
             brightness:uniform[:<offset>] or brightness:gradient"
        ))),
    }
}

fn run_orient_study(a: OrientStudyArgs) -> Result<(), CliError> {
    let img = read_image(&a.input)?;
    let variant = parse_variant(&a.variant)?;
    let study = study_effects(&img, variant, a.bins)?;
    let mut csv = Csv::new(&["angle_bin_start_deg", "baseline_weight", "variant_weight"]);
    for k in 0..a.bins {
        csv.row(&[
            fmt_f64(study.baseline.bin_start_deg(k)),
            fmt_f64(study.baseline.bins()[k]),
            fmt_f64(study.variant.bins()[k]),
        ]);
    }
    write_text(&a.out, &csv.finish())?;
    println!("l1_distance {}", fmt_f64(study.l1_distance));
    Ok(())
}

fn parse_graded_sample(text: &str) -> Result<(u8, PathBuf), CliError> {
    let (g, path) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("expected grade:path, got {text:?}")))?;
    let grade: u8 = g
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grade {g:?}")))?;
    Ok((grade, PathBuf::from(path)))
}

fn run_pilling_calibrate(a: PillingCalibrateArgs) -> Result<(), CliError> {
    let mut samples = Vec::new();
    for s in &a.samples {
        let (grade, path) = parse_graded_sample(s)?;
        samples.push((grade, read_image(&path)?));
    }
    let cal = calibrate(&samples, a.level)?;
    write_text(&a.out, &cal.to_record())
}

fn run_pilling_grade(a: PillingGradeArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.calibration)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.calibration.display())))?;
    let cal = PillingCalibration::from_record(&text)?;
    let img = read_image(&a.input)?;
    let sd = sd_approx(&img, cal.level())?;
    let g = grade(&img, &cal)?;
    println!("grade {}", fmt_f64(g));
    if let Some(path) = a.out {
        let mut csv = Csv::new(&["sd_approx", "grade"]);
        csv.row(&[fmt_f64(sd), fmt_f64(g)]);
        write_text(&path, &csv.finish())?;
    }
    Ok(())
}

fn parse_class(text: &str) -> Result<DefectClass, CliError> {
    DefectClass::ALL
        .into_iter()
        .find(|c| c.name() == text)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown class {text:?}; expected non-defect, thick-spot, thin-spot or neps"
            ))
        })
}

fn run_defect_train(a: DefectTrainArgs) -> Result<(), CliError> {
    let mut data: Vec<(FeatureVector, DefectClass)> = Vec::new();
    for s in &a.samples {
        let (class, path) = s
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("expected class:path, got {s:?}")))?;
        let class = parse_class(class)?;
        let img = read_image(&PathBuf::from(path))?;
        data.push((extract_features(&img), class));
    }
    let hidden: Vec<usize> = a
        .hidden
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad hidden size {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let (net, report) = mlp_train(&data, &hidden, a.lr, a.epochs, a.seed)?;
    write_text(&a.out, &net.to_record())?;
    if let Some(path) = a.mse_curve {
        let mut csv = Csv::new(&["epoch", "mse"]);
        for (e, mse) in report.mse_curve.iter().enumerate() {
            csv.row(&[e.to_string(), fmt_f64(*mse)]);
        }
        write_text(&path, &csv.finish())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    class: &'static str,
    code: &'static str,
    confidences: [f64; 4],
    features: FeaturesOut,
}

#[derive(Serialize)]
struct FeaturesOut {
    mean_gray: f64,
    variance_gray: f64,
    std_gray: f64,
    density_pct: f64,
    fractal_dim: f64,
}

fn run_defect_classify(a: DefectClassifyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.network)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.network.display())))?;
    let net = MlpNetwork::from_record(&text)?;
    let img = read_image(&a.input)?;
    let f = extract_features(&img);
    if let Some(path) = &a.fractal_curve {
        // the same threshold rule extract_features applies internally
        let patch = nonwoven_core::defect::normalize_patch(&img);
        let t = chow_kaneko_threshold(&histogram(&patch))
            .unwrap_or_else(|_| patch.mean().round().clamp(0.0, 255.0) as u8);
        let mask = global_threshold(&patch, t, Foreground::Above);
        let mut csv = Csv::new(&["box_size_px", "occupied_boxes"]);
        for (s, count) in nonwoven_core::defect::box_count_scaling(&mask) {
            csv.row(&[s.to_string(), count.to_string()]);
        }
        write_text(path, &csv.finish())?;
    }
    let (class, code, confidences) = mlp_classify(&net, &f);
    let report = ClassifyReport {
        class: class.name(),
        code,
        confidences,
        features: FeaturesOut {
            mean_gray: f.mean_gray,
            variance_gray: f.variance_gray,
            std_gray: f.std_gray,
            density_pct: f.density_pct,
            fractal_dim: f.fractal_dim,
        },
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    write_text(&a.out, &json)
}

#[derive(Serialize)]
struct GeotextileOut {
    name: String,
    structure: String,
    grammage_g_m2: f64,
    thickness_mm: f64,
    aos_min_mm: f64,
    aos_max_mm: f64,
    porosity_pct: f64,
    permittivity_per_s: f64,
}

#[derive(Serialize)]
struct PoresReport {
    mode: &'static str,
    threshold: u8,
    porosity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset_px: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fiber_thickness_px: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    longitudinal_porosity: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    opening_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    o50_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    o95_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geotextile: Option<GeotextileOut>,
}

fn smoothed_histogram(hist: &Histogram256, window: usize) -> Result<Histogram256, CliError> {
    let counts: Vec<f64> = hist.counts().iter().map(|&c| c as f64).collect();
    let filtered = median_filter_1d(&counts, window)?;
    let mut rounded = [0u64; 256];
    for (slot, v) in rounded.iter_mut().zip(&filtered) {
        *slot = v.round().max(0.0) as u64;
    }
    Ok(Histogram256::from_counts(rounded))
}

fn run_pores(a: PoresArgs) -> Result<(), CliError> {
    let pitch = a.pitch_mm.unwrap_or(match a.mode {
        PoresMode::Cross => nonwoven_core::pores::CROSS_SECTION_PIXEL_PITCH_MM,
        PoresMode::Planar => nonwoven_core::pores::PLANAR_PIXEL_PITCH_MM,
    });
    let se_side = a.se_side.unwrap_or(match a.mode {
        PoresMode::Cross => CROSS_SECTION_SE_SIDE,
        PoresMode::Planar => PLANAR_SE_SIDE,
    });
    let se = StructuringElement::square(se_side)?;

    let mut img = read_image(&a.input)?.with_pixel_pitch(pitch)?;
    if a.edge_detect {
        img = edge_magnitude(&img)?;
    }
    let threshold = match a.threshold {
        Some(t) => t,
        None => {
            let hist = histogram(&img);
            let hist = if a.hist_median >= 3 {
                smoothed_histogram(&hist, a.hist_median)?
            } else {
                hist
            };
            chow_kaneko_threshold(&hist)?
        }
    };
    let direction = match a.fiber {
        FiberShade::Dark => Foreground::Below,
        FiberShade::Bright => Foreground::Above,
    };
    let fiber_mask = denoise(&global_threshold(&img, threshold, direction), &se);

    let geotextile = match &a.geotextile {
        None => None,
        Some(name) => {
            let rec = geotextile_catalog()
                .into_iter()
                .find(|r| r.name.eq_ignore_ascii_case(name))
                .ok_or_else(|| {
                    CliError::Usage(format!("unknown geotextile {name:?}; catalog: N, P, M, C4, D1"))
                })?;
            Some(GeotextileOut {
                name: rec.name.to_string(),
                structure: rec.structure.to_string(),
                grammage_g_m2: rec.grammage_g_m2,
                thickness_mm: rec.thickness_mm,
                aos_min_mm: rec.aos_min_mm,
                aos_max_mm: rec.aos_max_mm,
                porosity_pct: rec.porosity_pct,
                permittivity_per_s: rec.permittivity_per_s,
            })
        }
    };

    let report = match a.mode {
        PoresMode::Planar => PoresReport {
            mode: "planar",
            threshold,
            porosity: planar_porosity(&fiber_mask),
            slice_count: None,
            offset_px: None,
            fiber_thickness_px: None,
            longitudinal_porosity: None,
            opening_count: None,
            o50_mm: None,
            o95_mm: None,
            geotextile,
        },
        PoresMode::Cross => {
            let grid = build_slicing_grid(&fiber_mask, a.thickness_mm)?;
            let porosity_by_band = longitudinal_porosity(&fiber_mask, &grid);
            let openings = measure_pore_openings(&fiber_mask, &grid)?;
            let (o50, o95, psd) = if openings.is_empty() {
                (None, None, None)
            } else {
                let curve = psd_curve(&openings)?;
                let o50 = percentile(&curve, 50.0)?;
                let o95 = percentile(&curve, 95.0)?;
                (Some(o50), Some(o95), Some(curve))
            };
            if let Some(path) = &a.out_psd {
                let mut csv = Csv::new(&["size_mm", "cumulative_fraction"]);
                if let Some(curve) = &psd {
                    for (s, c) in curve.sizes().iter().zip(curve.cumulative()) {
                        csv.row(&[fmt_f64(*s), fmt_f64(*c)]);
                    }
                }
                write_text(path, &csv.finish())?;
            }
            PoresReport {
                mode: "cross",
                threshold,
                porosity: planar_porosity(&fiber_mask),
                slice_count: Some(grid.slice_count),
                offset_px: Some(grid.offset),
                fiber_thickness_px: Some(grid.fiber_thickness_px),
                longitudinal_porosity: Some(porosity_by_band),
                opening_count: Some(openings.len()),
                o50_mm: o50,
                o95_mm: o95,
                geotextile,
            }
        }
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    write_text(&a.out_report, &json)
}
