//! End-to-end tests through the built binary: exit codes, file outputs,
//! determinism, and one full run of every pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nonwoven_core::pgm::load_pgm;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonwoven"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_command_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_is_data_error_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let report = tmp(&dir, "dist.csv");
    let out = run(&[
        "orient",
        "--input",
        "/nonexistent/web.pgm",
        "--out",
        &s(&report),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists(), "no partial outputs on failure");
}

#[test]
fn regress_table1_matches_the_ols_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let fit = tmp(&dir, "fit.csv");
    let out = run(&["regress", "--table1", "--out", &s(&fit)]);
    assert_success(&out);
    let text = std::fs::read_to_string(&fit).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "slope,intercept,pearson_r,r_squared,n"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let slope: f64 = row[0].parse().unwrap();
    let intercept: f64 = row[1].parse().unwrap();
    let r: f64 = row[2].parse().unwrap();
    let n: usize = row[4].parse().unwrap();
    assert!((slope - 1.0271369435240276).abs() < 1e-9);
    assert!((intercept - -0.023480016461620384).abs() < 1e-9);
    assert!((r - 0.949259811799382).abs() < 1e-9);
    assert_eq!(n, 30);
}

#[test]
fn config_file_supplies_line_oriented_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let fit = tmp(&dir, "fit.csv");
    let scatter = tmp(&dir, "scatter.csv");
    let config = tmp(&dir, "regress.conf");
    std::fs::write(
        &config,
        format!(
            "# embedded-dataset regression\n--table1\n--dump-data\n{}\n--out\n{}\n",
            s(&scatter),
            s(&fit)
        ),
    )
    .unwrap();
    let out = run(&["regress", "--config", &s(&config)]);
    assert_success(&out);
    assert!(fit.exists());
    let scatter_text = std::fs::read_to_string(&scatter).unwrap();
    assert!(scatter_text.starts_with("surface_roughness,friction_coefficient"));
    assert_eq!(scatter_text.lines().count(), 31);
    assert_eq!(scatter_text.lines().nth(1).unwrap(), "0.41,0.395");
}

#[test]
fn missing_config_file_is_usage_error() {
    let out = run(&["regress", "--config", "/nonexistent.conf"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_web_zero_lines_is_valid_black_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = tmp(&dir, "web.pgm");
    let out = run(&[
        "synth", "web", "--lines", "0", "--width", "64", "--height", "48", "--out",
        &s(&img_path),
    ]);
    assert_success(&out);
    let img = load_pgm(&std::fs::read(&img_path).unwrap()).unwrap();
    assert_eq!((img.width(), img.height()), (64, 48));
    assert!(img.pixels().iter().all(|&p| p == 0));
}

#[test]
fn same_config_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = tmp(&dir, "a.pgm");
    let b = tmp(&dir, "b.pgm");
    for path in [&a, &b] {
        let out = run(&[
            "synth",
            "web",
            "--lines",
            "40",
            "--angles",
            "15:0.5,120:0.5",
            "--seed",
            "9",
            "--out",
            &s(path),
        ]);
        assert_success(&out);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn orient_fft_and_hough_emit_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let web = tmp(&dir, "web.pgm");
    assert_success(&run(&[
        "synth", "web", "--width", "256", "--height", "256", "--lines", "60", "--angles",
        "90:1", "--seed", "3", "--out", &s(&web),
    ]));

    for method in ["fft", "hough"] {
        let dist = tmp(&dir, &format!("{method}.csv"));
        let out = run(&[
            "orient",
            "--input",
            &s(&web),
            "--method",
            method,
            "--bins",
            "12",
            "--threshold",
            "127",
            "--out",
            &s(&dist),
        ]);
        assert_success(&out);
        let text = std::fs::read_to_string(&dist).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "angle_bin_start_deg,weight");
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (a, w) = l.split_once(',').unwrap();
                (a.parse().unwrap(), w.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 12);
        let total: f64 = rows.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // vertical fibers: the 90-degree bin dominates
        let mode = rows
            .iter()
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        assert_eq!(mode.0, 90.0, "method {method}");
    }
}

#[test]
fn orient_study_reports_paired_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let web = tmp(&dir, "web.pgm");
    assert_success(&run(&[
        "synth", "web", "--width", "128", "--height", "128", "--lines", "40", "--angles",
        "30:1", "--seed", "5", "--out", &s(&web),
    ]));
    let study = tmp(&dir, "study.csv");
    let out = run(&[
        "orient-study",
        "--input",
        &s(&web),
        "--variant",
        "brightness:gradient",
        "--bins",
        "12",
        "--out",
        &s(&study),
    ]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("l1_distance "), "stdout: {stdout}");
    let text = std::fs::read_to_string(&study).unwrap();
    assert!(text.starts_with("angle_bin_start_deg,baseline_weight,variant_weight"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn roughness_report_has_sample_and_ideal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let surface = tmp(&dir, "surface.pgm");
    // 508 dpi -> pitch 0.05 mm -> exact 20 px period
    assert_success(&run(&[
        "synth",
        "surface",
        "--dpi",
        "508",
        "--width",
        "96",
        "--height",
        "64",
        "--out",
        &s(&surface),
    ]));
    let report = tmp(&dir, "roughness.csv");
    let out = run(&[
        "roughness",
        "--input",
        &s(&surface),
        "--pitch-mm",
        "0.05",
        "--sigma",
        "0",
        "--wiener-window",
        "0",
        "--no-equalize",
        "--out",
        &s(&report),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("sample,"));
    assert!(lines[2].starts_with("ideal,"));
    // a scan of the ideal surface scores (quantization-level) zero roughness
    let rs: f64 = lines[1].split(',').next_back().unwrap().parse().unwrap();
    assert!(rs.abs() < 1e-3, "R_s {rs}");
}

#[test]
fn pilling_calibrate_then_grade_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut sample_args = Vec::new();
    for grade in 1..=5u8 {
        for rep in 0..2u64 {
            let path = tmp(&dir, &format!("g{grade}_{rep}.pgm"));
            assert_success(&run(&[
                "synth",
                "pilled",
                "--seed",
                &rep.to_string(),
                "--grade",
                &grade.to_string(),
                "--width",
                "128",
                "--height",
                "128",
                "--out",
                &s(&path),
            ]));
            sample_args.push(format!("{grade}:{}", s(&path)));
        }
    }
    let cal = tmp(&dir, "cal.txt");
    let mut args = vec!["pilling".to_string(), "calibrate".to_string()];
    for sa in &sample_args {
        args.push("--sample".into());
        args.push(sa.clone());
    }
    // level 4 keeps 128 px images large enough after the 15% crops
    args.extend(["--level".into(), "4".into(), "--out".into(), s(&cal)]);
    let out = bin().args(&args).output().unwrap();
    assert_success(&out);

    // grading a fresh grade-2 texture lands in the pilled half of the scale
    let probe = tmp(&dir, "probe.pgm");
    assert_success(&run(&[
        "synth", "pilled", "--seed", "7", "--grade", "2", "--width", "128", "--height",
        "128", "--out", &s(&probe),
    ]));
    let grade_csv = tmp(&dir, "grade.csv");
    let out = run(&[
        "pilling",
        "grade",
        "--calibration",
        &s(&cal),
        "--input",
        &s(&probe),
        "--out",
        &s(&grade_csv),
    ]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let value: f64 = stdout.trim().strip_prefix("grade ").unwrap().parse().unwrap();
    assert!((1.0..=3.5).contains(&value), "grade {value}");
    let text = std::fs::read_to_string(&grade_csv).unwrap();
    assert!(text.starts_with("sd_approx,grade"));
}

#[test]
fn defect_train_then_classify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut sample_args = Vec::new();
    for kind in ["non-defect", "thick-spot", "thin-spot", "neps"] {
        for seed in 0..3u64 {
            let path = tmp(&dir, &format!("{kind}_{seed}.pgm"));
            assert_success(&run(&[
                "synth",
                "defect",
                "--kind",
                kind,
                "--seed",
                &seed.to_string(),
                "--width",
                "160",
                "--height",
                "160",
                "--out",
                &s(&path),
            ]));
            sample_args.push(format!("{kind}:{}", s(&path)));
        }
    }
    let net = tmp(&dir, "net.txt");
    let curve = tmp(&dir, "mse.csv");
    let mut args = vec!["defect".to_string(), "train".to_string()];
    for sa in &sample_args {
        args.push("--sample".into());
        args.push(sa.clone());
    }
    args.extend([
        "--hidden".into(),
        "8,6".into(),
        "--lr".into(),
        "0.05".into(),
        "--epochs".into(),
        "400".into(),
        "--seed".into(),
        "1".into(),
        "--out".into(),
        s(&net),
        "--mse-curve".into(),
        s(&curve),
    ]);
    let out = bin().args(&args).output().unwrap();
    assert_success(&out);
    assert_eq!(
        std::fs::read_to_string(&curve).unwrap().lines().count(),
        401 // header + one row per epoch
    );

    // classify a held-out thin-spot patch
    let probe = tmp(&dir, "probe.pgm");
    assert_success(&run(&[
        "synth", "defect", "--kind", "thin-spot", "--seed", "9", "--width", "160",
        "--height", "160", "--out", &s(&probe),
    ]));
    let result = tmp(&dir, "result.json");
    let fractal = tmp(&dir, "fractal.csv");
    let out = run(&[
        "defect",
        "classify",
        "--network",
        &s(&net),
        "--input",
        &s(&probe),
        "--out",
        &s(&result),
        "--fractal-curve",
        &s(&fractal),
    ]);
    assert_success(&out);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(json["class"], "thin-spot");
    assert_eq!(json["code"], "0010");
    assert_eq!(json["confidences"].as_array().unwrap().len(), 4);

    // per-scale box counts for the 128x128 patch: sizes 128 down to 2
    let curve = std::fs::read_to_string(&fractal).unwrap();
    assert!(curve.starts_with("box_size_px,occupied_boxes"));
    assert_eq!(curve.lines().count(), 8);
    assert!(curve.lines().nth(1).unwrap().starts_with("128,"));
}

#[test]
fn pores_cross_section_report_and_psd() {
    let dir = tempfile::tempdir().unwrap();
    let medium = tmp(&dir, "medium.pgm");
    let truth = tmp(&dir, "truth.json");
    assert_success(&run(&[
        "synth",
        "pores",
        "--seed",
        "4",
        "--width",
        "300",
        "--height",
        "300",
        "--pitch-mm",
        "0.01",
        "--radii-mm",
        "0.08,0.12",
        "--count",
        "12",
        "--out",
        &s(&medium),
        "--truth",
        &s(&truth),
    ]));

    let report = tmp(&dir, "report.json");
    let psd = tmp(&dir, "psd.csv");
    // the rendered medium has bright fibers (255) on black pores
    let out = run(&[
        "pores",
        "--input",
        &s(&medium),
        "--mode",
        "cross",
        "--pitch-mm",
        "0.01",
        "--thickness-mm",
        "0.000001",
        "--fiber",
        "bright",
        "--geotextile",
        "P",
        "--out-report",
        &s(&report),
        "--out-psd",
        &s(&psd),
    ]);
    assert_success(&out);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["mode"], "cross");
    assert_eq!(json["slice_count"], 1);
    // 12 punched disks; morphological border erosion may add one thin
    // canvas-edge segment
    let openings = json["opening_count"].as_u64().unwrap();
    assert!((12..=14).contains(&openings), "openings {openings}");
    let truth_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    let porosity = json["porosity"].as_f64().unwrap();
    let expected = truth_json["porosity_2d"].as_f64().unwrap();
    assert!((porosity - expected).abs() < 0.02);
    // measured O50 close to the known 0.16/0.24 mm diameter mix
    let o50 = json["o50_mm"].as_f64().unwrap();
    assert!((0.14..=0.26).contains(&o50), "O50 {o50}");
    assert_eq!(json["geotextile"]["name"], "P");
    assert_eq!(json["geotextile"]["porosity_pct"], 85.7);

    let psd_text = std::fs::read_to_string(&psd).unwrap();
    assert!(psd_text.starts_with("size_mm,cumulative_fraction"));
    assert_eq!(psd_text.lines().count() as u64, openings + 1);
    let last = psd_text.lines().next_back().unwrap();
    assert!(last.ends_with(",1"), "cumulative ends at 1: {last}");
}

#[test]
fn pores_planar_porosity_report() {
    let dir = tempfile::tempdir().unwrap();
    let medium = tmp(&dir, "planar.pgm");
    assert_success(&run(&[
        "synth", "pores", "--seed", "2", "--width", "200", "--height", "200",
        "--pitch-mm", "0.01", "--count", "8", "--out", &s(&medium),
    ]));
    let report = tmp(&dir, "report.json");
    let out = run(&[
        "pores",
        "--input",
        &s(&medium),
        "--mode",
        "planar",
        "--pitch-mm",
        "0.01",
        "--fiber",
        "bright",
        "--out-report",
        &s(&report),
    ]);
    assert_success(&out);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["mode"], "planar");
    assert!(json["porosity"].as_f64().unwrap() > 0.0);
    assert!(json.get("o50_mm").is_none());
}
