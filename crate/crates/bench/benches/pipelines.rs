//! Criterion benchmarks for the hot paths of each pipeline.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use nonwoven_core::defect::{box_count_dimension, extract_features};
use nonwoven_core::histogram::{equalize_histogram, histogram};
use nonwoven_core::orientation::{angular_distribution, fft2, hough_peaks, hough_transform};
use nonwoven_core::pilling::{haar_dwt2, sd_approx, Grid};
use nonwoven_core::pores::{denoise, StructuringElement};
use nonwoven_core::rng::SplitMix64;
use nonwoven_core::skeleton::skeletonize;
use nonwoven_core::synth::{gen_fiber_web, gen_pore_medium, WebSpec};
use nonwoven_core::threshold::{chow_kaneko_threshold, global_threshold, Foreground};
use nonwoven_core::{BinaryImage, GrayImage};

fn random_gray(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    GrayImage::from_pixels(w, h, (0..w * h).map(|_| rng.below(256) as u8).collect()).unwrap()
}

fn web_256(seed: u64) -> GrayImage {
    let spec = WebSpec {
        width: 256,
        height: 256,
        line_count: 120,
        angle_distribution: vec![(20.0, 0.7), (110.0, 0.3)],
        length_range: (40.0, 80.0),
        thickness: 1,
        curvature: 0.0,
        seed,
    };
    gen_fiber_web(&spec).unwrap().0
}

fn bench_fft(c: &mut Criterion) {
    let img = web_256(1);
    c.bench_function("fft2_256", |b| b.iter(|| fft2(black_box(&img))));
    let spec = fft2(&img);
    c.bench_function("angular_distribution_256", |b| {
        b.iter(|| angular_distribution(black_box(&spec), 18).unwrap())
    });
}

fn bench_hough(c: &mut Criterion) {
    let web = web_256(2);
    let bin = global_threshold(&web, 0, Foreground::Above);
    c.bench_function("hough_transform_256", |b| {
        b.iter(|| hough_transform(black_box(&bin), 1.0, 1.0).unwrap())
    });
    let acc = hough_transform(&bin, 1.0, 1.0).unwrap();
    c.bench_function("hough_peaks_256", |b| {
        b.iter(|| hough_peaks(black_box(&acc), 200, (1, 1), 20).unwrap())
    });
}

fn bench_haar(c: &mut Criterion) {
    let mut rng = SplitMix64::new(3);
    let grid = Grid::new(
        512,
        512,
        (0..512 * 512).map(|_| rng.uniform(0.0, 255.0)).collect(),
    )
    .unwrap();
    c.bench_function("haar_dwt2_512", |b| {
        b.iter(|| haar_dwt2(black_box(&grid)).unwrap())
    });
    let img = random_gray(4, 256, 256);
    c.bench_function("sd_approx_level5_256", |b| {
        b.iter(|| sd_approx(black_box(&img), 5).unwrap())
    });
}

fn bench_fractal_and_features(c: &mut Criterion) {
    let mut rng = SplitMix64::new(5);
    let bits: Vec<u8> = (0..256 * 256).map(|_| (rng.next_f64() < 0.3) as u8).collect();
    let bin = BinaryImage::from_bits(256, 256, bits).unwrap();
    c.bench_function("box_count_dimension_256", |b| {
        b.iter(|| box_count_dimension(black_box(&bin)))
    });
    let img = random_gray(6, 200, 200);
    c.bench_function("extract_features_200", |b| {
        b.iter(|| extract_features(black_box(&img)))
    });
}

fn bench_threshold(c: &mut Criterion) {
    let mut rng = SplitMix64::new(7);
    let pixels: Vec<u8> = (0..256 * 256)
        .map(|_| {
            let v = if rng.next_f64() < 0.4 {
                70.0 + 9.0 * rng.normal()
            } else {
                180.0 + 12.0 * rng.normal()
            };
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let img = GrayImage::from_pixels(256, 256, pixels).unwrap();
    c.bench_function("histogram_equalize_256", |b| {
        b.iter(|| equalize_histogram(black_box(&img)))
    });
    let hist = histogram(&img);
    c.bench_function("chow_kaneko_fit", |b| {
        b.iter(|| chow_kaneko_threshold(black_box(&hist)).unwrap())
    });
}

fn bench_morphology(c: &mut Criterion) {
    let (medium, _) = gen_pore_medium(8, 400, 400, 0.01, &[0.08, 0.12], 20).unwrap();
    let se = StructuringElement::square(3).unwrap();
    c.bench_function("denoise_open_close_400", |b| {
        b.iter_batched(
            || medium.clone(),
            |m| denoise(black_box(&m), &se),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("skeletonize_400", |b| {
        b.iter(|| skeletonize(black_box(&medium)))
    });
}

criterion_group!(
    benches,
    bench_fft,
    bench_hough,
    bench_haar,
    bench_fractal_and_features,
    bench_threshold,
    bench_morphology
);
criterion_main!(benches);
