//! Noise-reduction filters used by the scan-preprocessing stages: separable
//! Gaussian smoothing, adaptive Wiener denoising and a 1D median filter for
//! histogram cleanup.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Separable Gaussian convolution with kernel radius ceil(3*sigma) and
/// border replication. Output is rounded and clamped to [0, 255].
pub fn gaussian_filter(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-(i as f64 * i as f64) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }

    let (w, h) = (img.width(), img.height());
    let clamp_x = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clamp_y = |y: isize| y.clamp(0, h as isize - 1) as usize;

    // horizontal pass
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let sx = clamp_x(x as isize + k as isize - radius);
                acc += kw * img.get(sx, y) as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    // vertical pass
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let sy = clamp_y(y as isize + k as isize - radius);
                acc += kw * tmp[sy * w + x];
            }
            out.set(x, y, acc.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// Adaptive local-statistics Wiener denoising.
///
/// For each pixel, local mean and population variance are taken over the
/// `window` x `window` neighborhood clipped to the image. With nu2 the mean
/// of all local variances (the noise-power estimate):
///
/// out = mu + max(0, var - nu2) / max(var, nu2) * (x - mu)
///
/// Constant regions (var = 0 everywhere) pass through unchanged.
pub fn wiener_filter(img: &GrayImage, window: usize) -> Result<GrayImage> {
    if window.is_multiple_of(2) || window < 3 {
        return Err(Error::InvalidParameter(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let r = (window / 2) as isize;

    let mut means = vec![0f64; w * h];
    let mut vars = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            let mut n = 0.0;
            for dy in -r..=r {
                let sy = y as isize + dy;
                if sy < 0 || sy >= h as isize {
                    continue;
                }
                for dx in -r..=r {
                    let sx = x as isize + dx;
                    if sx < 0 || sx >= w as isize {
                        continue;
                    }
                    let v = img.get(sx as usize, sy as usize) as f64;
                    sum += v;
                    sum2 += v * v;
                    n += 1.0;
                }
            }
            let mu = sum / n;
            means[y * w + x] = mu;
            vars[y * w + x] = (sum2 / n - mu * mu).max(0.0);
        }
    }
    let nu2 = vars.iter().sum::<f64>() / vars.len() as f64;

    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            let mu = means[idx];
            let var = vars[idx];
            let denom = var.max(nu2);
            let gain = if denom > 0.0 {
                (var - nu2).max(0.0) / denom
            } else {
                0.0
            };
            let v = mu + gain * (img.get(x, y) as f64 - mu);
            out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// Sliding median over a 1D series; the window is truncated at the borders,
/// so length is preserved.
pub fn median_filter_1d(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) || window < 3 {
        return Err(Error::InvalidParameter(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    if series.is_empty() {
        return Err(Error::InvalidParameter("series must be non-empty".into()));
    }
    let r = window / 2;
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(window);
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r + 1).min(n);
        buf.clear();
        buf.extend_from_slice(&series[lo..hi]);
        buf.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN series"));
        out.push(median_of_sorted(&buf));
    }
    Ok(out)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn gaussian_rejects_bad_sigma() {
        let img = GrayImage::filled(4, 4, 10).unwrap();
        assert!(gaussian_filter(&img, 0.0).is_err());
        assert!(gaussian_filter(&img, -2.0).is_err());
    }

    #[test]
    fn gaussian_keeps_constants() {
        let img = GrayImage::filled(9, 7, 123).unwrap();
        let out = gaussian_filter(&img, 1.5).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn gaussian_impulse_center_matches_kernel_oracle() {
        // direct kernel evaluation: center weight of the normalized 7-tap
        // sigma=1 kernel squared, times 255, rounds to 41
        let mut img = GrayImage::filled(9, 9, 0).unwrap();
        img.set(4, 4, 255);
        let out = gaussian_filter(&img, 1.0).unwrap();

        let radius = 3;
        let taps: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i as f64 * i as f64) / 2.0).exp())
            .collect();
        let sum: f64 = taps.iter().sum();
        let center = taps[radius as usize] / sum;
        let expected = (255.0 * center * center).round() as u8;
        assert_eq!(out.get(4, 4), expected);
        assert_eq!(expected, 41);
    }

    #[test]
    fn gaussian_preserves_mean_approximately() {
        let mut rng = SplitMix64::new(21);
        let pixels: Vec<u8> = (0..32 * 32).map(|_| rng.below(256) as u8).collect();
        let img = GrayImage::from_pixels(32, 32, pixels).unwrap();
        let out = gaussian_filter(&img, 1.0).unwrap();
        assert!((out.mean() - img.mean()).abs() <= 0.5);
    }

    #[test]
    fn wiener_rejects_bad_window() {
        let img = GrayImage::filled(5, 5, 10).unwrap();
        assert!(wiener_filter(&img, 4).is_err());
        assert!(wiener_filter(&img, 1).is_err());
    }

    #[test]
    fn wiener_keeps_constants() {
        let img = GrayImage::filled(6, 6, 200).unwrap();
        assert_eq!(wiener_filter(&img, 3).unwrap(), img);
    }

    #[test]
    fn wiener_matches_sliding_window_oracle() {
        // brute-force recomputation of the definition on a 5x5 image with
        // one outlier pixel
        let mut img = GrayImage::filled(5, 5, 100).unwrap();
        img.set(2, 2, 250);
        let out = wiener_filter(&img, 3).unwrap();

        let w = 5usize;
        let mut vars = Vec::new();
        let mut stats = Vec::new();
        for y in 0..5i64 {
            for x in 0..5i64 {
                let mut vals = Vec::new();
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let (sx, sy) = (x + dx, y + dy);
                        if (0..5).contains(&sx) && (0..5).contains(&sy) {
                            vals.push(img.get(sx as usize, sy as usize) as f64);
                        }
                    }
                }
                let n = vals.len() as f64;
                let mu = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
                vars.push(var);
                stats.push((mu, var));
            }
        }
        let nu2 = vars.iter().sum::<f64>() / vars.len() as f64;
        for y in 0..5usize {
            for x in 0..5usize {
                let (mu, var) = stats[y * w + x];
                let denom = var.max(nu2);
                let gain = if denom > 0.0 { (var - nu2).max(0.0) / denom } else { 0.0 };
                let expected = (mu + gain * (img.get(x, y) as f64 - mu))
                    .round()
                    .clamp(0.0, 255.0) as u8;
                assert_eq!(out.get(x, y), expected, "mismatch at ({x}, {y})");
            }
        }
        // the outlier is pulled toward its local mean
        assert!(out.get(2, 2) < 250);
    }

    #[test]
    fn wiener_reduces_noise_variance() {
        // Monte-Carlo: i.i.d. noise around a flat level over many seeds
        for seed in 0..100u64 {
            let mut rng = SplitMix64::new(seed);
            let pixels: Vec<u8> = (0..24 * 24)
                .map(|_| (128.0 + 30.0 * (rng.next_f64() - 0.5) * 2.0) as u8)
                .collect();
            let img = GrayImage::from_pixels(24, 24, pixels).unwrap();
            let out = wiener_filter(&img, 5).unwrap();
            assert!(
                out.variance() <= img.variance(),
                "seed {seed}: {} > {}",
                out.variance(),
                img.variance()
            );
        }
    }

    #[test]
    fn median_removes_single_spike() {
        let out = median_filter_1d(&[1.0, 1.0, 9.0, 1.0, 1.0], 3).unwrap();
        assert_eq!(out, vec![1.0; 5]);
    }

    #[test]
    fn median_keeps_monotone_interior() {
        let series: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let out = median_filter_1d(&series, 3).unwrap();
        assert_eq!(&out[1..9], &series[1..9]);
    }

    #[test]
    fn median_rejects_even_window() {
        assert!(median_filter_1d(&[1.0, 2.0], 4).is_err());
    }

    #[test]
    fn median_matches_brute_force_oracle() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..50 {
            let n = 5 + rng.below(40) as usize;
            let series: Vec<f64> = (0..n).map(|_| rng.uniform(-10.0, 10.0)).collect();
            let out = median_filter_1d(&series, 5).unwrap();
            for i in 0..n {
                let lo = i.saturating_sub(2);
                let hi = (i + 3).min(n);
                let mut win: Vec<f64> = series[lo..hi].to_vec();
                win.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let m = if win.len() % 2 == 1 {
                    win[win.len() / 2]
                } else {
                    0.5 * (win[win.len() / 2 - 1] + win[win.len() / 2])
                };
                assert_eq!(out[i], m);
            }
        }
    }
}
