//! Binarization: fixed global thresholding and automatic threshold selection
//! by fitting a two-component Gaussian mixture to a bimodal histogram.

use crate::error::{Error, Result};
use crate::histogram::Histogram256;
use crate::image::{BinaryImage, GrayImage};

/// Which side of the threshold becomes foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Foreground {
    /// Pixels strictly greater than the threshold are foreground.
    Above,
    /// Pixels strictly less than the threshold are foreground.
    Below,
}

/// Fixed-threshold binarization. A pixel is foreground iff it lies strictly
/// beyond `t` in the chosen direction.
pub fn global_threshold(img: &GrayImage, t: u8, foreground: Foreground) -> BinaryImage {
    let bits = img
        .pixels()
        .iter()
        .map(|&v| match foreground {
            Foreground::Above => (v > t) as u8,
            Foreground::Below => (v < t) as u8,
        })
        .collect();
    let out = BinaryImage::from_bits(img.width(), img.height(), bits)
        .expect("dimensions come from a valid image");
    match img.pixel_pitch() {
        Some(p) => out.with_pixel_pitch(p).expect("pitch already validated"),
        None => out,
    }
}

/// One fitted Gaussian component of the histogram model
/// a * exp(-(v - mu)^2 / (2 sigma^2)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub amplitude: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Result of the bimodal fit: the two components (low mean first) and the
/// selected threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalFit {
    pub low: GaussianComponent,
    pub high: GaussianComponent,
    pub threshold: u8,
}

/// Selects a threshold for a bimodal histogram by least-squares fitting a
/// sum of two Gaussians and taking their intersection between the means.
///
/// The fit minimizes the squared error between the model and the 256 count
/// values (Levenberg-Marquardt, at most 200 iterations, deterministic
/// initialization from the histogram halves split at the global valley).
/// If the fitted components do not cross between their means, the raw
/// histogram minimum between the means is used instead, taking the midpoint
/// of a flat valley.
pub fn chow_kaneko_threshold(hist: &Histogram256) -> Result<u8> {
    Ok(chow_kaneko_fit(hist)?.threshold)
}

/// Same as [`chow_kaneko_threshold`] but exposes the fitted components.
pub fn chow_kaneko_fit(hist: &Histogram256) -> Result<BimodalFit> {
    if hist.total() == 0 {
        return Err(Error::InvalidParameter("histogram total is zero".into()));
    }
    if hist.occupied_levels() <= 1 {
        return Err(Error::NotBimodal);
    }

    let counts: Vec<f64> = hist.counts().iter().map(|&c| c as f64).collect();
    let smoothed = moving_average(&counts, 5);

    let split = global_valley(&smoothed);
    let (mut lo, mut hi) = match split.and_then(|s| init_halves(&counts, s)) {
        Some(pair) => pair,
        None => return Err(Error::NotBimodal),
    };

    let mut params = [lo.amplitude, lo.mean, lo.sd, hi.amplitude, hi.mean, hi.sd];
    levenberg_marquardt(&counts, &mut params);
    lo = GaussianComponent {
        amplitude: params[0],
        mean: params[1],
        sd: params[2],
    };
    hi = GaussianComponent {
        amplitude: params[3],
        mean: params[4],
        sd: params[5],
    };
    if lo.mean > hi.mean {
        std::mem::swap(&mut lo, &mut hi);
    }

    // degenerate fit: overlapping components and no dip between them
    let sep = hi.mean - lo.mean;
    if sep < 2.0 * lo.sd.max(hi.sd) && !has_interior_valley(&smoothed, lo.mean, hi.mean) {
        return Err(Error::NotBimodal);
    }

    let threshold = match intersection_between(&lo, &hi) {
        Some(v) => v.round().clamp(0.0, 255.0) as u8,
        None => valley_between(&counts, lo.mean, hi.mean),
    };
    Ok(BimodalFit {
        low: lo,
        high: hi,
        threshold,
    })
}

/// Centered moving average with window truncation at the borders. Gentler
/// than a median filter for mode finding: isolated spikes stay visible.
fn moving_average(s: &[f64], window: usize) -> Vec<f64> {
    let r = window / 2;
    let n = s.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(n);
            s[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Position of the deepest valley separating the two dominant modes of the
/// smoothed histogram, or None when no second mode exists.
fn global_valley(s: &[f64]) -> Option<usize> {
    let p1 = argmax(s);
    // a second mode must be separated from the first by a material dip
    // below both, so Poisson wiggles next to the main peak do not qualify
    let mut best: Option<usize> = None;
    for v in 0..s.len() {
        if v == p1 || s[v] <= 0.0 {
            continue;
        }
        let (a, b) = if v < p1 { (v, p1) } else { (p1, v) };
        if b - a < 2 {
            continue;
        }
        let dip = s[a + 1..b].iter().cloned().fold(f64::INFINITY, f64::min);
        if dip < 0.9 * s[v].min(s[p1]) && best.is_none_or(|bst| s[v] > s[bst]) {
            best = Some(v);
        }
    }
    let p2 = best?;
    let (a, b) = if p2 < p1 { (p2, p1) } else { (p1, p2) };
    // midpoint of the minimizing run inside the valley
    let dip = s[a + 1..b].iter().cloned().fold(f64::INFINITY, f64::min);
    let run: Vec<usize> = (a + 1..b).filter(|&v| s[v] == dip).collect();
    Some(run[run.len() / 2])
}

fn argmax(s: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in s.iter().enumerate() {
        if v > s[best] {
            best = i;
        }
    }
    best
}

/// Moment-based component estimates for the counts on each side of `split`.
fn init_halves(counts: &[f64], split: usize) -> Option<(GaussianComponent, GaussianComponent)> {
    let est = |range: std::ops::Range<usize>| -> Option<GaussianComponent> {
        let w: f64 = range.clone().map(|v| counts[v]).sum();
        if w <= 0.0 {
            return None;
        }
        let mean = range.clone().map(|v| v as f64 * counts[v]).sum::<f64>() / w;
        let var = range
            .clone()
            .map(|v| counts[v] * (v as f64 - mean) * (v as f64 - mean))
            .sum::<f64>()
            / w;
        let sd = var.sqrt().max(0.5);
        Some(GaussianComponent {
            amplitude: w / (sd * (2.0 * std::f64::consts::PI).sqrt()),
            mean,
            sd,
        })
    };
    Some((est(0..split + 1)?, est(split + 1..counts.len())?))
}

fn model(params: &[f64; 6], v: f64) -> f64 {
    let g = |a: f64, mu: f64, sd: f64| a * (-(v - mu) * (v - mu) / (2.0 * sd * sd)).exp();
    g(params[0], params[1], params[2]) + g(params[3], params[4], params[5])
}

fn sse(counts: &[f64], params: &[f64; 6]) -> f64 {
    counts
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            let r = model(params, v as f64) - c;
            r * r
        })
        .sum()
}

/// Damped Gauss-Newton minimization of the mixture-vs-histogram squared
/// error; 200 iterations maximum, deterministic.
fn levenberg_marquardt(counts: &[f64], params: &mut [f64; 6]) {
    let n = counts.len();
    let mut lambda = 1e-3;
    let mut current = sse(counts, params);

    for _ in 0..200 {
        // assemble J^T J and J^T r for the 6 parameters
        let mut jtj = [[0f64; 6]; 6];
        let mut jtr = [0f64; 6];
        for v in 0..n {
            let x = v as f64;
            let mut jac = [0f64; 6];
            for comp in 0..2 {
                let (a, mu, sd) = (params[comp * 3], params[comp * 3 + 1], params[comp * 3 + 2]);
                let d = x - mu;
                let e = (-d * d / (2.0 * sd * sd)).exp();
                jac[comp * 3] = e;
                jac[comp * 3 + 1] = a * e * d / (sd * sd);
                jac[comp * 3 + 2] = a * e * d * d / (sd * sd * sd);
            }
            let r = model(params, x) - counts[v];
            for i in 0..6 {
                jtr[i] += jac[i] * r;
                for j in 0..6 {
                    jtj[i][j] += jac[i] * jac[j];
                }
            }
        }

        // damped normal equations; retry with more damping on a bad step
        let mut accepted = false;
        for _ in 0..10 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let rhs: Vec<f64> = jtr.iter().map(|&x| -x).collect();
            let Some(delta) = solve_linear(&mut a, &rhs) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = *params;
            for i in 0..6 {
                trial[i] += delta[i];
            }
            trial[0] = trial[0].max(0.0);
            trial[3] = trial[3].max(0.0);
            trial[1] = trial[1].clamp(0.0, 255.0);
            trial[4] = trial[4].clamp(0.0, 255.0);
            trial[2] = trial[2].max(0.5);
            trial[5] = trial[5].max(0.5);

            let next = sse(counts, &trial);
            if next.is_finite() && next < current {
                let rel = (current - next) / current.max(1e-300);
                *params = trial;
                current = next;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel < 1e-12 {
                    return;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            return;
        }
    }
}

/// Gaussian elimination with partial pivoting for the small normal system.
fn solve_linear(a: &mut [[f64; 6]; 6], rhs: &[f64]) -> Option<[f64; 6]> {
    let mut b = [0f64; 6];
    b.copy_from_slice(rhs);
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite pivots")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0f64; 6];
    for col in (0..6).rev() {
        let mut acc = b[col];
        for k in col + 1..6 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Solves for the density crossing of the two components inside the open
/// interval between their means.
fn intersection_between(lo: &GaussianComponent, hi: &GaussianComponent) -> Option<f64> {
    if lo.amplitude <= 0.0 || hi.amplitude <= 0.0 {
        return None;
    }
    let (a1, m1, s1) = (lo.amplitude, lo.mean, lo.sd);
    let (a2, m2, s2) = (hi.amplitude, hi.mean, hi.sd);
    // ln a1 - (v-m1)^2/(2 s1^2) = ln a2 - (v-m2)^2/(2 s2^2)
    let qa = 1.0 / (2.0 * s2 * s2) - 1.0 / (2.0 * s1 * s1);
    let qb = m1 / (s1 * s1) - m2 / (s2 * s2);
    let qc = m2 * m2 / (2.0 * s2 * s2) - m1 * m1 / (2.0 * s1 * s1) + (a1 / a2).ln();

    let mut roots = Vec::new();
    if qa.abs() < 1e-12 {
        if qb.abs() > 1e-300 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-qb + sq) / (2.0 * qa));
            roots.push((-qb - sq) / (2.0 * qa));
        }
    }
    let mut inside: Vec<f64> = roots.into_iter().filter(|&v| v > m1 && v < m2).collect();
    inside.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    match inside.len() {
        1 => Some(inside[0]),
        _ => None,
    }
}

/// A valley counts only when it dips materially (10%) below both sides,
/// so Poisson noise on a flat-topped unimodal histogram does not pass.
fn has_interior_valley(s: &[f64], m1: f64, m2: f64) -> bool {
    let a = (m1.round().clamp(0.0, 255.0)) as usize;
    let b = (m2.round().clamp(0.0, 255.0)) as usize;
    if b <= a + 1 {
        return false;
    }
    let dip = s[a + 1..b].iter().cloned().fold(f64::INFINITY, f64::min);
    dip < 0.9 * s[a].min(s[b])
}

/// Raw-count minimum between the means; a flat valley resolves to its
/// midpoint.
fn valley_between(counts: &[f64], m1: f64, m2: f64) -> u8 {
    let a = (m1.round().clamp(0.0, 255.0)) as usize;
    let b = (m2.round().clamp(0.0, 255.0)) as usize;
    if b <= a + 1 {
        return ((a + b) / 2) as u8;
    }
    let dip = counts[a + 1..b].iter().cloned().fold(f64::INFINITY, f64::min);
    let run: Vec<usize> = (a + 1..b).filter(|&v| counts[v] == dip).collect();
    run[run.len() / 2] as u8
}
