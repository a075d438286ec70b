//! 2D spectral analysis: radix-2 FFT over rows then columns, magnitude
//! spectrum with 1/N normalization and centered DC, and the angular energy
//! distribution that maps spectral direction to fiber-axis angles.

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    #[inline]
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    #[inline]
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// In-place iterative radix-2 forward DFT; `data.len()` must be a power of
/// two. X_k = sum_n x_n exp(-2 pi i n k / N).
pub fn fft_1d(data: &mut [Complex]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    // butterflies
    let mut len = 2;
    while len <= n {
        let ang = -std::f64::consts::TAU / len as f64;
        let wlen = Complex::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[start + k];
                let v = data[start + k + len / 2].mul(w);
                data[start + k] = u.add(v);
                data[start + k + len / 2] = u.sub(v);
                w = w.mul(wlen);
            }
        }
        len <<= 1;
    }
}

/// Magnitude spectrum of an image: square zero-padded to the next power of
/// two, transformed by 1D FFTs over rows then columns, scaled by 1/N, and
/// shifted so DC sits at (size/2, size/2).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    size: usize,
    source_width: usize,
    source_height: usize,
    /// row-major |F(u, v)| with centered DC
    magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Side length N of the (padded) transform.
    pub fn size(&self) -> usize {
        self.size
    }

    /// The 1/N factor applied to every magnitude.
    pub fn normalization(&self) -> f64 {
        1.0 / self.size as f64
    }

    /// Dimensions of the image before padding.
    pub fn source_dims(&self) -> (usize, usize) {
        (self.source_width, self.source_height)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.magnitudes[v * self.size + u]
    }

    /// DC bin position after the shift.
    pub fn dc_index(&self) -> (usize, usize) {
        (self.size / 2, self.size / 2)
    }

    /// Spectral energy sum |F|^2 over all bins.
    pub fn total_energy(&self) -> f64 {
        self.magnitudes.iter().map(|m| m * m).sum()
    }
}

/// Forward 2D transform of a gray image (see [`Spectrum`]).
pub fn fft2(img: &GrayImage) -> Spectrum {
    let n = img.width().max(img.height()).next_power_of_two();
    let mut grid = vec![Complex::default(); n * n];
    for y in 0..img.height() {
        for x in 0..img.width() {
            grid[y * n + x] = Complex::new(img.get(x, y) as f64, 0.0);
        }
    }

    // rows
    for row in grid.chunks_exact_mut(n) {
        fft_1d(row);
    }
    // columns, via a scratch buffer
    let mut col = vec![Complex::default(); n];
    for x in 0..n {
        for y in 0..n {
            col[y] = grid[y * n + x];
        }
        fft_1d(&mut col);
        for y in 0..n {
            grid[y * n + x] = col[y];
        }
    }

    // 1/N magnitude normalization plus the DC-centering shift
    let inv_n = 1.0 / n as f64;
    let half = n / 2;
    let mut magnitudes = vec![0f64; n * n];
    for v in 0..n {
        for u in 0..n {
            let su = (u + half) % n;
            let sv = (v + half) % n;
            magnitudes[sv * n + su] = grid[v * n + u].abs() * inv_n;
        }
    }
    Spectrum {
        size: n,
        source_width: img.width(),
        source_height: img.height(),
        magnitudes,
    }
}

/// Normalized weights over fiber-axis angle classes [k 180/B, (k+1) 180/B).
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationDistribution {
    bins: Vec<f64>,
}

impl OrientationDistribution {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidParameter("need at least two bins".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::NoSignal("all angle weights are zero".into()));
        }
        Ok(Self {
            bins: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_width_deg(&self) -> f64 {
        180.0 / self.bins.len() as f64
    }

    /// Start angle of bin k in degrees.
    pub fn bin_start_deg(&self, k: usize) -> f64 {
        k as f64 * self.bin_width_deg()
    }

    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.bins.iter().enumerate() {
            if w > self.bins[best] {
                best = i;
            }
        }
        best
    }

    /// Bin index covering `angle_deg` (taken mod 180).
    pub fn bin_of(&self, angle_deg: f64) -> usize {
        let a = angle_deg.rem_euclid(180.0);
        ((a / self.bin_width_deg()) as usize).min(self.bins.len() - 1)
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.bins.len(), other.bins.len(), "bin counts must match");
        self.bins
            .iter()
            .zip(&other.bins)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Sums squared spectral magnitudes into angular sectors about DC (the DC
/// bin itself excluded) and rotates by 90 degrees so that bins hold
/// fiber-axis angles: spectral energy concentrates perpendicular to the
/// fiber direction.
pub fn angular_distribution(spec: &Spectrum, bins: usize) -> Result<OrientationDistribution> {
    if bins < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 angle bins, got {bins}"
        )));
    }
    let (cx, cy) = spec.dc_index();
    let bin_width = 180.0 / bins as f64;
    let mut weights = vec![0f64; bins];
    let mut total = 0f64;
    for v in 0..spec.size() {
        for u in 0..spec.size() {
            if (u, v) == (cx, cy) {
                continue;
            }
            let m = spec.get(u, v);
            if m == 0.0 {
                continue;
            }
            let du = u as f64 - cx as f64;
            let dv = v as f64 - cy as f64;
            let spectral_deg = dv.atan2(du).to_degrees();
            let fiber_deg = (spectral_deg + 90.0).rem_euclid(180.0);
            let k = ((fiber_deg / bin_width) as usize).min(bins - 1);
            let e = m * m;
            weights[k] += e;
            total += e;
        }
    }
    if total <= 0.0 {
        return Err(Error::NoSignal("zero spectral energy outside DC".into()));
    }
    OrientationDistribution::from_weights(weights)
}
