//! Defect detection and classification: 128x128 patch normalization, gray
//! statistics, white-pixel density, box-counting fractal dimension, and a
//! from-scratch backpropagation MLP over the five features with one-hot
//! class codes.

use crate::error::{Error, Result};
use crate::histogram::histogram;
use crate::image::{BinaryImage, GrayImage};
use crate::rng::SplitMix64;
use crate::threshold::{chow_kaneko_threshold, global_threshold, Foreground};

/// Side length every patch is resampled to before feature extraction.
pub const PATCH_SIDE: usize = 128;

/// The four web-defect classes and their one-hot codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectClass {
    NonDefect,
    ThickSpot,
    ThinSpot,
    Neps,
}

impl DefectClass {
    pub const ALL: [DefectClass; 4] = [
        DefectClass::NonDefect,
        DefectClass::ThickSpot,
        DefectClass::ThinSpot,
        DefectClass::Neps,
    ];

    pub fn index(self) -> usize {
        match self {
            DefectClass::NonDefect => 0,
            DefectClass::ThickSpot => 1,
            DefectClass::ThinSpot => 2,
            DefectClass::Neps => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// One-hot class code.
    pub fn code(self) -> &'static str {
        match self {
            DefectClass::NonDefect => "1000",
            DefectClass::ThickSpot => "0100",
            DefectClass::ThinSpot => "0010",
            DefectClass::Neps => "0001",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DefectClass::NonDefect => "non-defect",
            DefectClass::ThickSpot => "thick-spot",
            DefectClass::ThinSpot => "thin-spot",
            DefectClass::Neps => "neps",
        }
    }
}

/// The five patch features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub mean_gray: f64,
    pub variance_gray: f64,
    pub std_gray: f64,
    /// white-pixel percentage after thresholding, 0-100
    pub density_pct: f64,
    pub fractal_dim: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.mean_gray,
            self.variance_gray,
            self.std_gray,
            self.density_pct,
            self.fractal_dim,
        ]
    }
}

/// Nearest-neighbor resample to exactly 128x128:
/// out(x, y) = src(floor(x w / 128), floor(y h / 128)).
pub fn normalize_patch(img: &GrayImage) -> GrayImage {
    if (img.width(), img.height()) == (PATCH_SIDE, PATCH_SIDE) {
        return img.clone();
    }
    let mut pixels = Vec::with_capacity(PATCH_SIDE * PATCH_SIDE);
    for y in 0..PATCH_SIDE {
        let sy = y * img.height() / PATCH_SIDE;
        for x in 0..PATCH_SIDE {
            let sx = x * img.width() / PATCH_SIDE;
            pixels.push(img.get(sx, sy));
        }
    }
    GrayImage::from_pixels(PATCH_SIDE, PATCH_SIDE, pixels).expect("fixed valid dimensions")
}

/// Occupied-box counts per box size for a binary mask.
///
/// The mask is nearest-neighbor resampled to the largest power-of-two
/// square not exceeding its smaller side, and occupied boxes are counted
/// at sizes side, side/2, ..., 2. Empty foreground gives an empty curve.
pub fn box_count_scaling(bin: &BinaryImage) -> Vec<(usize, usize)> {
    if bin.count_foreground() == 0 {
        return Vec::new();
    }
    let side = prev_power_of_two(bin.width().min(bin.height()));
    if side < 2 {
        return Vec::new();
    }
    let resampled = if (bin.width(), bin.height()) == (side, side) {
        bin.clone()
    } else {
        let mut bits = Vec::with_capacity(side * side);
        for y in 0..side {
            let sy = y * bin.height() / side;
            for x in 0..side {
                let sx = x * bin.width() / side;
                bits.push(bin.get(sx, sy));
            }
        }
        BinaryImage::from_bits(side, side, bits).expect("fixed valid dimensions")
    };
    if resampled.count_foreground() == 0 {
        return Vec::new();
    }

    let mut curve = Vec::new();
    let mut s = side;
    while s >= 2 {
        let boxes_per_side = side / s;
        let mut count = 0usize;
        for by in 0..boxes_per_side {
            for bx in 0..boxes_per_side {
                'scan: for y in by * s..(by + 1) * s {
                    for x in bx * s..(bx + 1) * s {
                        if resampled.get(x, y) == 1 {
                            count += 1;
                            break 'scan;
                        }
                    }
                }
            }
        }
        curve.push((s, count.max(1)));
        s /= 2;
    }
    curve
}

/// Box-counting fractal dimension: the least-squares slope of ln(count)
/// against ln(1/size) over the scaling curve. An empty foreground returns
/// 0 by convention.
pub fn box_count_dimension(bin: &BinaryImage) -> f64 {
    let curve = box_count_scaling(bin);
    if curve.is_empty() {
        return 0.0;
    }
    let points: Vec<(f64, f64)> = curve
        .iter()
        .map(|&(s, count)| ((1.0 / s as f64).ln(), (count as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

/// Full feature extraction: normalize to 128x128, gray statistics,
/// histogram-derived threshold (two-Gaussian fit when the histogram is
/// bimodal, mean gray otherwise), white density, and the fractal dimension
/// of the thresholded mask (0 when the mask is empty).
pub fn extract_features(img: &GrayImage) -> FeatureVector {
    let patch = normalize_patch(img);
    let mean_gray = patch.mean();
    let variance_gray = patch.variance();
    let std_gray = variance_gray.sqrt();

    let threshold = chow_kaneko_threshold(&histogram(&patch))
        .unwrap_or_else(|_| mean_gray.round().clamp(0.0, 255.0) as u8);
    let mask = global_threshold(&patch, threshold, Foreground::Above);
    let white = mask.count_foreground();
    let density_pct = 100.0 * white as f64 / (PATCH_SIDE * PATCH_SIDE) as f64;
    let fractal_dim = if white == 0 {
        0.0
    } else {
        box_count_dimension(&mask)
    };

    FeatureVector {
        mean_gray,
        variance_gray,
        std_gray,
        density_pct,
        fractal_dim,
    }
}

/// Reference feature rows for the four classes (mean, variance, std,
/// density %, fractal dimension; the non-defect row has no fractal value
/// because its density is zero). Used as canonical per-class centroids for
/// synthetic training data.
pub fn reference_class_features() -> [(DefectClass, FeatureVector); 4] {
    [
        (
            DefectClass::NonDefect,
            FeatureVector {
                mean_gray: 81.04,
                variance_gray: 48.28,
                std_gray: 6.95,
                density_pct: 0.0,
                fractal_dim: 0.0,
            },
        ),
        (
            DefectClass::ThickSpot,
            FeatureVector {
                mean_gray: 89.45,
                variance_gray: 92.92,
                std_gray: 9.64,
                density_pct: 25.18,
                fractal_dim: 1.6812,
            },
        ),
        (
            DefectClass::ThinSpot,
            FeatureVector {
                mean_gray: 67.16,
                variance_gray: 75.51,
                std_gray: 8.69,
                density_pct: 42.11,
                fractal_dim: 1.8266,
            },
        ),
        (
            DefectClass::Neps,
            FeatureVector {
                mean_gray: 84.65,
                variance_gray: 60.84,
                std_gray: 7.79,
                density_pct: 0.23,
                fractal_dim: 0.4101,
            },
        ),
    ]
}

/// Sigmoid MLP with stored feature standardization, trained by full-batch
/// gradient descent on MSE against one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    /// layer widths, input through output
    sizes: Vec<usize>,
    /// per layer: row-major (output x input) weights
    weights: Vec<Vec<f64>>,
    /// per layer: one bias per output neuron
    biases: Vec<Vec<f64>>,
    feature_mean: [f64; 5],
    feature_scale: [f64; 5],
    seed: u64,
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    /// full-batch MSE at the start of each epoch
    pub mse_curve: Vec<f64>,
    pub final_mse: f64,
}

/// Bare network without feature standardization; the shared engine for
/// [`mlp_train`] and for toy problems with other input/output widths.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawNetwork {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl RawNetwork {
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.uniform(-bound, bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
        }
    }

    /// Activations of every layer, input included.
    pub fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        for (layer, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let fan_in = self.sizes[layer];
            let fan_out = self.sizes[layer + 1];
            let prev = &acts[layer];
            let mut out = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let mut z = b[o];
                for i in 0..fan_in {
                    z += w[o * fan_in + i] * prev[i];
                }
                out.push(sigmoid(z));
            }
            acts.push(out);
        }
        acts
    }

    /// One full-batch gradient step; returns the batch MSE measured before
    /// the update.
    pub fn train_epoch(&mut self, inputs: &[Vec<f64>], targets: &[Vec<f64>], lr: f64) -> f64 {
        let n = inputs.len();
        let layers = self.weights.len();
        let mut grad_w: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut grad_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut sse = 0.0;
        let out_dim = *self.sizes.last().expect("network has layers");

        for (x, t) in inputs.iter().zip(targets) {
            let acts = self.forward(x);
            let y = &acts[layers];
            sse += y
                .iter()
                .zip(t)
                .map(|(yi, ti)| (yi - ti) * (yi - ti))
                .sum::<f64>();

            // backpropagation with sigmoid derivatives
            let mut delta: Vec<f64> = y
                .iter()
                .zip(t)
                .map(|(yi, ti)| (yi - ti) * yi * (1.0 - yi))
                .collect();
            for layer in (0..layers).rev() {
                let fan_in = self.sizes[layer];
                let prev = &acts[layer];
                for (o, d) in delta.iter().enumerate() {
                    grad_b[layer][o] += d;
                    for i in 0..fan_in {
                        grad_w[layer][o * fan_in + i] += d * prev[i];
                    }
                }
                if layer > 0 {
                    let mut next_delta = vec![0.0; fan_in];
                    for (i, nd) in next_delta.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (o, d) in delta.iter().enumerate() {
                            acc += self.weights[layer][o * fan_in + i] * d;
                        }
                        let a = acts[layer][i];
                        *nd = acc * a * (1.0 - a);
                    }
                    delta = next_delta;
                }
            }
        }

        let scale = lr; // classic batch-sum gradient
        for layer in 0..layers {
            for (w, g) in self.weights[layer].iter_mut().zip(&grad_w[layer]) {
                *w -= scale * g;
            }
            for (b, g) in self.biases[layer].iter_mut().zip(&grad_b[layer]) {
                *b -= scale * g;
            }
        }
        sse / (n * out_dim) as f64
    }
}

/// Trains the defect classifier.
///
/// Features are z-scored per dimension from the training data (parameters
/// stored in the network); the loss is MSE against the one-hot class
/// codes. Deterministic for a fixed seed.
pub fn mlp_train(
    data: &[(FeatureVector, DefectClass)],
    hidden: &[usize],
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<(MlpNetwork, TrainReport)> {
    if !(lr > 0.0) {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }
    if epochs == 0 {
        return Err(Error::InvalidParameter("need at least one epoch".into()));
    }
    if hidden.contains(&0) {
        return Err(Error::InvalidParameter("hidden layers must be non-empty".into()));
    }
    for class in DefectClass::ALL {
        if !data.iter().any(|(_, c)| *c == class) {
            return Err(Error::IncompleteDataset(class.name().into()));
        }
    }

    // z-score parameters from the training set
    let n = data.len() as f64;
    let mut mean = [0f64; 5];
    for (f, _) in data {
        for (m, v) in mean.iter_mut().zip(f.as_array()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut scale = [0f64; 5];
    for (f, _) in data {
        for (s, (v, m)) in scale.iter_mut().zip(f.as_array().into_iter().zip(mean)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scale {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0; // constant feature: leave it centered
        }
    }

    let inputs: Vec<Vec<f64>> = data
        .iter()
        .map(|(f, _)| {
            f.as_array()
                .into_iter()
                .zip(mean.iter().zip(&scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();
    let targets: Vec<Vec<f64>> = data
        .iter()
        .map(|(_, c)| {
            let mut t = vec![0.0; 4];
            t[c.index()] = 1.0;
            t
        })
        .collect();

    let mut sizes = vec![5usize];
    sizes.extend_from_slice(hidden);
    sizes.push(4);
    let mut raw = RawNetwork::new(&sizes, seed);

    let mut mse_curve = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mse = raw.train_epoch(&inputs, &targets, lr);
        if !mse.is_finite() {
            return Err(Error::DivergenceError(epoch));
        }
        mse_curve.push(mse);
    }
    let final_mse = *mse_curve.last().expect("at least one epoch");

    Ok((
        MlpNetwork {
            sizes: raw.sizes,
            weights: raw.weights,
            biases: raw.biases,
            feature_mean: mean,
            feature_scale: scale,
            seed,
        },
        TrainReport {
            epochs,
            mse_curve,
            final_mse,
        },
    ))
}

impl MlpNetwork {
    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Raw sigmoid outputs for a feature vector.
    pub fn confidences(&self, f: &FeatureVector) -> [f64; 4] {
        let input: Vec<f64> = f
            .as_array()
            .into_iter()
            .zip(self.feature_mean.iter().zip(&self.feature_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        let raw = RawNetwork {
            sizes: self.sizes.clone(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        };
        let acts = raw.forward(&input);
        let out = acts.last().expect("network has an output layer");
        [out[0], out[1], out[2], out[3]]
    }

    /// Line-oriented text record: layer sizes, z-score parameters, then
    /// per-layer row-major weights and biases.
    pub fn to_record(&self) -> String {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        out.push_str(&format!(
            "layers {}\n",
            self.sizes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ));
        out.push_str(&format!("mean {}\n", join(&self.feature_mean)));
        out.push_str(&format!("scale {}\n", join(&self.feature_scale)));
        out.push_str(&format!("seed {}\n", self.seed));
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push_str(&format!("weights {}\n", join(w)));
            out.push_str(&format!("biases {}\n", join(b)));
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::ParseError(format!("network record: {what}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse_vec = |line: &str, tag: &str| -> Result<Vec<f64>> {
            let rest = line
                .strip_prefix(tag)
                .ok_or_else(|| bad(&format!("expected {tag} line, got {line:?}")))?;
            rest.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect()
        };

        let sizes_line = lines.next().ok_or_else(|| bad("missing layers"))?;
        let sizes: Vec<usize> = sizes_line
            .strip_prefix("layers")
            .ok_or_else(|| bad("expected layers line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes[0] != 5 || *sizes.last().unwrap() != 4 {
            return Err(bad("layer sizes must run from 5 inputs to 4 outputs"));
        }

        let mean_v = parse_vec(lines.next().ok_or_else(|| bad("missing mean"))?, "mean")?;
        let scale_v = parse_vec(lines.next().ok_or_else(|| bad("missing scale"))?, "scale")?;
        if mean_v.len() != 5 || scale_v.len() != 5 {
            return Err(bad("z-score parameters must have 5 entries"));
        }
        let seed: u64 = lines
            .next()
            .and_then(|l| l.strip_prefix("seed"))
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| bad("missing seed"))?;

        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let w = parse_vec(lines.next().ok_or_else(|| bad("missing weights"))?, "weights")?;
            let b = parse_vec(lines.next().ok_or_else(|| bad("missing biases"))?, "biases")?;
            if w.len() != pair[0] * pair[1] || b.len() != pair[1] {
                return Err(bad("weight block does not match layer sizes"));
            }
            weights.push(w);
            biases.push(b);
        }

        let mut feature_mean = [0f64; 5];
        feature_mean.copy_from_slice(&mean_v);
        let mut feature_scale = [0f64; 5];
        feature_scale.copy_from_slice(&scale_v);
        Ok(Self {
            sizes,
            weights,
            biases,
            feature_mean,
            feature_scale,
            seed,
        })
    }
}

/// Argmax classification; ties resolve to the lowest class index.
pub fn mlp_classify(net: &MlpNetwork, f: &FeatureVector) -> (DefectClass, &'static str, [f64; 4]) {
    let confidences = net.confidences(f);
    let mut best = 0;
    for (i, &c) in confidences.iter().enumerate() {
        if c > confidences[best] {
            best = i;
        }
    }
    let class = DefectClass::from_index(best).expect("index within 0..4");
    (class, class.code(), confidences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_defect_web, DefectKind};

    #[test]
    fn normalize_identity_at_native_size() {
        let img = GrayImage::filled(128, 128, 9).unwrap();
        assert_eq!(normalize_patch(&img), img);
    }

    #[test]
    fn normalize_integer_downscale_picks_even_pixels() {
        let mut rng = SplitMix64::new(2);
        let pixels: Vec<u8> = (0..256 * 256).map(|_| rng.below(256) as u8).collect();
        let img = GrayImage::from_pixels(256, 256, pixels).unwrap();
        let out = normalize_patch(&img);
        for y in 0..128 {
            for x in 0..128 {
                assert_eq!(out.get(x, y), img.get(2 * x, 2 * y));
            }
        }
    }

    #[test]
    fn normalize_rectangular_input() {
        let mut rng = SplitMix64::new(3);
        let pixels: Vec<u8> = (0..100 * 300).map(|_| rng.below(256) as u8).collect();
        let img = GrayImage::from_pixels(100, 300, pixels).unwrap();
        let out = normalize_patch(&img);
        assert_eq!((out.width(), out.height()), (128, 128));
        assert_eq!(out.get(0, 0), img.get(0, 0));
        // floor mapping: last output row/col read from floor(127 * src / 128)
        assert_eq!(out.get(127, 127), img.get(127 * 100 / 128, 127 * 300 / 128));
    }

    #[test]
    fn fractal_full_square_is_two() {
        let bin = BinaryImage::filled(256, 256, 1).unwrap();
        let d = box_count_dimension(&bin);
        assert!((d - 2.0).abs() <= 0.05, "dimension {d}");
    }

    #[test]
    fn fractal_straight_line_is_one() {
        let mut bin = BinaryImage::filled(256, 256, 0).unwrap();
        for x in 0..256 {
            bin.set(x, 100, 1);
        }
        let d = box_count_dimension(&bin);
        assert!((d - 1.0).abs() <= 0.1, "dimension {d}");
    }

    #[test]
    fn fractal_empty_is_zero_by_convention() {
        let bin = BinaryImage::filled(64, 64, 0).unwrap();
        assert_eq!(box_count_dimension(&bin), 0.0);
        assert!(box_count_scaling(&bin).is_empty());
    }

    #[test]
    fn scaling_curve_of_full_square_is_exact() {
        let bin = BinaryImage::filled(64, 64, 1).unwrap();
        let curve = box_count_scaling(&bin);
        // every box is occupied: count = (side / s)^2
        assert_eq!(
            curve,
            vec![(64, 1), (32, 4), (16, 16), (8, 64), (4, 256), (2, 1024)]
        );
    }

    #[test]
    fn fractal_sierpinski_carpet() {
        // depth-6 carpet on its native 729 grid; the estimator resamples
        // down to 512. Analytic dimension log 8 / log 3.
        let side = 729usize;
        let mut bits = vec![0u8; side * side];
        for y in 0..side {
            for x in 0..side {
                let (mut a, mut b) = (x, y);
                let mut solid = true;
                while a > 0 || b > 0 {
                    if a % 3 == 1 && b % 3 == 1 {
                        solid = false;
                        break;
                    }
                    a /= 3;
                    b /= 3;
                }
                bits[y * side + x] = solid as u8;
            }
        }
        let bin = BinaryImage::from_bits(side, side, bits).unwrap();
        let d = box_count_dimension(&bin);
        let analytic = (8f64).ln() / (3f64).ln();
        assert!((d - analytic).abs() <= 0.05, "dimension {d} vs {analytic}");
    }

    #[test]
    fn fractal_invariant_under_rotation_and_translation() {
        let mut bin = BinaryImage::filled(128, 128, 0).unwrap();
        for t in 0..300 {
            let x = 20 + (t % 60);
            let y = 20 + (t * 7 % 60);
            bin.set(x, y, 1);
        }
        let d0 = box_count_dimension(&bin);

        let mut rotated = BinaryImage::filled(128, 128, 0).unwrap();
        for y in 0..128 {
            for x in 0..128 {
                rotated.set(127 - y, x, bin.get(x, y));
            }
        }
        let d90 = box_count_dimension(&rotated);
        assert!((d0 - d90).abs() <= 0.02, "{d0} vs {d90}");

        let mut shifted = BinaryImage::filled(128, 128, 0).unwrap();
        for y in 0..128 {
            for x in 0..128 {
                if bin.get(x, y) == 1 {
                    shifted.set(x + 30, y + 20, 1);
                }
            }
        }
        let dt = box_count_dimension(&shifted);
        assert!((d0 - dt).abs() <= 0.02, "{d0} vs {dt}");
    }

    #[test]
    fn constant_black_features() {
        let img = GrayImage::filled(50, 70, 0).unwrap();
        let f = extract_features(&img);
        assert_eq!(f.mean_gray, 0.0);
        assert_eq!(f.variance_gray, 0.0);
        assert_eq!(f.density_pct, 0.0);
        assert_eq!(f.fractal_dim, 0.0);
    }

    #[test]
    fn thin_spot_mean_below_non_defect() {
        for seed in 0..3 {
            let thin = extract_features(&gen_defect_web(DefectKind::ThinSpot, seed, 200, 200).unwrap());
            let plain =
                extract_features(&gen_defect_web(DefectKind::NonDefect, seed, 200, 200).unwrap());
            assert!(thin.mean_gray < plain.mean_gray, "seed {seed}");
        }
    }

    #[test]
    fn reference_rows_pinned() {
        let rows = reference_class_features();
        let thick = rows[1].1;
        assert_eq!(
            (thick.mean_gray, thick.variance_gray, thick.std_gray),
            (89.45, 92.92, 9.64)
        );
        assert_eq!((thick.density_pct, thick.fractal_dim), (25.18, 1.6812));
        assert_eq!(rows[0].1.fractal_dim, 0.0); // blank entry: density 0
        assert_eq!(rows[3].1.density_pct, 0.23);
    }

    #[test]
    fn extracted_features_satisfy_std_invariant() {
        let img = gen_defect_web(DefectKind::ThickSpot, 1, 150, 150).unwrap();
        let f = extract_features(&img);
        assert!((f.std_gray * f.std_gray - f.variance_gray).abs() < 1e-6);
        assert!((0.0..=100.0).contains(&f.density_pct));
        assert!((0.0..=2.0).contains(&f.fractal_dim));
    }

    #[test]
    fn xor_learns_with_padded_classes() {
        // 2 inputs padded to 5, two one-hot classes padded to 4 outputs
        for seed in 0..5u64 {
            let inputs: Vec<Vec<f64>> = vec![
                vec![0.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0, 0.0],
            ];
            let targets: Vec<Vec<f64>> = vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
            ];
            let mut net = RawNetwork::new(&[5, 4, 4], seed);
            let mut last = f64::INFINITY;
            for _ in 0..5000 {
                last = net.train_epoch(&inputs, &targets, 0.5);
            }
            assert!(last < 0.05, "seed {seed}: final mse {last}");
        }
    }

    #[test]
    fn training_requires_all_classes() {
        let rows = reference_class_features();
        let data: Vec<(FeatureVector, DefectClass)> =
            rows[..3].iter().map(|&(c, f)| (f, c)).collect();
        assert_eq!(
            mlp_train(&data, &[4], 0.1, 10, 0).unwrap_err(),
            Error::IncompleteDataset("neps".into())
        );
    }

    #[test]
    fn single_epoch_curve_length() {
        let data: Vec<(FeatureVector, DefectClass)> = reference_class_features()
            .iter()
            .map(|&(c, f)| (f, c))
            .collect();
        let (_, report) = mlp_train(&data, &[4], 0.1, 1, 0).unwrap();
        assert_eq!(report.mse_curve.len(), 1);
        assert_eq!(report.final_mse, report.mse_curve[0]);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data: Vec<(FeatureVector, DefectClass)> = reference_class_features()
            .iter()
            .map(|&(c, f)| (f, c))
            .collect();
        let (n1, r1) = mlp_train(&data, &[6, 4], 0.1, 50, 7).unwrap();
        let (n2, r2) = mlp_train(&data, &[6, 4], 0.1, 50, 7).unwrap();
        assert_eq!(n1, n2);
        assert_eq!(r1.mse_curve, r2.mse_curve);
    }

    #[test]
    fn classify_argmax_and_tiebreak() {
        // direct argmax semantics on raw confidence vectors
        let pick = |c: [f64; 4]| {
            let mut best = 0;
            for (i, &v) in c.iter().enumerate() {
                if v > c[best] {
                    best = i;
                }
            }
            DefectClass::from_index(best).unwrap()
        };
        assert_eq!(pick([0.9, 0.1, 0.1, 0.1]), DefectClass::NonDefect);
        assert_eq!(pick([0.2, 0.2, 0.7, 0.1]), DefectClass::ThinSpot);
        // exact tie keeps the lowest index
        assert_eq!(pick([0.5, 0.5, 0.1, 0.1]), DefectClass::NonDefect);
    }

    #[test]
    fn classify_is_monotone_invariant() {
        // argmax must not care about strictly monotone views of the outputs
        let data: Vec<(FeatureVector, DefectClass)> = reference_class_features()
            .iter()
            .map(|&(c, f)| (f, c))
            .collect();
        let (net, _) = mlp_train(&data, &[6], 0.3, 400, 1).unwrap();
        for (f, _) in &data {
            let conf = net.confidences(f);
            let argmax = |v: &[f64]| {
                let mut b = 0;
                for (i, &x) in v.iter().enumerate() {
                    if x > v[b] {
                        b = i;
                    }
                }
                b
            };
            let logits: Vec<f64> = conf.iter().map(|&p| (p / (1.0 - p)).ln()).collect();
            assert_eq!(argmax(&conf), argmax(&logits));
        }
    }

    #[test]
    fn network_record_round_trips() {
        let data: Vec<(FeatureVector, DefectClass)> = reference_class_features()
            .iter()
            .map(|&(c, f)| (f, c))
            .collect();
        let (net, _) = mlp_train(&data, &[8, 6], 0.1, 20, 3).unwrap();
        let text = net.to_record();
        let back = MlpNetwork::from_record(&text).unwrap();
        assert_eq!(back, net);
        // loaded network classifies identically
        for (f, _) in &data {
            assert_eq!(mlp_classify(&back, f).0, mlp_classify(&net, f).0);
        }
    }

    #[test]
    fn trained_network_separates_reference_rows() {
        let rows = reference_class_features();
        // small jittered cloud around each reference row
        let mut rng = SplitMix64::new(5);
        let mut data = Vec::new();
        for &(class, center) in &rows {
            for _ in 0..25 {
                let c = center.as_array();
                let jitter: Vec<f64> = c
                    .iter()
                    .map(|&v| v + 0.02 * v.abs().max(0.5) * rng.normal())
                    .collect();
                data.push((
                    FeatureVector {
                        mean_gray: jitter[0],
                        variance_gray: jitter[1],
                        std_gray: jitter[2],
                        density_pct: jitter[3],
                        fractal_dim: jitter[4],
                    },
                    class,
                ));
            }
        }
        let (net, report) = mlp_train(&data, &[8, 6], 0.05, 800, 11).unwrap();
        assert!(report.final_mse < 0.05, "mse {}", report.final_mse);
        for &(class, center) in &rows {
            assert_eq!(mlp_classify(&net, &center).0, class);
        }
    }
}
