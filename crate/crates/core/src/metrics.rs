//! Training losses: L1 reconstruction, multi-scale perceptual distance,
//! mask supervision and their weighted total.
//!
//! All reductions are mean-reduced and accumulated in f64; a loss value is
//! therefore independent of feature-map shape conventions and thread count.
//! The perceptual term runs on any [`FeatureExtractor`]; the built-in
//! [`PyramidExtractor`] uses an average-pooling pyramid, which keeps the
//! crate free of network weights while exercising the same code paths.

use crate::exec;
use crate::raster::{BinaryMask, FeatureMap, RasterImage, SoftMask};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: (usize, usize, usize), got: (usize, usize, usize) },
    #[error("size mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("extractor returned {got} layers, loss weights cover {expected}")]
    LayerCountMismatch { expected: usize, got: usize },
    #[error("cannot reduce over an empty tensor")]
    Empty,
}

/// Mean absolute difference over all elements of two equal-shape tensors.
pub fn l1_loss(a: &FeatureMap, b: &FeatureMap) -> Result<f64, MetricsError> {
    if a.shape() != b.shape() {
        return Err(MetricsError::ShapeMismatch { expected: a.shape(), got: b.shape() });
    }
    if a.data().is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut acc = 0.0f64;
    for (&x, &y) in a.data().iter().zip(b.data().iter()) {
        acc += (x as f64 - y as f64).abs();
    }
    Ok(acc / a.data().len() as f64)
}

/// Mean absolute RGB difference between two images; alpha is bookkeeping
/// (pixel validity), not content, and is excluded.
pub fn reconstruction_loss(
    output: &RasterImage,
    target: &RasterImage,
) -> Result<f64, MetricsError> {
    check_image_dims(output, target)?;
    let n = output.width() * output.height() * 3;
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    let mut acc = 0.0f64;
    for (a, b) in output.data().chunks_exact(4).zip(target.data().chunks_exact(4)) {
        for c in 0..3 {
            acc += (a[c] as f64 - b[c] as f64).abs();
        }
    }
    Ok(acc / n as f64)
}

/// Mean absolute difference between a predicted soft mask and a binary
/// target.
pub fn mask_loss(predicted: &SoftMask, target: &BinaryMask) -> Result<f64, MetricsError> {
    if predicted.width() != target.width() || predicted.height() != target.height() {
        return Err(MetricsError::DimensionMismatch {
            expected_width: predicted.width(),
            expected_height: predicted.height(),
            width: target.width(),
            height: target.height(),
        });
    }
    let n = predicted.width() * predicted.height();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    let mut acc = 0.0f64;
    for y in 0..predicted.height() {
        for x in 0..predicted.width() {
            let t = target.get(x, y) as u8 as f64;
            acc += (predicted.get(x, y) as f64 - t).abs();
        }
    }
    Ok(acc / n as f64)
}

/// Turns images into a stack of feature maps for the perceptual loss.
pub trait FeatureExtractor {
    fn extract(&self, image: &RasterImage) -> Vec<FeatureMap>;
    /// One weight per extracted layer, deepest layer last.
    fn layer_weights(&self) -> Vec<f64>;
}

/// Per-layer weights of the pooling pyramid, shallowest first: deep
/// (coarse) layers dominate, like the usual deep-feature weighting.
pub const PYRAMID_LAYER_WEIGHTS: [f64; 5] = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0];

/// Average-pooling pyramid over RGB with factors 1, 2, 4, 8, 16.
#[derive(Debug, Clone, Default)]
pub struct PyramidExtractor;

/// Downsampling factors of the pyramid levels.
pub const PYRAMID_FACTORS: [usize; 5] = [1, 2, 4, 8, 16];

impl FeatureExtractor for PyramidExtractor {
    fn extract(&self, image: &RasterImage) -> Vec<FeatureMap> {
        let rgb = rgb_features(image);
        PYRAMID_FACTORS.iter().map(|&f| average_pool(&rgb, f)).collect()
    }

    fn layer_weights(&self) -> Vec<f64> {
        PYRAMID_LAYER_WEIGHTS.to_vec()
    }
}

fn rgb_features(image: &RasterImage) -> FeatureMap {
    let (w, h) = (image.width(), image.height());
    let mut data = vec![0.0f32; 3 * h * w];
    let plane = h * w;
    for (i, px) in image.data().chunks_exact(4).enumerate() {
        data[i] = px[0];
        data[plane + i] = px[1];
        data[2 * plane + i] = px[2];
    }
    FeatureMap::from_raw(3, h, w, data)
}

/// Non-overlapping `factor`×`factor` mean pooling; edge windows that hang
/// over the border average only the pixels they cover.
pub fn average_pool(features: &FeatureMap, factor: usize) -> FeatureMap {
    assert!(factor > 0, "pooling factor must be positive");
    if factor == 1 {
        return features.clone();
    }
    let (channels, height, width) = features.shape();
    let out_h = height.div_ceil(factor);
    let out_w = width.div_ceil(factor);
    let planes = exec::map_indexed(channels, |c| {
        let plane = features.channel(c);
        let mut out = vec![0.0f32; out_h * out_w];
        for oy in 0..out_h {
            for ox in 0..out_w {
                let y1 = ((oy + 1) * factor).min(height);
                let x1 = ((ox + 1) * factor).min(width);
                let mut acc = 0.0f64;
                let mut count = 0usize;
                for y in oy * factor..y1 {
                    for x in ox * factor..x1 {
                        acc += plane[y * width + x] as f64;
                        count += 1;
                    }
                }
                out[oy * out_w + ox] = (acc / count as f64) as f32;
            }
        }
        out
    });
    let mut data = Vec::with_capacity(channels * out_h * out_w);
    for plane in planes {
        data.extend_from_slice(&plane);
    }
    FeatureMap::from_raw(channels, out_h, out_w, data)
}

/// Weighted sum of per-layer L1 distances between extracted features.
pub fn perceptual_loss<E: FeatureExtractor>(
    extractor: &E,
    output: &RasterImage,
    target: &RasterImage,
) -> Result<f64, MetricsError> {
    check_image_dims(output, target)?;
    let weights = extractor.layer_weights();
    let fa = extractor.extract(output);
    let fb = extractor.extract(target);
    if fa.len() != weights.len() || fb.len() != weights.len() {
        return Err(MetricsError::LayerCountMismatch { expected: weights.len(), got: fa.len() });
    }
    let mut total = 0.0f64;
    for ((a, b), w) in fa.iter().zip(fb.iter()).zip(weights.iter()) {
        total += w * l1_loss(a, b)?;
    }
    Ok(total)
}

/// Scalar weights combining the loss terms; the adversarial term has an
/// implicit weight of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub reconstruction: f64,
    pub perceptual: f64,
    pub mask: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { reconstruction: 40.0, perceptual: 40.0, mask: 100.0 }
    }
}

/// The individual loss terms of one training step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub gan: f64,
    pub reconstruction: f64,
    pub perceptual: f64,
    pub mask: f64,
}

/// `gan + w_rec * rec + w_perc * perc + w_mask * mask`.
pub fn total_loss(parts: &LossParts, weights: &LossWeights) -> f64 {
    parts.gan
        + weights.reconstruction * parts.reconstruction
        + weights.perceptual * parts.perceptual
        + weights.mask * parts.mask
}

fn check_image_dims(a: &RasterImage, b: &RasterImage) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch {
            expected_width: a.width(),
            expected_height: a.height(),
            width: b.width(),
            height: b.height(),
        });
    }
    Ok(())
}
