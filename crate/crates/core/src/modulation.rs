//! Spatially-adaptive feature modulation and its building blocks.
//!
//! The synthesis stage conditions hidden features on garment/body layout
//! maps: a small convolution predicts per-pixel scale (gamma) and shift
//! (beta) fields, and [`spade_modulate`] applies them to channel-normalized
//! hidden features:
//!
//! ```text
//! out = gamma * (h - mean_c) / (std_c + eps) + beta
//! ```
//!
//! with mean/std taken per channel over all spatial positions (population
//! std). [`spade_backward`] provides the exact analytic gradients of that
//! expression, which the self-check verifies against finite differences.
//!
//! All reductions accumulate in f64 and run sequentially within a channel;
//! parallelism is only across channels, so results are independent of
//! thread count.

use crate::exec;
use crate::raster::FeatureMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulationError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: (usize, usize, usize), got: (usize, usize, usize) },
    #[error("expected {expected} input channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("unsupported kernel size {kernel}, expected 1, 3 or 5")]
    UnsupportedKernel { kernel: usize },
    #[error("eps must be non-negative, got {eps}")]
    InvalidEps { eps: f64 },
    #[error("channel {channel} is constant and eps is 0, normalization is undefined")]
    ZeroVariance { channel: usize },
    #[error("affine head needs an even channel count to split, got {channels}")]
    OddAffineChannels { channels: usize },
    #[error("conv parameter blob has a bad magic number")]
    BadMagic,
    #[error("conv parameter blob length {got} does not match header (expected {expected})")]
    BadBlobLength { expected: usize, got: usize },
    #[error("weight/bias vector length {got} does not match dimensions (expected {expected})")]
    BadParamLength { expected: usize, got: usize },
}

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Computes per-channel mean and population std (divide by N, not N-1).
pub fn channel_stats(features: &FeatureMap) -> ChannelStats {
    let (channels, height, width) = features.shape();
    let n = (height * width) as f64;
    let stats = exec::map_indexed(channels, |c| {
        let plane = features.channel(c);
        let mut sum = 0.0f64;
        for &v in plane {
            sum += v as f64;
        }
        let mean = sum / n;
        let mut sq = 0.0f64;
        for &v in plane {
            let d = v as f64 - mean;
            sq += d * d;
        }
        (mean, (sq / n).sqrt())
    });
    ChannelStats {
        mean: stats.iter().map(|s| s.0).collect(),
        std: stats.iter().map(|s| s.1).collect(),
    }
}

/// Spatially-adaptive gamma/beta fields, same shape as the features they
/// modulate.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParams {
    pub gamma: FeatureMap,
    pub beta: FeatureMap,
}

/// Applies spatially-adaptive modulation to channel-normalized features.
///
/// `gamma` and `beta` must have exactly the hidden shape. `eps` stabilizes
/// the division; 0 is allowed as long as no channel is constant.
pub fn spade_modulate(
    hidden: &FeatureMap,
    gamma: &FeatureMap,
    beta: &FeatureMap,
    eps: f64,
) -> Result<FeatureMap, ModulationError> {
    check_shape(hidden, gamma)?;
    check_shape(hidden, beta)?;
    if !(eps >= 0.0) {
        return Err(ModulationError::InvalidEps { eps });
    }
    let (channels, height, width) = hidden.shape();
    let stats = channel_stats(hidden);
    for (c, &std) in stats.std.iter().enumerate() {
        if std + eps == 0.0 {
            return Err(ModulationError::ZeroVariance { channel: c });
        }
    }

    let planes = exec::map_indexed(channels, |c| {
        let mean = stats.mean[c];
        let scale = stats.std[c] + eps;
        let h = hidden.channel(c);
        let g = gamma.channel(c);
        let b = beta.channel(c);
        let mut out = vec![0.0f32; height * width];
        for i in 0..out.len() {
            let normalized = (h[i] as f64 - mean) / scale;
            out[i] = (g[i] as f64 * normalized + b[i] as f64) as f32;
        }
        out
    });
    Ok(collect_planes(planes, channels, height, width))
}

/// Gradients of a scalar loss through [`spade_modulate`], given the
/// upstream gradient with respect to its output.
#[derive(Debug, Clone, PartialEq)]
pub struct SpadeGradients {
    pub hidden: FeatureMap,
    pub gamma: FeatureMap,
    pub beta: FeatureMap,
}

/// Analytic backward pass of [`spade_modulate`].
///
/// With per-channel `s = std + eps`, `n_i = (h_i - mean) / s` and
/// `g_i = upstream_i * gamma_i`:
///
/// ```text
/// d_beta_i  = upstream_i
/// d_gamma_i = upstream_i * n_i
/// d_h_j     = (g_j - avg(g)) / s  -  (sum_i g_i n_i) * n_j / (N * std)
/// ```
///
/// The second `d_h` term is the feedback through mean and std. A constant
/// channel has no std derivative (the population std is not differentiable
/// at zero), so that term is dropped when `std == 0`, matching the one-sided
/// convention used by the finite-difference check.
pub fn spade_backward(
    hidden: &FeatureMap,
    gamma: &FeatureMap,
    upstream: &FeatureMap,
    eps: f64,
) -> Result<SpadeGradients, ModulationError> {
    check_shape(hidden, gamma)?;
    check_shape(hidden, upstream)?;
    if !(eps >= 0.0) {
        return Err(ModulationError::InvalidEps { eps });
    }
    let (channels, height, width) = hidden.shape();
    let n = (height * width) as f64;
    let stats = channel_stats(hidden);
    for (c, &std) in stats.std.iter().enumerate() {
        if std + eps == 0.0 {
            return Err(ModulationError::ZeroVariance { channel: c });
        }
    }

    let planes = exec::map_indexed(channels, |c| {
        let mean = stats.mean[c];
        let std = stats.std[c];
        let s = std + eps;
        let h = hidden.channel(c);
        let g_field = gamma.channel(c);
        let u = upstream.channel(c);
        let len = height * width;

        let mut normalized = vec![0.0f64; len];
        let mut g = vec![0.0f64; len];
        let mut g_sum = 0.0f64;
        let mut dot = 0.0f64;
        for i in 0..len {
            normalized[i] = (h[i] as f64 - mean) / s;
            g[i] = u[i] as f64 * g_field[i] as f64;
            g_sum += g[i];
            dot += g[i] * normalized[i];
        }
        let g_avg = g_sum / n;

        let mut d_hidden = vec![0.0f32; len];
        let mut d_gamma = vec![0.0f32; len];
        let mut d_beta = vec![0.0f32; len];
        for i in 0..len {
            let mut dh = (g[i] - g_avg) / s;
            if std > 0.0 {
                dh -= dot * normalized[i] / (n * std);
            }
            d_hidden[i] = dh as f32;
            d_gamma[i] = (u[i] as f64 * normalized[i]) as f32;
            d_beta[i] = u[i];
        }
        (d_hidden, d_gamma, d_beta)
    });

    let mut hidden_planes = Vec::with_capacity(channels);
    let mut gamma_planes = Vec::with_capacity(channels);
    let mut beta_planes = Vec::with_capacity(channels);
    for (dh, dg, db) in planes {
        hidden_planes.push(dh);
        gamma_planes.push(dg);
        beta_planes.push(db);
    }
    Ok(SpadeGradients {
        hidden: collect_planes(hidden_planes, channels, height, width),
        gamma: collect_planes(gamma_planes, channels, height, width),
        beta: collect_planes(beta_planes, channels, height, width),
    })
}

/// Weights for one stride-1, zero-padded ("same") convolution layer.
///
/// Weights are laid out `[out][in][ky][kx]`, one bias per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

/// File magic of the conv parameter blob format.
pub const CONV_PARAMS_MAGIC: &[u8; 4] = b"CNV1";

impl ConvParams {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self, ModulationError> {
        if !matches!(kernel, 1 | 3 | 5) {
            return Err(ModulationError::UnsupportedKernel { kernel });
        }
        let expected = out_channels * in_channels * kernel * kernel;
        if weights.len() != expected {
            return Err(ModulationError::BadParamLength { expected, got: weights.len() });
        }
        if bias.len() != out_channels {
            return Err(ModulationError::BadParamLength { expected: out_channels, got: bias.len() });
        }
        Ok(Self { out_channels, in_channels, kernel, weights, bias })
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    #[inline]
    fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f32 {
        let k = self.kernel;
        self.weights[((o * self.in_channels + i) * k + ky) * k + kx]
    }

    /// Serializes to the `CNV1` blob: magic, three little-endian u32 header
    /// fields (out, in, kernel), then weights and biases as little-endian
    /// f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * (self.weights.len() + self.bias.len()));
        out.extend_from_slice(CONV_PARAMS_MAGIC);
        out.extend_from_slice(&(self.out_channels as u32).to_le_bytes());
        out.extend_from_slice(&(self.in_channels as u32).to_le_bytes());
        out.extend_from_slice(&(self.kernel as u32).to_le_bytes());
        for v in self.weights.iter().chain(self.bias.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a `CNV1` blob; the blob must contain exactly the advertised
    /// number of weights and biases.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModulationError> {
        if bytes.len() < 16 {
            return Err(ModulationError::BadBlobLength { expected: 16, got: bytes.len() });
        }
        if &bytes[0..4] != CONV_PARAMS_MAGIC {
            return Err(ModulationError::BadMagic);
        }
        let read_u32 =
            |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let out_channels = read_u32(4);
        let in_channels = read_u32(8);
        let kernel = read_u32(12);
        if !matches!(kernel, 1 | 3 | 5) {
            return Err(ModulationError::UnsupportedKernel { kernel });
        }
        let weight_count = out_channels * in_channels * kernel * kernel;
        let expected = 16 + 4 * (weight_count + out_channels);
        if bytes.len() != expected {
            return Err(ModulationError::BadBlobLength { expected, got: bytes.len() });
        }
        let mut values = bytes[16..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()));
        let weights: Vec<f32> = values.by_ref().take(weight_count).collect();
        let bias: Vec<f32> = values.collect();
        Self::new(out_channels, in_channels, kernel, weights, bias)
    }
}

/// Stride-1 convolution with zero "same" padding; output has the input's
/// spatial size and `params.out_channels` channels. Each output value is
/// accumulated in f64.
pub fn conv2d(input: &FeatureMap, params: &ConvParams) -> Result<FeatureMap, ModulationError> {
    let (channels, height, width) = input.shape();
    if channels != params.in_channels {
        return Err(ModulationError::ChannelMismatch { expected: params.in_channels, got: channels });
    }
    let k = params.kernel;
    let pad = (k / 2) as i64;

    let planes = exec::map_indexed(params.out_channels, |o| {
        let mut out = vec![0.0f32; height * width];
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                let mut acc = params.bias[o] as f64;
                for i in 0..channels {
                    let plane = input.channel(i);
                    for ky in 0..k as i64 {
                        for kx in 0..k as i64 {
                            let sy = y + ky - pad;
                            let sx = x + kx - pad;
                            if sy < 0 || sx < 0 || sy >= height as i64 || sx >= width as i64 {
                                continue;
                            }
                            let w = params.weight(o, i, ky as usize, kx as usize) as f64;
                            acc += w * plane[(sy as usize) * width + sx as usize] as f64;
                        }
                    }
                }
                out[(y as usize) * width + x as usize] = acc as f32;
            }
        }
        out
    });
    Ok(collect_planes(planes, params.out_channels, height, width))
}

/// Predicts gamma/beta fields from condition features with one convolution.
///
/// The conv output must have an even channel count: the first half becomes
/// gamma, the second half beta.
pub fn affine_from_features(
    features: &FeatureMap,
    params: &ConvParams,
) -> Result<AffineParams, ModulationError> {
    if params.out_channels % 2 != 0 {
        return Err(ModulationError::OddAffineChannels { channels: params.out_channels });
    }
    let raw = conv2d(features, params)?;
    let (_, height, width) = raw.shape();
    let half = params.out_channels / 2;
    let plane = height * width;
    let gamma = FeatureMap::from_raw(half, height, width, raw.data()[..half * plane].to_vec());
    let beta = FeatureMap::from_raw(half, height, width, raw.data()[half * plane..].to_vec());
    Ok(AffineParams { gamma, beta })
}

fn check_shape(expected: &FeatureMap, got: &FeatureMap) -> Result<(), ModulationError> {
    if expected.shape() != got.shape() {
        return Err(ModulationError::ShapeMismatch {
            expected: expected.shape(),
            got: got.shape(),
        });
    }
    Ok(())
}

fn collect_planes(planes: Vec<Vec<f32>>, channels: usize, height: usize, width: usize) -> FeatureMap {
    let mut data = Vec::with_capacity(channels * height * width);
    for plane in planes {
        data.extend_from_slice(&plane);
    }
    FeatureMap::from_raw(channels, height, width, data)
}
