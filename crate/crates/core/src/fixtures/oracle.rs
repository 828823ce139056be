//! Independent reference implementations used only by tests.
//!
//! Everything here is deliberately written from scratch against the math,
//! sharing no code with the production modules: plain slices and tuples in,
//! plain vectors out, straightforward O(everything) loops. When production
//! and oracle agree, a shared bug is far less likely.

/// Homography from four point correspondences via Gauss-Jordan elimination
/// of the raw (unconditioned) 8×9 system; `None` if a pivot vanishes.
/// Returns the row-major matrix scaled to h33 = 1.
pub fn oracle_homography(src: &[(f64, f64); 4], dst: &[(f64, f64); 4]) -> Option<[f64; 9]> {
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = src[i];
        let (u, v) = dst[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    // Gauss-Jordan: reduce to identity on the left, solution on the right.
    for col in 0..8 {
        let mut best = col;
        for row in col + 1..8 {
            if a[row][col].abs() > a[best][col].abs() {
                best = row;
            }
        }
        if a[best][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, best);
        let pivot = a[col][col];
        for k in 0..9 {
            a[col][k] /= pivot;
        }
        for row in 0..8 {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            for k in 0..9 {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    let h = [a[0][8], a[1][8], a[2][8], a[3][8], a[4][8], a[5][8], a[6][8], a[7][8], 1.0];
    Some(h)
}

/// Projective application of a row-major 3×3 matrix; `None` at infinity.
pub fn oracle_apply(h: &[f64; 9], p: (f64, f64)) -> Option<(f64, f64)> {
    let w = h[6] * p.0 + h[7] * p.1 + h[8];
    if w.abs() <= 1e-12 {
        return None;
    }
    Some(((h[0] * p.0 + h[1] * p.1 + h[2]) / w, (h[3] * p.0 + h[4] * p.1 + h[5]) / w))
}

/// Naive same-padded stride-1 convolution: six nested loops, nothing
/// clever. `input` is CHW, `weights` is `[out][in][ky][kx]`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_conv2d(
    input: &[f32],
    in_channels: usize,
    height: usize,
    width: usize,
    weights: &[f32],
    bias: &[f32],
    out_channels: usize,
    kernel: usize,
) -> Vec<f32> {
    assert_eq!(input.len(), in_channels * height * width);
    assert_eq!(weights.len(), out_channels * in_channels * kernel * kernel);
    assert_eq!(bias.len(), out_channels);
    let pad = (kernel / 2) as i64;
    let mut out = vec![0.0f32; out_channels * height * width];
    for o in 0..out_channels {
        for y in 0..height {
            for x in 0..width {
                let mut acc = bias[o] as f64;
                for i in 0..in_channels {
                    for ky in 0..kernel {
                        for kx in 0..kernel {
                            let sy = y as i64 + ky as i64 - pad;
                            let sx = x as i64 + kx as i64 - pad;
                            if sy < 0 || sx < 0 || sy >= height as i64 || sx >= width as i64 {
                                continue;
                            }
                            let wv = weights
                                [((o * in_channels + i) * kernel + ky) * kernel + kx]
                                as f64;
                            let iv = input[(i * height + sy as usize) * width + sx as usize] as f64;
                            acc += wv * iv;
                        }
                    }
                }
                out[(o * height + y) * width + x] = acc as f32;
            }
        }
    }
    out
}

/// Scalar f64 forward pass of spatially-adaptive modulation, channel by
/// channel over flattened CHW buffers.
pub fn oracle_spade_forward(
    hidden: &[f64],
    gamma: &[f64],
    beta: &[f64],
    channels: usize,
    plane: usize,
    eps: f64,
) -> Vec<f64> {
    assert_eq!(hidden.len(), channels * plane);
    let mut out = vec![0.0f64; hidden.len()];
    for c in 0..channels {
        let h = &hidden[c * plane..(c + 1) * plane];
        let mean = h.iter().sum::<f64>() / plane as f64;
        let var = h.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / plane as f64;
        let s = var.sqrt() + eps;
        for i in 0..plane {
            let idx = c * plane + i;
            out[idx] = gamma[idx] * (h[i] - mean) / s + beta[idx];
        }
    }
    out
}

/// Loss fed to the finite-difference check: the inner product of the
/// modulation output with a fixed upstream gradient field.
pub fn oracle_spade_loss(
    hidden: &[f64],
    gamma: &[f64],
    beta: &[f64],
    upstream: &[f64],
    channels: usize,
    plane: usize,
    eps: f64,
) -> f64 {
    oracle_spade_forward(hidden, gamma, beta, channels, plane, eps)
        .iter()
        .zip(upstream.iter())
        .map(|(o, u)| o * u)
        .sum()
}

/// Central finite differences of [`oracle_spade_loss`] with respect to
/// hidden, gamma and beta.
#[allow(clippy::too_many_arguments)]
pub fn finite_diff_spade(
    hidden: &[f64],
    gamma: &[f64],
    beta: &[f64],
    upstream: &[f64],
    channels: usize,
    plane: usize,
    eps: f64,
    step: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = hidden.len();
    let mut d_hidden = vec![0.0f64; n];
    let mut d_gamma = vec![0.0f64; n];
    let mut d_beta = vec![0.0f64; n];
    let probe = |field: &[f64], which: usize, i: usize| {
        let mut plus = field.to_vec();
        let mut minus = field.to_vec();
        plus[i] += step;
        minus[i] -= step;
        let (hp, gp, bp): (&[f64], &[f64], &[f64]) = match which {
            0 => (&plus, gamma, beta),
            1 => (hidden, &plus, beta),
            _ => (hidden, gamma, &plus),
        };
        let (hm, gm, bm): (&[f64], &[f64], &[f64]) = match which {
            0 => (&minus, gamma, beta),
            1 => (hidden, &minus, beta),
            _ => (hidden, gamma, &minus),
        };
        let lp = oracle_spade_loss(hp, gp, bp, upstream, channels, plane, eps);
        let lm = oracle_spade_loss(hm, gm, bm, upstream, channels, plane, eps);
        (lp - lm) / (2.0 * step)
    };
    for i in 0..n {
        d_hidden[i] = probe(hidden, 0, i);
        d_gamma[i] = probe(gamma, 1, i);
        d_beta[i] = probe(beta, 2, i);
    }
    (d_hidden, d_gamma, d_beta)
}

/// Largest absolute difference, relative to the largest magnitude of the
/// reference: `max|a_i - b_i| / max(1e-12, max|b_i|)`.
pub fn max_relative_error(actual: &[f32], reference: &[f64]) -> f64 {
    assert_eq!(actual.len(), reference.len());
    let mut max_diff = 0.0f64;
    let mut max_ref = 0.0f64;
    for (&a, &b) in actual.iter().zip(reference.iter()) {
        max_diff = max_diff.max((a as f64 - b).abs());
        max_ref = max_ref.max(b.abs());
    }
    max_diff / max_ref.max(1e-12)
}

/// Per-channel mean and population std over flattened CHW data, written as
/// directly as possible.
pub fn oracle_channel_stats(data: &[f32], channels: usize, plane: usize) -> (Vec<f64>, Vec<f64>) {
    let mut means = Vec::with_capacity(channels);
    let mut stds = Vec::with_capacity(channels);
    for c in 0..channels {
        let slice = &data[c * plane..(c + 1) * plane];
        let mean = slice.iter().map(|&v| v as f64).sum::<f64>() / plane as f64;
        let var =
            slice.iter().map(|&v| (v as f64 - mean) * (v as f64 - mean)).sum::<f64>() / plane as f64;
        means.push(mean);
        stds.push(var.sqrt());
    }
    (means, stds)
}
