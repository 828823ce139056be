//! Misalignment handling between a warped garment and the target body.
//!
//! A warped garment never lands exactly on the target person: sleeves
//! overshoot the arms, the hem hangs past the torso. Splitting the warped
//! mask against the body-region mask yields the **aligned** part (garment
//! over body) and the **misaligned** remainder, whose content is unreliable
//! and gets replaced before synthesis:
//!
//! * pixel space — [`mask_garment`] simply zeroes the misaligned content;
//! * feature space — [`inpaint_features`] fills the misaligned region of
//!   each channel with that channel's mean over the aligned region, a cheap
//!   stand-in that keeps feature statistics stable.

use crate::exec;
use crate::raster::{BinaryMask, FeatureMap, RasterImage};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignmentError {
    #[error("size mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("aligned region is empty, channel means are undefined")]
    EmptyAlignedRegion,
}

/// The two halves of a warped garment mask relative to the body region.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMasks {
    /// Garment pixels that landed on the body region.
    pub aligned: BinaryMask,
    /// Garment pixels that missed the body region.
    pub misaligned: BinaryMask,
}

/// Splits `garment_mask` into its aligned and misaligned parts against
/// `body_mask`.
///
/// By construction the two parts partition the garment mask: their union is
/// the garment mask and their intersection is empty.
pub fn compute_alignment(
    garment_mask: &BinaryMask,
    body_mask: &BinaryMask,
) -> Result<AlignmentMasks, AlignmentError> {
    check_mask_dims(garment_mask, body_mask.width(), body_mask.height())?;
    let aligned = garment_mask.intersect(body_mask);
    let misaligned = garment_mask.and_not(&aligned);
    Ok(AlignmentMasks { aligned, misaligned })
}

/// Keeps image content only where `mask` is set; everything else becomes
/// transparent black.
pub fn mask_garment(image: &RasterImage, mask: &BinaryMask) -> Result<RasterImage, AlignmentError> {
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(AlignmentError::DimensionMismatch {
            expected_width: image.width(),
            expected_height: image.height(),
            width: mask.width(),
            height: mask.height(),
        });
    }
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            if !mask.get(x, y) {
                out.set_pixel(x, y, [0.0; 4]);
            }
        }
    }
    Ok(out)
}

/// Nearest-neighbor resampling of a mask to another resolution.
///
/// Each output pixel reads the input pixel containing its center:
/// `src = floor((i + 0.5) * in_size / out_size)`, clamped to the input.
pub fn resample_mask_nearest(mask: &BinaryMask, width: usize, height: usize) -> BinaryMask {
    if width == 0 || height == 0 || mask.width() == 0 || mask.height() == 0 {
        return BinaryMask::new(width, height);
    }
    let sx = mask.width() as f64 / width as f64;
    let sy = mask.height() as f64 / height as f64;
    BinaryMask::from_fn(width, height, |x, y| {
        let src_x = (((x as f64 + 0.5) * sx).floor() as usize).min(mask.width() - 1);
        let src_y = (((y as f64 + 0.5) * sy).floor() as usize).min(mask.height() - 1);
        mask.get(src_x, src_y)
    })
}

/// Replaces the misaligned region of every feature channel with that
/// channel's mean over the aligned region.
///
/// Masks must already be at feature resolution (see
/// [`resample_mask_nearest`]). Pixels in neither mask pass through
/// untouched. Means are accumulated in f64, sequentially per channel, so
/// results do not depend on thread count.
pub fn inpaint_features(
    features: &FeatureMap,
    masks: &AlignmentMasks,
) -> Result<FeatureMap, AlignmentError> {
    let (channels, height, width) = features.shape();
    check_mask_dims(&masks.aligned, width, height)?;
    check_mask_dims(&masks.misaligned, width, height)?;
    let aligned_count = masks.aligned.count_ones();
    if aligned_count == 0 {
        return Err(AlignmentError::EmptyAlignedRegion);
    }

    let filled = exec::map_indexed(channels, |c| {
        let plane = features.channel(c);
        let mut acc = 0.0f64;
        for y in 0..height {
            for x in 0..width {
                if masks.aligned.get(x, y) {
                    acc += plane[y * width + x] as f64;
                }
            }
        }
        let mean = (acc / aligned_count as f64) as f32;

        let mut out = plane.to_vec();
        for y in 0..height {
            for x in 0..width {
                if masks.misaligned.get(x, y) {
                    out[y * width + x] = mean;
                }
            }
        }
        out
    });

    let mut data = Vec::with_capacity(channels * height * width);
    for plane in filled {
        data.extend_from_slice(&plane);
    }
    Ok(FeatureMap::from_raw(channels, height, width, data))
}

fn check_mask_dims(mask: &BinaryMask, width: usize, height: usize) -> Result<(), AlignmentError> {
    if mask.width() != width || mask.height() != height {
        return Err(AlignmentError::DimensionMismatch {
            expected_width: width,
            expected_height: height,
            width: mask.width(),
            height: mask.height(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let height = rows.len();
        let width = rows[0].len();
        BinaryMask::from_fn(width, height, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn alignment_splits_garment_mask() {
        let garment = mask_from_rows(&["####", "####", "....", "...."]);
        let body = mask_from_rows(&["##..", "##..", "##..", "##.."]);
        let masks = compute_alignment(&garment, &body).unwrap();
        assert_eq!(masks.aligned, mask_from_rows(&["##..", "##..", "....", "...."]));
        assert_eq!(masks.misaligned, mask_from_rows(&["..##", "..##", "....", "...."]));
    }

    #[test]
    fn alignment_rejects_size_mismatch() {
        let garment = BinaryMask::new(4, 4);
        let body = BinaryMask::new(3, 4);
        assert!(matches!(
            compute_alignment(&garment, &body),
            Err(AlignmentError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mask_garment_zeroes_complement() {
        let image = RasterImage::from_fn(3, 2, |_, _| [0.5, 0.25, 0.75, 1.0]);
        let mask = BinaryMask::from_fn(3, 2, |x, y| x == 1 && y == 0);
        let out = mask_garment(&image, &mask).unwrap();
        assert_eq!(out.pixel(1, 0), [0.5, 0.25, 0.75, 1.0]);
        assert_eq!(out.pixel(0, 0), [0.0; 4]);
        assert_eq!(out.pixel(2, 1), [0.0; 4]);
    }

    #[test]
    fn resample_same_size_is_identity() {
        let mask = mask_from_rows(&["#.#.", ".#.#", "#..#", "...."]);
        assert_eq!(resample_mask_nearest(&mask, 4, 4), mask);
    }

    #[test]
    fn resample_downsamples_at_pixel_centers() {
        // Output pixel centers land in input columns/rows 1 and 3.
        let mask = mask_from_rows(&["....", ".#.#", "....", ".#.."]);
        let down = resample_mask_nearest(&mask, 2, 2);
        assert!(down.get(0, 0) && down.get(1, 0));
        assert!(down.get(0, 1) && !down.get(1, 1));
    }

    #[test]
    fn resample_upsamples_as_blocks() {
        let mask = mask_from_rows(&["#.", ".#"]);
        let up = resample_mask_nearest(&mask, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(up.get(x, y), mask.get(x / 2, y / 2), "({x}, {y})");
            }
        }
    }

    #[test]
    fn inpaint_fills_misaligned_with_aligned_mean() {
        let features = FeatureMap::from_raw(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let masks = AlignmentMasks {
            aligned: mask_from_rows(&["##", ".."]),
            misaligned: mask_from_rows(&["..", "#."]),
        };
        let out = inpaint_features(&features, &masks).unwrap();
        assert_eq!(out.at(0, 0, 0), 1.0);
        assert_eq!(out.at(0, 0, 1), 2.0);
        assert_eq!(out.at(0, 1, 0), 1.5, "misaligned pixel takes the aligned mean");
        assert_eq!(out.at(0, 1, 1), 4.0, "pixels in neither mask pass through");
    }

    #[test]
    fn inpaint_means_are_per_channel() {
        let features =
            FeatureMap::from_raw(2, 1, 2, vec![10.0, 0.0, -4.0, 0.0]);
        let masks = AlignmentMasks {
            aligned: mask_from_rows(&["#."]),
            misaligned: mask_from_rows(&[".#"]),
        };
        let out = inpaint_features(&features, &masks).unwrap();
        assert_eq!(out.at(0, 0, 1), 10.0);
        assert_eq!(out.at(1, 0, 1), -4.0);
    }

    #[test]
    fn inpaint_requires_aligned_pixels() {
        let features = FeatureMap::new(1, 2, 2);
        let masks = AlignmentMasks {
            aligned: BinaryMask::new(2, 2),
            misaligned: mask_from_rows(&["#.", ".."]),
        };
        assert_eq!(inpaint_features(&features, &masks), Err(AlignmentError::EmptyAlignedRegion));
    }

    proptest! {
        #[test]
        fn alignment_partition_properties(garment_bits in prop::collection::vec(any::<bool>(), 64),
                                          body_bits in prop::collection::vec(any::<bool>(), 64)) {
            let garment = BinaryMask::from_fn(8, 8, |x, y| garment_bits[y * 8 + x]);
            let body = BinaryMask::from_fn(8, 8, |x, y| body_bits[y * 8 + x]);
            let masks = compute_alignment(&garment, &body).unwrap();
            prop_assert_eq!(&masks.aligned.union(&masks.misaligned), &garment);
            prop_assert_eq!(masks.aligned.intersect(&masks.misaligned).count_ones(), 0);
            prop_assert_eq!(masks.aligned.and_not(&body).count_ones(), 0);
        }

        #[test]
        fn inpaint_touches_only_misaligned(values in prop::collection::vec(-10.0f32..10.0, 32),
                                           aligned_bits in prop::collection::vec(any::<bool>(), 16),
                                           misaligned_bits in prop::collection::vec(any::<bool>(), 16)) {
            prop_assume!(aligned_bits.iter().any(|&b| b));
            let features = FeatureMap::from_raw(2, 4, 4, values);
            let aligned = BinaryMask::from_fn(4, 4, |x, y| aligned_bits[y * 4 + x]);
            let misaligned = BinaryMask::from_fn(4, 4, |x, y| misaligned_bits[y * 4 + x] && !aligned.get(x, y));
            let masks = AlignmentMasks { aligned, misaligned };
            let out = inpaint_features(&features, &masks).unwrap();
            for c in 0..2 {
                for y in 0..4 {
                    for x in 0..4 {
                        if !masks.misaligned.get(x, y) {
                            prop_assert_eq!(out.at(c, y, x), features.at(c, y, x));
                        }
                    }
                }
            }
        }
    }
}
