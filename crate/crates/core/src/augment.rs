//! Random erasing of warped garments.
//!
//! Training the inpainting stages requires garments with realistic holes.
//! Two erasing operations are applied to a warp result, each gated by its
//! own probability:
//!
//! * **arm-patch dropping** (probability `alpha1`): one arm patch is removed
//!   and the remaining patches are re-composited, simulating a source arm
//!   that was never visible;
//! * **free-form erasing** (probability `alpha2`): a random-walk stroke mask
//!   is carved out of the composite, simulating irregular occlusion.
//!
//! Determinism matters more than the exact stroke shapes: a seed fully
//! determines the output. Each random decision draws from its own RNG
//! sub-stream, so e.g. changing stroke parameters never flips the arm-drop
//! decision for the same seed.

use crate::patching::{stitch, WarpedGarment};
use crate::raster::BinaryMask;
use crate::role::PatchRole;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sub-stream carrying the arm-drop decision and arm choice.
const STREAM_ARM: u64 = 0;
/// Sub-stream carrying the free-form decision.
const STREAM_FREEFORM: u64 = 1;
/// Sub-stream carrying stroke geometry.
const STREAM_STROKES: u64 = 2;

/// Free-form stroke shape parameters; all ranges are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeParams {
    pub min_strokes: u32,
    pub max_strokes: u32,
    pub min_vertices: u32,
    pub max_vertices: u32,
    pub min_step: f64,
    pub max_step: f64,
    pub min_width: f64,
    pub max_width: f64,
}

impl Default for StrokeParams {
    fn default() -> Self {
        Self {
            min_strokes: 1,
            max_strokes: 4,
            min_vertices: 4,
            max_vertices: 12,
            min_step: 8.0,
            max_step: 32.0,
            min_width: 6.0,
            max_width: 24.0,
        }
    }
}

/// Configuration for [`random_erase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EraseConfig {
    /// Probability of dropping one arm patch.
    pub alpha1: f64,
    /// Probability of applying free-form erasing.
    pub alpha2: f64,
    pub seed: u64,
    pub strokes: StrokeParams,
}

impl EraseConfig {
    pub fn new(seed: u64) -> Self {
        Self { alpha1: 0.2, alpha2: 0.9, seed, strokes: StrokeParams::default() }
    }
}

/// What [`random_erase`] actually did, for logging and rate measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EraseReport {
    pub arm_dropped: Option<PatchRole>,
    pub freeform_applied: bool,
    /// Pixels removed from the garment mask by both operations combined.
    pub erased_pixels: usize,
}

/// Applies seeded arm dropping and free-form erasing to a warp result.
///
/// Erasing only destroys: the output mask is a subset of the input mask and
/// every invalidated pixel becomes transparent black. Both operations leave
/// the stored per-patch data intact except for a dropped arm patch, which is
/// removed from `patches` and `transforms`.
pub fn random_erase(garment: &WarpedGarment, config: &EraseConfig) -> (WarpedGarment, EraseReport) {
    let width = garment.width();
    let height = garment.height();
    let mut out = garment.clone();
    let before = garment.mask.count_ones();

    let mut arm_rng = stream_rng(config.seed, STREAM_ARM);
    let mut arm_dropped = None;
    if arm_rng.random::<f64>() < config.alpha1 {
        let arms: Vec<PatchRole> =
            garment.patches.iter().map(|p| p.role).filter(|r| r.is_arm()).collect();
        if !arms.is_empty() {
            let chosen = arms[arm_rng.random_range(0..arms.len())];
            out.patches.retain(|p| p.role != chosen);
            out.transforms.retain(|t| t.role != chosen);
            let restitched = stitch(&out.patches, width, height)
                .expect("patches of one warp share the garment canvas");
            out.image = restitched.image;
            out.mask = restitched.mask;
            out.provenance = restitched.provenance;
            arm_dropped = Some(chosen);
        }
    }

    let mut freeform_rng = stream_rng(config.seed, STREAM_FREEFORM);
    let freeform_applied = freeform_rng.random::<f64>() < config.alpha2;
    if freeform_applied {
        let mut stroke_rng = stream_rng(config.seed, STREAM_STROKES);
        let strokes = free_form_stroke_mask(width, height, &mut stroke_rng, &config.strokes);
        for y in 0..height {
            for x in 0..width {
                if strokes.get(x, y) && out.mask.get(x, y) {
                    out.mask.set(x, y, false);
                    out.image.set_pixel(x, y, [0.0; 4]);
                    out.provenance.set(x, y, None);
                }
            }
        }
    }

    let erased_pixels = before - out.mask.count_ones();
    (out, EraseReport { arm_dropped, freeform_applied, erased_pixels })
}

/// Renders a random-walk stroke mask: each stroke is a polyline of uniform
/// random-direction segments, painted as overlapping discs.
pub fn free_form_stroke_mask(
    width: usize,
    height: usize,
    rng: &mut ChaCha8Rng,
    params: &StrokeParams,
) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    if width == 0 || height == 0 {
        return mask;
    }
    let stroke_count = rng.random_range(params.min_strokes..=params.max_strokes);
    for _ in 0..stroke_count {
        let vertices = rng.random_range(params.min_vertices..=params.max_vertices);
        let step = rng.random_range(params.min_step..=params.max_step);
        let radius = rng.random_range(params.min_width..=params.max_width) / 2.0;
        let mut x = rng.random_range(0.0..width as f64);
        let mut y = rng.random_range(0.0..height as f64);
        stamp_disc(&mut mask, x, y, radius);
        for _ in 1..vertices {
            let (dx, dy) = random_unit(rng);
            let (nx, ny) = (x + step * dx, y + step * dy);
            // Dense enough disc spacing keeps the stroke gap-free.
            let spacing = (radius / 2.0).max(0.5);
            let samples = (step / spacing).ceil() as usize;
            for i in 1..=samples {
                let t = i as f64 / samples as f64;
                stamp_disc(&mut mask, x + t * (nx - x), y + t * (ny - y), radius);
            }
            x = nx;
            y = ny;
        }
    }
    mask
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform direction on the unit circle by rejection sampling; avoids
/// transcendental functions so results are bit-stable across platforms.
fn random_unit(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let r2 = x * x + y * y;
        if r2 > 1e-12 && r2 <= 1.0 {
            let r = r2.sqrt();
            return (x / r, y / r);
        }
    }
}

fn stamp_disc(mask: &mut BinaryMask, cx: f64, cy: f64, radius: f64) {
    let x0 = ((cx - radius).floor().max(0.0)) as usize;
    let y0 = ((cy - radius).floor().max(0.0)) as usize;
    let x1 = (((cx + radius).ceil() + 1.0).max(0.0) as usize).min(mask.width());
    let y1 = (((cy + radius).ceil() + 1.0).max(0.0) as usize).min(mask.height());
    let r2 = radius * radius;
    for y in y0..y1 {
        for x in x0..x1 {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            if dx * dx + dy * dy <= r2 {
                mask.set(x, y, true);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Homography;
    use crate::patching::WarpedPatch;
    use crate::raster::RasterImage;

    /// A hand-built garment: torso plus all four arm patches on a small
    /// canvas, every patch a solid block.
    fn toy_garment() -> WarpedGarment {
        let (w, h) = (48, 48);
        let blocks = [
            (PatchRole::Torso, 16usize, 8usize, 16usize, 32usize),
            (PatchRole::LUpperArm, 4, 8, 12, 10),
            (PatchRole::LLowerArm, 0, 20, 12, 10),
            (PatchRole::RUpperArm, 32, 8, 12, 10),
            (PatchRole::RLowerArm, 36, 20, 12, 10),
        ];
        let patches: Vec<WarpedPatch> = blocks
            .iter()
            .map(|&(role, x0, y0, bw, bh)| {
                let inside = move |x: usize, y: usize| {
                    (x0..x0 + bw).contains(&x) && (y0..y0 + bh).contains(&y)
                };
                WarpedPatch {
                    role,
                    image: RasterImage::from_fn(w, h, |x, y| {
                        if inside(x, y) {
                            [0.5, 0.5, 0.5, 1.0]
                        } else {
                            [0.0; 4]
                        }
                    }),
                    mask: BinaryMask::from_fn(w, h, inside),
                    norm_to_target: Homography::identity(),
                }
            })
            .collect();
        let stitched = stitch(&patches, w, h).unwrap();
        WarpedGarment {
            image: stitched.image,
            mask: stitched.mask,
            provenance: stitched.provenance,
            normalized: vec![],
            patches,
            transforms: vec![],
        }
    }

    #[test]
    fn same_seed_reproduces_output_exactly() {
        let garment = toy_garment();
        let config = EraseConfig::new(7);
        let (a, ra) = random_erase(&garment, &config);
        let (b, rb) = random_erase(&garment, &config);
        assert_eq!(ra, rb);
        assert_eq!(a.image, b.image);
        assert_eq!(a.mask, b.mask);
    }

    #[test]
    fn erasing_only_destroys() {
        let garment = toy_garment();
        for seed in 0..200 {
            let (erased, report) = random_erase(&garment, &EraseConfig::new(seed));
            let mut removed = 0usize;
            for y in 0..garment.height() {
                for x in 0..garment.width() {
                    if erased.mask.get(x, y) {
                        assert!(garment.mask.get(x, y), "mask may only shrink (seed {seed})");
                    } else {
                        assert_eq!(
                            erased.image.pixel(x, y),
                            [0.0; 4],
                            "invalid pixels are transparent black (seed {seed})"
                        );
                        assert_eq!(erased.provenance.get(x, y), None);
                        removed += garment.mask.get(x, y) as usize;
                    }
                }
            }
            assert_eq!(report.erased_pixels, removed);
        }
    }

    #[test]
    fn dropped_arm_leaves_other_patches_standing() {
        let garment = toy_garment();
        // Find a seed that drops an arm.
        let (erased, report) = (0..500)
            .map(|seed| random_erase(&garment, &EraseConfig::new(seed)))
            .find(|(_, r)| r.arm_dropped.is_some())
            .expect("some seed among 500 drops an arm");
        let dropped = report.arm_dropped.unwrap();
        assert!(dropped.is_arm());
        assert!(erased.patches.iter().all(|p| p.role != dropped));
        assert_eq!(erased.patches.len(), garment.patches.len() - 1);
        assert!(erased.patches.iter().any(|p| p.role == PatchRole::Torso));
    }

    #[test]
    fn stroke_params_do_not_disturb_arm_decision() {
        let garment = toy_garment();
        for seed in 0..100 {
            let mut wide = EraseConfig::new(seed);
            wide.strokes.max_strokes = 1;
            wide.strokes.min_strokes = 1;
            let (_, a) = random_erase(&garment, &EraseConfig::new(seed));
            let (_, b) = random_erase(&garment, &wide);
            assert_eq!(a.arm_dropped, b.arm_dropped, "seed {seed}");
            assert_eq!(a.freeform_applied, b.freeform_applied, "seed {seed}");
        }
    }

    #[test]
    fn decision_rates_track_configured_probabilities() {
        let garment = toy_garment();
        let trials = 2_000u32;
        let mut drops = 0u32;
        let mut freeforms = 0u32;
        for seed in 0..trials {
            let (_, report) = random_erase(&garment, &EraseConfig::new(seed as u64));
            drops += report.arm_dropped.is_some() as u32;
            freeforms += report.freeform_applied as u32;
        }
        let drop_rate = drops as f64 / trials as f64;
        let freeform_rate = freeforms as f64 / trials as f64;
        assert!((0.17..=0.23).contains(&drop_rate), "arm-drop rate {drop_rate}");
        assert!((0.87..=0.93).contains(&freeform_rate), "free-form rate {freeform_rate}");
    }

    #[test]
    fn no_arm_patches_means_no_drop() {
        let mut garment = toy_garment();
        garment.patches.retain(|p| !p.role.is_arm());
        let stitched = stitch(&garment.patches, 48, 48).unwrap();
        garment.image = stitched.image;
        garment.mask = stitched.mask;
        garment.provenance = stitched.provenance;
        for seed in 0..100 {
            let (_, report) = random_erase(&garment, &EraseConfig::new(seed));
            assert_eq!(report.arm_dropped, None);
        }
    }

    #[test]
    fn stroke_mask_is_deterministic_and_nonempty() {
        let params = StrokeParams::default();
        let mut rng1 = stream_rng(42, STREAM_STROKES);
        let mut rng2 = stream_rng(42, STREAM_STROKES);
        let a = free_form_stroke_mask(128, 128, &mut rng1, &params);
        let b = free_form_stroke_mask(128, 128, &mut rng2, &params);
        assert_eq!(a, b);
        assert!(a.any(), "default stroke params always paint something");
        // A stroke is at least one disc of the minimum width.
        assert!(a.count_ones() >= 12);
    }
}
