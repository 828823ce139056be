//! Deterministic fixtures shared by unit, property and end-to-end tests.
//!
//! Everything here is reproducible bit-for-bit: poses and textures are pure
//! functions of literal constants, randomized helpers take explicit seeds,
//! and textures avoid transcendental functions whose last-bit behavior
//! varies between platforms (sqrt is exactly rounded and fine). That makes
//! it meaningful to pin FNV-1a hashes of rendered artifacts as golden
//! values — see [`golden_entries`].
//!
//! Textures are deliberately smooth (blended edges rather than hard ones):
//! the warping round-trip resamples twice through the 64×64 template, and
//! only band-limited content can survive that with high fidelity.

pub mod oracle;

use crate::augment::{random_erase, EraseConfig};
use crate::geometry::{Point2, Quad};
use crate::modulation::ConvParams;
use crate::patching::{layout_patches, warp_garment, LayoutParams, PatchLayout, WarpedGarment};
use crate::pose::{JointName, Keypoint, PoseKeypoints};
use crate::raster::{BinaryMask, FeatureMap, RasterImage};
use crate::role::{GarmentKind, PatchRole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Canvas size of the standard fixtures.
pub const FIXTURE_WIDTH: usize = 448;
pub const FIXTURE_HEIGHT: usize = 256;
/// Canvas size of the small fixture used for high-volume statistics.
pub const SMALL_SIZE: usize = 64;

fn pose_from(joints: &[(JointName, f64, f64)]) -> PoseKeypoints {
    let mut pose = PoseKeypoints::new();
    for &(joint, x, y) in joints {
        pose.set(joint, Keypoint::new(x, y, 1.0));
    }
    pose
}

/// Upright arms-out pose centered on the standard canvas.
pub fn t_pose() -> PoseKeypoints {
    pose_from(&[
        (JointName::Neck, 224.0, 38.0),
        (JointName::LShoulder, 174.0, 48.0),
        (JointName::RShoulder, 274.0, 48.0),
        (JointName::LElbow, 114.0, 48.0),
        (JointName::RElbow, 334.0, 48.0),
        (JointName::LWrist, 54.0, 48.0),
        (JointName::RWrist, 394.0, 48.0),
        (JointName::LHip, 194.0, 168.0),
        (JointName::RHip, 254.0, 168.0),
    ])
}

/// The same person with arms lowered and hips shifted: a genuinely
/// different target pose for cross-pose warps, still fully on canvas.
pub fn turned_pose() -> PoseKeypoints {
    pose_from(&[
        (JointName::Neck, 224.0, 40.0),
        (JointName::LShoulder, 174.0, 48.0),
        (JointName::RShoulder, 274.0, 48.0),
        (JointName::LElbow, 150.0, 112.0),
        (JointName::RElbow, 298.0, 112.0),
        (JointName::LWrist, 138.0, 172.0),
        (JointName::RWrist, 310.0, 172.0),
        (JointName::LHip, 198.0, 170.0),
        (JointName::RHip, 256.0, 170.0),
    ])
}

/// A complete upper-body pose squeezed onto the 64×64 canvas.
pub fn small_pose() -> PoseKeypoints {
    pose_from(&[
        (JointName::Neck, 32.0, 9.0),
        (JointName::LShoulder, 18.0, 12.0),
        (JointName::RShoulder, 46.0, 12.0),
        (JointName::LElbow, 8.0, 26.0),
        (JointName::RElbow, 56.0, 26.0),
        (JointName::LWrist, 6.0, 44.0),
        (JointName::RWrist, 58.0, 44.0),
        (JointName::LHip, 24.0, 44.0),
        (JointName::RHip, 40.0, 44.0),
    ])
}

/// Synthetic garment texture families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    Solid,
    Checker,
    Stripes,
    LogoDot,
}

impl TextureKind {
    pub const ALL: [TextureKind; 4] =
        [TextureKind::Solid, TextureKind::Checker, TextureKind::Stripes, TextureKind::LogoDot];

    pub fn name(self) -> &'static str {
        match self {
            TextureKind::Solid => "solid",
            TextureKind::Checker => "checker",
            TextureKind::Stripes => "stripes",
            TextureKind::LogoDot => "logo_dot",
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Square wave in [-1, 1] with period `2 * cell` along `u`, blended over
/// `transition` units at each edge.
fn smooth_square(u: f64, cell: f64, transition: f64) -> f64 {
    let period = 2.0 * cell;
    let p = (u / period).rem_euclid(1.0);
    let h = ((transition / period) * 0.5).min(0.2);
    // Rising edge at phase 0 (wrapping), falling edge at 0.5.
    let rise = if p < 0.5 { p } else { p - 1.0 };
    let fall = p - 0.5;
    if rise.abs() <= h {
        -1.0 + 2.0 * smoothstep((rise + h) / (2.0 * h))
    } else if fall.abs() <= h {
        1.0 - 2.0 * smoothstep((fall + h) / (2.0 * h))
    } else if p < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Radially blended disc: 1 inside, 0 outside, smooth over `transition`.
fn blob(x: f64, y: f64, cx: f64, cy: f64, radius: f64, transition: f64) -> f64 {
    let d = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
    smoothstep((radius - d) / transition)
}

/// Scalar texture value in [0, 1] at a pixel center.
fn texture_value(kind: TextureKind, x: f64, y: f64, width: f64, height: f64) -> f64 {
    match kind {
        TextureKind::Solid => 0.55,
        TextureKind::Checker => {
            let sx = smooth_square(x + 0.37, 24.0, 5.0);
            let sy = smooth_square(y + 0.73, 24.0, 5.0);
            0.5 + 0.27 * sx * sy
        }
        TextureKind::Stripes => 0.5 + 0.27 * smooth_square(x + 0.35 * y + 0.21, 20.0, 5.0),
        TextureKind::LogoDot => {
            let m = width.min(height);
            let mut v = 0.35;
            v += 0.4 * blob(x, y, 0.3 * width, 0.3 * height, 0.12 * m, 6.0);
            v += 0.4 * blob(x, y, 0.7 * width, 0.45 * height, 0.09 * m, 6.0);
            v += 0.4 * blob(x, y, 0.45 * width, 0.7 * height, 0.15 * m, 6.0);
            v.clamp(0.0, 1.0)
        }
    }
}

/// Full-canvas texture image. The texture continues past the garment mask
/// so that bilinear taps near the garment boundary stay on-texture.
pub fn textured_image(kind: TextureKind, width: usize, height: usize) -> RasterImage {
    RasterImage::from_fn(width, height, |x, y| {
        let v = texture_value(kind, x as f64 + 0.5, y as f64 + 0.5, width as f64, height as f64);
        let r = v as f32;
        let g = (0.25 + 0.5 * v) as f32;
        let b = (1.0 - 0.6 * v) as f32;
        [r, g, b, 1.0]
    })
}

/// A ready-to-warp garment: texture image, support mask, pose and layout.
#[derive(Debug, Clone)]
pub struct GarmentFixture {
    pub image: RasterImage,
    pub mask: BinaryMask,
    pub pose: PoseKeypoints,
    pub layout: PatchLayout,
}

/// Standard upper-garment fixture on the 448×256 canvas: the garment mask
/// is exactly the layout's coverage of the arms-out pose.
pub fn garment_fixture(kind: TextureKind) -> GarmentFixture {
    let pose = t_pose();
    let layout =
        layout_patches(&pose, GarmentKind::Upper, &LayoutParams::default(), FIXTURE_WIDTH, FIXTURE_HEIGHT)
            .expect("fixture pose is complete");
    let mask = layout.coverage_mask(FIXTURE_WIDTH, FIXTURE_HEIGHT);
    let image = textured_image(kind, FIXTURE_WIDTH, FIXTURE_HEIGHT);
    GarmentFixture { image, mask, pose, layout }
}

/// Small identity-warped garment (64×64, all eight patches) for tests that
/// run the erasing pipeline thousands of times.
pub fn small_warped_garment() -> WarpedGarment {
    let pose = small_pose();
    let params = LayoutParams::default();
    let layout = layout_patches(&pose, GarmentKind::Upper, &params, SMALL_SIZE, SMALL_SIZE)
        .expect("small fixture pose is complete");
    let mask = layout.coverage_mask(SMALL_SIZE, SMALL_SIZE);
    let image = textured_image(TextureKind::Checker, SMALL_SIZE, SMALL_SIZE);
    warp_garment(&image, &mask, &pose, &pose, GarmentKind::Upper, &params)
        .expect("small fixture warps onto itself")
}

/// A well-conditioned random quad of roughly the given scale: a jittered
/// square, re-drawn until clearly non-degenerate.
pub fn random_quad(rng: &mut ChaCha8Rng, scale: f64) -> Quad {
    loop {
        let jitter = 0.18 * scale;
        let tx = rng.random_range(0.0..0.15 * scale);
        let ty = rng.random_range(0.0..0.15 * scale);
        let base = [(0.0, 0.0), (scale, 0.0), (scale, scale), (0.0, scale)];
        let mut corners = [Point2::new(0.0, 0.0); 4];
        for (c, (bx, by)) in corners.iter_mut().zip(base.iter()) {
            c.x = bx + tx + rng.random_range(-jitter..jitter);
            c.y = by + ty + rng.random_range(-jitter..jitter);
        }
        if let Ok(quad) = Quad::new(corners, PatchRole::Torso) {
            if quad.signed_area() > 0.25 * scale * scale {
                return quad;
            }
        }
    }
}

/// Seeded uniform features in [-1, 1).
pub fn seeded_features(seed: u64, channels: usize, height: usize, width: usize) -> FeatureMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..channels * height * width).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    FeatureMap::from_raw(channels, height, width, data)
}

/// Seeded conv layer with uniform weights in [-0.5, 0.5) and biases in
/// [-0.25, 0.25).
pub fn seeded_conv(seed: u64, out_channels: usize, in_channels: usize, kernel: usize) -> ConvParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights =
        (0..out_channels * in_channels * kernel * kernel).map(|_| rng.random_range(-0.5f32..0.5)).collect();
    let bias = (0..out_channels).map(|_| rng.random_range(-0.25f32..0.25)).collect();
    ConvParams::new(out_channels, in_channels, kernel, weights, bias)
        .expect("seeded dimensions are consistent")
}

/// Peak signal-to-noise ratio over the RGB channels of masked pixels, in
/// dB against a peak of 1.0. `None` for an empty mask; infinite for
/// identical content.
pub fn masked_psnr(a: &RasterImage, b: &RasterImage, mask: &BinaryMask) -> Option<f64> {
    assert!(
        a.width() == b.width() && a.height() == b.height(),
        "PSNR needs equal-size images"
    );
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for y in 0..a.height() {
        for x in 0..a.width() {
            if !mask.get(x, y) {
                continue;
            }
            let pa = a.pixel(x, y);
            let pb = b.pixel(x, y);
            for c in 0..3 {
                let d = pa[c] as f64 - pb[c] as f64;
                acc += d * d;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let mse = acc / (3 * count) as f64;
    if mse == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(10.0 * (1.0 / mse).log10())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Streaming FNV-1a (64-bit).
#[derive(Debug, Clone)]
pub struct Fnv1a64 {
    state: u64,
}

impl Fnv1a64 {
    pub fn new() -> Self {
        Self { state: FNV_OFFSET }
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.state = (self.state ^ b as u64).wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        self.state
    }
}

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self::new()
    }
}

/// Hash of dimensions plus the little-endian bit patterns of all samples.
pub fn hash_image(image: &RasterImage) -> u64 {
    let mut h = Fnv1a64::new();
    h.update(&(image.width() as u64).to_le_bytes());
    h.update(&(image.height() as u64).to_le_bytes());
    for v in image.data() {
        h.update(&v.to_le_bytes());
    }
    h.finish()
}

pub fn hash_mask(mask: &BinaryMask) -> u64 {
    let mut h = Fnv1a64::new();
    h.update(&(mask.width() as u64).to_le_bytes());
    h.update(&(mask.height() as u64).to_le_bytes());
    for &b in mask.data() {
        h.update(&[b as u8]);
    }
    h.finish()
}

pub fn hash_features(features: &FeatureMap) -> u64 {
    let (c, hh, w) = features.shape();
    let mut h = Fnv1a64::new();
    for dim in [c, hh, w] {
        h.update(&(dim as u64).to_le_bytes());
    }
    for v in features.data() {
        h.update(&v.to_le_bytes());
    }
    h.finish()
}

/// Pinned hash of the checker fixture image.
pub const GOLDEN_CHECKER_IMAGE: u64 = 0xd0aa_2c4e_0a0e_4c99;
/// Pinned hash of the checker fixture mask.
pub const GOLDEN_CHECKER_MASK: u64 = 0x2728_98e9_4725_3865;
/// Pinned hash of the checker garment warped from the arms-out pose to the
/// lowered-arms pose.
pub const GOLDEN_TURNED_WARP_IMAGE: u64 = 0xb3b8_74d6_dfc9_4ef4;
/// Pinned hash of the small garment after seeded erasing (seed 0).
pub const GOLDEN_ERASED_IMAGE: u64 = 0xe2e5_6098_ad89_f38c;

/// One golden-hash comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenEntry {
    pub name: &'static str,
    pub actual: u64,
    pub expected: u64,
}

impl GoldenEntry {
    pub fn matches(&self) -> bool {
        self.actual == self.expected
    }
}

/// Recomputes every pinned artifact hash. Any mismatch means rendering or
/// warping arithmetic changed observable output.
pub fn golden_entries() -> Vec<GoldenEntry> {
    let fixture = garment_fixture(TextureKind::Checker);
    let warped = warp_garment(
        &fixture.image,
        &fixture.mask,
        &fixture.pose,
        &turned_pose(),
        GarmentKind::Upper,
        &LayoutParams::default(),
    )
    .expect("fixture poses warp cleanly");
    let (erased, _) = random_erase(&small_warped_garment(), &EraseConfig::new(0));
    vec![
        GoldenEntry {
            name: "checker_image",
            actual: hash_image(&fixture.image),
            expected: GOLDEN_CHECKER_IMAGE,
        },
        GoldenEntry {
            name: "checker_mask",
            actual: hash_mask(&fixture.mask),
            expected: GOLDEN_CHECKER_MASK,
        },
        GoldenEntry {
            name: "turned_warp_image",
            actual: hash_image(&warped.image),
            expected: GOLDEN_TURNED_WARP_IMAGE,
        },
        GoldenEntry {
            name: "erased_image",
            actual: hash_image(&erased.image),
            expected: GOLDEN_ERASED_IMAGE,
        },
    ]
}
