//! Warps garment patches between pose layouts through a fixed-size template.
//!
//! Every patch is resampled by inverse mapping: for each destination pixel
//! center the homography inverse gives a continuous source position, which is
//! sampled bilinearly. Pixels whose source position leaves the patch (or the
//! garment mask) are invalid and written as transparent black; validity is
//! carried in the alpha channel and mirrored in an explicit mask.
//!
//! Resampling treats invalid pixels as transparent black, i.e. premultiplied
//! color. Dividing the blended color by the blended alpha after the lookup
//! restores a convex combination of valid colors only, so garment boundaries
//! do not darken with each warp.

use super::layout::{layout_patches, LayoutParams, PatchLayout};
use super::PatchError;
use crate::exec;
use crate::geometry::{estimate_homography, Homography, Point2, Quad};
use crate::pose::PoseKeypoints;
use crate::raster::{BinaryMask, RasterImage};
use crate::role::{GarmentKind, PatchRole};

/// Side length of the square template every patch is normalized to.
pub const TEMPLATE_SIZE: usize = 64;

/// The template frame: an axis-aligned square at the origin.
pub fn template_quad(role: PatchRole) -> Quad {
    Quad::rect(0.0, 0.0, TEMPLATE_SIZE as f64, TEMPLATE_SIZE as f64, role)
}

/// A patch resampled into the template frame.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPatch {
    pub role: PatchRole,
    /// 64×64 RGBA; alpha 1 marks valid pixels, invalid pixels are all-zero.
    pub image: RasterImage,
    /// Maps source-image coordinates into the template frame.
    pub src_to_norm: Homography,
}

/// A template patch warped onto a target quad, on a full-size canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedPatch {
    pub role: PatchRole,
    pub image: RasterImage,
    pub mask: BinaryMask,
    /// Maps template coordinates onto the target canvas.
    pub norm_to_target: Homography,
}

/// Which patch supplied each output pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvenanceMap {
    width: usize,
    height: usize,
    data: Vec<Option<PatchRole>>,
}

impl ProvenanceMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![None; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<PatchRole> {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, role: Option<PatchRole>) {
        self.data[y * self.width + x] = role;
    }

    pub fn data(&self) -> &[Option<PatchRole>] {
        &self.data
    }
}

/// Composited warp output plus per-pixel provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchResult {
    pub image: RasterImage,
    pub mask: BinaryMask,
    pub provenance: ProvenanceMap,
}

/// Per-patch transform chain of one full warp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchTransform {
    pub role: PatchRole,
    pub src_to_norm: Homography,
    pub norm_to_target: Homography,
    /// Combined deformation, `norm_to_target · src_to_norm`.
    pub src_to_target: Homography,
}

/// Everything produced by [`warp_garment`]: the stitched result and the
/// intermediate patches, kept so callers can re-composite subsets (patch
/// dropping) or inspect per-patch transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedGarment {
    pub image: RasterImage,
    pub mask: BinaryMask,
    pub provenance: ProvenanceMap,
    pub normalized: Vec<NormalizedPatch>,
    pub patches: Vec<WarpedPatch>,
    pub transforms: Vec<PatchTransform>,
}

impl WarpedGarment {
    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }
}

/// Resamples every layout quad of `image` into a 64×64 template patch.
///
/// A template pixel is valid iff its source position falls inside the quad
/// and on a set garment-mask pixel (mask looked up at the containing pixel).
pub fn extract_and_normalize(
    image: &RasterImage,
    mask: &BinaryMask,
    layout: &PatchLayout,
) -> Result<Vec<NormalizedPatch>, PatchError> {
    check_dims(image, mask.width(), mask.height())?;
    let mut patches = Vec::with_capacity(layout.quads().len());
    for quad in layout.quads() {
        let role = quad.role();
        let src_to_norm = estimate_homography(quad, &template_quad(role))?;
        let norm_to_src = src_to_norm.invert()?;

        let mut data = vec![0.0f32; TEMPLATE_SIZE * TEMPLATE_SIZE * 4];
        exec::for_each_chunk_mut(&mut data, TEMPLATE_SIZE * 4, |y, row| {
            for x in 0..TEMPLATE_SIZE {
                let center = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let Ok(p) = norm_to_src.apply(center) else { continue };
                if !quad.contains(p) {
                    continue;
                }
                let (mx, my) = (p.x.floor(), p.y.floor());
                if mx < 0.0 || my < 0.0 || mx >= mask.width() as f64 || my >= mask.height() as f64 {
                    continue;
                }
                if !mask.get(mx as usize, my as usize) {
                    continue;
                }
                let rgba = image.bilinear(p.x, p.y);
                row[4 * x..4 * x + 3].copy_from_slice(&rgba[..3]);
                row[4 * x + 3] = 1.0;
            }
        });
        patches.push(NormalizedPatch {
            role,
            image: RasterImage::from_raw(TEMPLATE_SIZE, TEMPLATE_SIZE, data),
            src_to_norm,
        });
    }
    Ok(patches)
}

/// Warps template patches onto the same-role quads of `target`, rendering
/// each onto a `width`×`height` canvas.
///
/// A canvas pixel is valid iff it maps into the template square [0, 64]² and
/// the bilinear template lookup has positive alpha. Errors with
/// [`PatchError::RoleMismatch`] when `target` lacks a patch's role.
pub fn denormalize_patches(
    patches: &[NormalizedPatch],
    target: &PatchLayout,
    width: usize,
    height: usize,
) -> Result<Vec<WarpedPatch>, PatchError> {
    let side = TEMPLATE_SIZE as f64;
    let mut out = Vec::with_capacity(patches.len());
    for patch in patches {
        let role = patch.role;
        let quad = *target.get(role).ok_or(PatchError::RoleMismatch { role })?;
        let norm_to_target = estimate_homography(&template_quad(role), &quad)?;
        let target_to_norm = norm_to_target.invert()?;

        // Only pixels under the quad's bounding box can be valid.
        let (lo, hi) = quad.bounds();
        let x0 = (lo.x.floor().max(0.0) as usize).min(width);
        let y0 = (lo.y.floor().max(0.0) as usize).min(height);
        let x1 = (hi.x.ceil().max(0.0) as usize).min(width);
        let y1 = (hi.y.ceil().max(0.0) as usize).min(height);
        let bw = x1.saturating_sub(x0);
        let bh = y1.saturating_sub(y0);

        let rows = exec::map_indexed(bh, |i| {
            let y = y0 + i;
            let mut colors = vec![0.0f32; bw * 4];
            let mut valid = vec![false; bw];
            for (j, x) in (x0..x1).enumerate() {
                let center = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
                let Ok(p) = target_to_norm.apply(center) else { continue };
                if p.x < 0.0 || p.x > side || p.y < 0.0 || p.y > side {
                    continue;
                }
                let s = patch.image.bilinear(p.x, p.y);
                if s[3] > 0.0 {
                    colors[4 * j] = s[0] / s[3];
                    colors[4 * j + 1] = s[1] / s[3];
                    colors[4 * j + 2] = s[2] / s[3];
                    colors[4 * j + 3] = 1.0;
                    valid[j] = true;
                }
            }
            (colors, valid)
        });

        let mut image = RasterImage::new(width, height);
        let mut mask = BinaryMask::new(width, height);
        for (i, (colors, valid)) in rows.into_iter().enumerate() {
            let y = y0 + i;
            let row_start = (y * width + x0) * 4;
            image.data_mut()[row_start..row_start + bw * 4].copy_from_slice(&colors);
            for (j, &v) in valid.iter().enumerate() {
                mask.set(x0 + j, y, v);
            }
        }
        out.push(WarpedPatch { role, image, mask, norm_to_target });
    }
    Ok(out)
}

/// Composites warped patches into one garment image.
///
/// Patches are painted back-to-front in the fixed depth order
/// [`PatchRole::Z_ORDER`] — limbs over torso, trims last — so overlaps
/// resolve deterministically regardless of input order. Provenance records
/// the topmost patch at each pixel.
pub fn stitch(
    patches: &[WarpedPatch],
    width: usize,
    height: usize,
) -> Result<StitchResult, PatchError> {
    for patch in patches {
        check_dims(&patch.image, width, height)?;
        if patch.mask.width() != width || patch.mask.height() != height {
            return Err(PatchError::DimensionMismatch {
                expected_width: width,
                expected_height: height,
                width: patch.mask.width(),
                height: patch.mask.height(),
            });
        }
    }
    let mut order: Vec<&WarpedPatch> = patches.iter().collect();
    order.sort_by_key(|p| p.role.z_index());

    let rows = exec::map_indexed(height, |y| {
        let mut colors = vec![0.0f32; width * 4];
        let mut valid = vec![false; width];
        let mut provenance = vec![None; width];
        for x in 0..width {
            // Front-to-back: the first patch that covers the pixel wins.
            for patch in order.iter().rev() {
                if patch.mask.get(x, y) {
                    let rgba = patch.image.pixel(x, y);
                    colors[4 * x..4 * x + 4].copy_from_slice(&rgba);
                    valid[x] = true;
                    provenance[x] = Some(patch.role);
                    break;
                }
            }
        }
        (colors, valid, provenance)
    });

    let mut image = RasterImage::new(width, height);
    let mut mask = BinaryMask::new(width, height);
    let mut provenance = ProvenanceMap::new(width, height);
    for (y, (colors, valid, prov)) in rows.into_iter().enumerate() {
        image.data_mut()[y * width * 4..(y + 1) * width * 4].copy_from_slice(&colors);
        for x in 0..width {
            mask.set(x, y, valid[x]);
            provenance.set(x, y, prov[x]);
        }
    }
    Ok(StitchResult { image, mask, provenance })
}

/// Full patch-routed warp: lay out both poses, normalize each source patch,
/// warp it onto the target layout and stitch.
///
/// The output canvas has the source image's dimensions. Patches whose role
/// has no quad in the target layout (a joint visible in the source pose but
/// not the target) are extracted but not warped.
pub fn warp_garment(
    image: &RasterImage,
    mask: &BinaryMask,
    source_pose: &PoseKeypoints,
    target_pose: &PoseKeypoints,
    garment: GarmentKind,
    params: &LayoutParams,
) -> Result<WarpedGarment, PatchError> {
    let (width, height) = (image.width(), image.height());
    check_dims(image, mask.width(), mask.height())?;
    let source_layout = layout_patches(source_pose, garment, params, width, height)?;
    let target_layout = layout_patches(target_pose, garment, params, width, height)?;

    let normalized = extract_and_normalize(image, mask, &source_layout)?;
    let transferable: Vec<NormalizedPatch> = normalized
        .iter()
        .filter(|p| target_layout.get(p.role).is_some())
        .cloned()
        .collect();
    let patches = denormalize_patches(&transferable, &target_layout, width, height)?;
    let stitched = stitch(&patches, width, height)?;

    let transforms = transferable
        .iter()
        .zip(patches.iter())
        .map(|(n, w)| {
            debug_assert_eq!(n.role, w.role);
            PatchTransform {
                role: n.role,
                src_to_norm: n.src_to_norm,
                norm_to_target: w.norm_to_target,
                src_to_target: w.norm_to_target.compose(&n.src_to_norm),
            }
        })
        .collect();

    Ok(WarpedGarment {
        image: stitched.image,
        mask: stitched.mask,
        provenance: stitched.provenance,
        normalized,
        patches,
        transforms,
    })
}

fn check_dims(image: &RasterImage, width: usize, height: usize) -> Result<(), PatchError> {
    if image.width() != width || image.height() != height {
        return Err(PatchError::DimensionMismatch {
            expected_width: width,
            expected_height: height,
            width: image.width(),
            height: image.height(),
        });
    }
    Ok(())
}
