//! Places garment patch quads over a pose.
//!
//! Anchor joints (shoulders and hips for upper garments, hips and knees for
//! lower ones) are required; their absence is an error. Peripheral patches —
//! neck, arm and lower-leg segments — are silently skipped when their joints
//! are missing or unreliable, the normal situation for partially occluded
//! people.

use super::PatchError;
use crate::geometry::{Point2, Quad};
use crate::pose::{JointName, PoseKeypoints};
use crate::raster::BinaryMask;
use crate::role::{GarmentKind, PatchRole};

/// Limb segments shorter than this collapse to degenerate quads.
pub const MIN_SEGMENT_LEN: f64 = 1e-6;

/// Tunables for quad placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// Limb quad width as a fraction of the segment length.
    pub width_factor: f64,
    /// Keypoints below this confidence are treated as absent.
    pub min_confidence: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self { width_factor: 0.45, min_confidence: 0.1 }
    }
}

/// The set of source or target quads for one garment on one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLayout {
    garment: GarmentKind,
    quads: Vec<Quad>,
}

impl PatchLayout {
    pub fn garment(&self) -> GarmentKind {
        self.garment
    }

    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn get(&self, role: PatchRole) -> Option<&Quad> {
        self.quads.iter().find(|q| q.role() == role)
    }

    pub fn roles(&self) -> impl Iterator<Item = PatchRole> + '_ {
        self.quads.iter().map(|q| q.role())
    }

    /// Pixels whose center falls inside at least one quad.
    pub fn coverage_mask(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| {
            let center = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
            self.quads.iter().any(|q| q.contains(center))
        })
    }
}

/// Builds the patch layout for `garment` over `pose`.
///
/// The pose is bounds-checked against the canvas first. Patch quads may
/// extend past the canvas; out-of-canvas parts simply contribute no pixels.
pub fn layout_patches(
    pose: &PoseKeypoints,
    garment: GarmentKind,
    params: &LayoutParams,
    canvas_width: usize,
    canvas_height: usize,
) -> Result<PatchLayout, PatchError> {
    pose.validate_bounds(canvas_width as f64, canvas_height as f64)?;
    let quads = match garment {
        GarmentKind::Upper => upper_quads(pose, params)?,
        GarmentKind::Lower => lower_quads(pose, params)?,
        GarmentKind::Full => {
            let mut quads = upper_quads(pose, params)?;
            quads.extend(lower_quads(pose, params)?);
            quads
        }
    };
    Ok(PatchLayout { garment, quads })
}

fn upper_quads(pose: &PoseKeypoints, params: &LayoutParams) -> Result<Vec<Quad>, PatchError> {
    let ls = require(pose, JointName::LShoulder, params)?;
    let rs = require(pose, JointName::RShoulder, params)?;
    let lh = require(pose, JointName::LHip, params)?;
    let rh = require(pose, JointName::RHip, params)?;

    let mut quads = vec![oriented_quad([ls, rs, rh, lh], PatchRole::Torso)?];

    if let Some(neck) = pose.reliable(JointName::Neck, params.min_confidence) {
        let shoulder_dist = ls.distance(rs);
        quads.push(centered_rect(neck, 0.6 * shoulder_dist, 0.35 * shoulder_dist, PatchRole::Neck)?);
    }

    let arm_segments = [
        (PatchRole::LUpperArm, JointName::LShoulder, JointName::LElbow),
        (PatchRole::RUpperArm, JointName::RShoulder, JointName::RElbow),
        (PatchRole::LLowerArm, JointName::LElbow, JointName::LWrist),
        (PatchRole::RLowerArm, JointName::RElbow, JointName::RWrist),
    ];
    for (role, from, to) in arm_segments {
        let (Some(a), Some(b)) = (
            pose.reliable(from, params.min_confidence),
            pose.reliable(to, params.min_confidence),
        ) else {
            continue;
        };
        quads.push(limb_quad(a, b, params.width_factor, role)?);
    }

    // Hip extensions carry the garment hem: half a hip-width wide, hanging
    // below each hip by 40% of the torso height.
    let mid_shoulder = midpoint(ls, rs);
    let mid_hip = midpoint(lh, rh);
    let torso_height = mid_shoulder.distance(mid_hip);
    let hip_dist = lh.distance(rh);
    for (role, hip) in [(PatchRole::LHip, lh), (PatchRole::RHip, rh)] {
        quads.push(anchored_rect(hip, 0.5 * hip_dist, 0.4 * torso_height, role)?);
    }

    Ok(quads)
}

fn lower_quads(pose: &PoseKeypoints, params: &LayoutParams) -> Result<Vec<Quad>, PatchError> {
    let lh = require(pose, JointName::LHip, params)?;
    let rh = require(pose, JointName::RHip, params)?;
    let lk = require(pose, JointName::LKnee, params)?;
    let rk = require(pose, JointName::RKnee, params)?;

    let mut quads = vec![oriented_quad([lh, rh, rk, lk], PatchRole::Seat)?];

    let hip_dist = lh.distance(rh);
    quads.push(centered_rect(midpoint(lh, rh), 0.6 * hip_dist, 0.35 * hip_dist, PatchRole::Waist)?);

    quads.push(limb_quad(lh, lk, params.width_factor, PatchRole::LUpperLeg)?);
    quads.push(limb_quad(rh, rk, params.width_factor, PatchRole::RUpperLeg)?);

    let shin_segments = [
        (PatchRole::LLowerLeg, lk, JointName::LAnkle),
        (PatchRole::RLowerLeg, rk, JointName::RAnkle),
    ];
    for (role, knee, ankle_joint) in shin_segments {
        let Some(ankle) = pose.reliable(ankle_joint, params.min_confidence) else {
            continue;
        };
        quads.push(limb_quad(knee, ankle, params.width_factor, role)?);
    }

    Ok(quads)
}

fn require(
    pose: &PoseKeypoints,
    joint: JointName,
    params: &LayoutParams,
) -> Result<Point2, PatchError> {
    pose.reliable(joint, params.min_confidence).ok_or(PatchError::MissingJoint { joint })
}

fn midpoint(a: Point2, b: Point2) -> Point2 {
    Point2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
}

/// Rectangle of the segment from `a` to `b`, `width_factor * length` wide.
fn limb_quad(a: Point2, b: Point2, width_factor: f64, role: PatchRole) -> Result<Quad, PatchError> {
    let len = a.distance(b);
    if len < MIN_SEGMENT_LEN {
        return Err(PatchError::DegenerateLayout { role });
    }
    let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
    let (nx, ny) = (-uy, ux);
    let h = 0.5 * width_factor * len;
    Quad::new(
        [
            Point2::new(a.x - h * nx, a.y - h * ny),
            Point2::new(b.x - h * nx, b.y - h * ny),
            Point2::new(b.x + h * nx, b.y + h * ny),
            Point2::new(a.x + h * nx, a.y + h * ny),
        ],
        role,
    )
    .map_err(|_| PatchError::DegenerateLayout { role })
}

/// Quad from four corner joints. A mirrored pose reverses the winding, so
/// retry with reversed corner order before giving up.
fn oriented_quad(corners: [Point2; 4], role: PatchRole) -> Result<Quad, PatchError> {
    Quad::new(corners, role)
        .or_else(|_| Quad::new([corners[3], corners[2], corners[1], corners[0]], role))
        .map_err(|_| PatchError::DegenerateLayout { role })
}

fn centered_rect(center: Point2, width: f64, height: f64, role: PatchRole) -> Result<Quad, PatchError> {
    if width < MIN_SEGMENT_LEN || height < MIN_SEGMENT_LEN {
        return Err(PatchError::DegenerateLayout { role });
    }
    Ok(Quad::rect(center.x - width / 2.0, center.y - height / 2.0, width, height, role))
}

/// Rectangle hanging below `anchor`, horizontally centered on it.
fn anchored_rect(anchor: Point2, width: f64, height: f64, role: PatchRole) -> Result<Quad, PatchError> {
    if width < MIN_SEGMENT_LEN || height < MIN_SEGMENT_LEN {
        return Err(PatchError::DegenerateLayout { role });
    }
    Ok(Quad::rect(anchor.x - width / 2.0, anchor.y, width, height, role))
}
