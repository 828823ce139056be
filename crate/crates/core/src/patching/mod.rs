//! Pose-guided patch routing: garment pixels travel between poses as a set
//! of small quadrilateral patches.
//!
//! The stages, each usable on its own:
//!
//! 1. [`layout_patches`] places quads over a pose (torso, neck, arm
//!    segments, hip extensions; leg analogues for lower garments).
//! 2. [`extract_and_normalize`] warps every source quad into a fixed 64×64
//!    template patch.
//! 3. [`denormalize_patches`] warps template patches onto the quads of a
//!    second pose.
//! 4. [`stitch`] composites the warped patches back into one garment image
//!    in a fixed depth order.
//!
//! [`warp_garment`] runs all four.

mod layout;
mod warp;

pub use layout::{layout_patches, LayoutParams, PatchLayout, MIN_SEGMENT_LEN};
pub use warp::{
    denormalize_patches, extract_and_normalize, stitch, template_quad, warp_garment,
    NormalizedPatch, PatchTransform, ProvenanceMap, StitchResult, WarpedGarment, WarpedPatch,
    TEMPLATE_SIZE,
};

use crate::geometry::GeometryError;
use crate::pose::{JointName, PoseError};
use crate::role::PatchRole;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatchError {
    #[error("required joint {joint} is missing or below the confidence threshold")]
    MissingJoint { joint: JointName },
    #[error("patch {role} collapses to a degenerate quad for this pose")]
    DegenerateLayout { role: PatchRole },
    #[error("no target quad for patch role {role}")]
    RoleMismatch { role: PatchRole },
    #[error("size mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
