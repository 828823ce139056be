//! Patch-routed garment warping toolkit.
//!
//! The pipeline splits a garment into body-joint-anchored quadrilateral
//! patches, removes their spatial information by perspective-warping each one
//! into a fixed 64×64 template, re-warps the templates onto a target pose and
//! stitches them into a warped garment. On top of that sit the training-time
//! building blocks that consume the warped garment: random erasing,
//! misalignment mask algebra with feature inpainting, the spatially-adaptive
//! modulation kernel with verified gradients, and the loss arithmetic.
//!
//! Everything is deterministic: all randomness flows from explicit seeds and
//! the output of every operation is identical whether or not the `parallel`
//! feature (rayon row/channel parallelism) is enabled.

pub mod alignment;
pub mod augment;
mod exec;
pub mod fixtures;
pub mod geometry;
pub mod metrics;
pub mod modulation;
pub mod patching;
pub mod pose;
pub mod raster;
pub mod role;
pub mod selfcheck;

pub use geometry::{estimate_homography, GeometryError, Homography, Point2, Quad};
pub use raster::{BinaryMask, FeatureMap, RasterImage, SoftMask};
pub use role::{GarmentKind, PatchRole};
