//! PNG and pose-JSON input/output.
//!
//! All output goes through [`write_atomic`]: files are encoded fully in
//! memory, written to a sibling temp file, and renamed into place, so a
//! crashed or failed run never leaves a partially written artifact.

use crate::error::CliError;
use image::{DynamicImage, GrayImage, ImageFormat, RgbImage, RgbaImage};
use patchwarp::pose::{JointName, Keypoint, PoseKeypoints};
use patchwarp::{BinaryMask, PatchRole, RasterImage};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;

/// Gray levels at or above this count as set mask pixels.
pub const MASK_THRESHOLD: u8 = 128;

/// The only pose schema we accept; see [`parse_pose`].
pub const POSE_FORMAT: &str = "coco18";

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn from_u8(v: u8) -> f32 {
    v as f32 / 255.0
}

pub fn load_rgba(path: &Path) -> Result<RasterImage, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let decoded = image::load_from_memory(&bytes)
        .map_err(|e| CliError::Input(format!("cannot decode {}: {e}", path.display())))?;
    let rgba = decoded.to_rgba8();
    let mut out = RasterImage::new(rgba.width() as usize, rgba.height() as usize);
    for (x, y, pixel) in rgba.enumerate_pixels() {
        let [r, g, b, a] = pixel.0;
        out.set_pixel(x as usize, y as usize, [from_u8(r), from_u8(g), from_u8(b), from_u8(a)]);
    }
    Ok(out)
}

pub fn load_mask(path: &Path) -> Result<BinaryMask, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let decoded = image::load_from_memory(&bytes)
        .map_err(|e| CliError::Input(format!("cannot decode {}: {e}", path.display())))?;
    let gray = decoded.to_luma8();
    Ok(BinaryMask::from_fn(gray.width() as usize, gray.height() as usize, |x, y| {
        gray.get_pixel(x as u32, y as u32).0[0] >= MASK_THRESHOLD
    }))
}

pub fn save_rgba(path: &Path, image: &RasterImage) -> Result<(), CliError> {
    let mut buf = Vec::with_capacity(image.width() * image.height() * 4);
    for y in 0..image.height() {
        for x in 0..image.width() {
            buf.extend(image.pixel(x, y).map(to_u8));
        }
    }
    let rgba = RgbaImage::from_raw(image.width() as u32, image.height() as u32, buf)
        .expect("buffer sized to the image");
    write_atomic(path, &encode_png(DynamicImage::ImageRgba8(rgba))?)
}

pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<(), CliError> {
    let buf: Vec<u8> = (0..mask.height())
        .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
        .map(|(x, y)| if mask.get(x, y) { 255 } else { 0 })
        .collect();
    let gray = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, buf)
        .expect("buffer sized to the mask");
    write_atomic(path, &encode_png(DynamicImage::ImageLuma8(gray))?)
}

/// Saves a packed RGB byte buffer (row-major, 3 bytes per pixel).
pub fn save_rgb(path: &Path, width: usize, height: usize, buf: Vec<u8>) -> Result<(), CliError> {
    let rgb = RgbImage::from_raw(width as u32, height as u32, buf)
        .expect("buffer sized to the canvas");
    write_atomic(path, &encode_png(DynamicImage::ImageRgb8(rgb))?)
}

fn encode_png(image: DynamicImage) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    image
        .write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)
        .map_err(|e| CliError::Output(format!("png encoding failed: {e}")))?;
    Ok(bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let failed = |e: std::io::Error| CliError::Output(format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, bytes).map_err(failed)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        failed(e)
    })
}

#[derive(Deserialize)]
struct PoseFile {
    format: String,
    keypoints: BTreeMap<String, Vec<f64>>,
}

/// Parses the name-keyed keypoint schema:
/// `{ "format": "coco18", "keypoints": { "l_shoulder": [x, y, confidence], ... } }`.
/// Names that are not one of the fourteen known joints are ignored.
pub fn parse_pose(text: &str) -> Result<PoseKeypoints, String> {
    let file: PoseFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if file.format != POSE_FORMAT {
        return Err(format!("pose format is {:?}, expected {POSE_FORMAT:?}", file.format));
    }
    let mut pose = PoseKeypoints::new();
    for (name, values) in &file.keypoints {
        let Some(joint) = JointName::from_name(name) else { continue };
        let &[x, y, confidence] = values.as_slice() else {
            return Err(format!("keypoint {name:?} must be [x, y, confidence]"));
        };
        pose.set(joint, Keypoint::new(x, y, confidence));
    }
    Ok(pose)
}

pub fn load_pose(path: &Path) -> Result<PoseKeypoints, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_pose(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Serializes a pose back into the schema [`parse_pose`] reads.
pub fn pose_to_json(pose: &PoseKeypoints) -> serde_json::Value {
    let mut keypoints = serde_json::Map::new();
    for (joint, k) in pose.iter() {
        keypoints.insert(joint.name().to_string(), serde_json::json!([k.x, k.y, k.confidence]));
    }
    serde_json::json!({ "format": POSE_FORMAT, "keypoints": keypoints })
}

/// Fixed palette for the provenance visualization; unset pixels stay black.
pub fn role_color(role: PatchRole) -> [u8; 3] {
    match role {
        PatchRole::Torso => [230, 60, 60],
        PatchRole::Neck => [250, 220, 80],
        PatchRole::LUpperArm => [70, 170, 70],
        PatchRole::RUpperArm => [70, 110, 210],
        PatchRole::LLowerArm => [150, 230, 150],
        PatchRole::RLowerArm => [150, 190, 245],
        PatchRole::LHip => [200, 120, 200],
        PatchRole::RHip => [240, 160, 80],
        PatchRole::Waist => [130, 220, 220],
        PatchRole::LUpperLeg => [170, 120, 60],
        PatchRole::RUpperLeg => [90, 60, 160],
        PatchRole::LLowerLeg => [220, 200, 160],
        PatchRole::RLowerLeg => [120, 120, 120],
        PatchRole::Seat => [250, 130, 160],
    }
}
