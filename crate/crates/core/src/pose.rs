//! Body joints and pose keypoint containers.
//!
//! Joint naming follows the usual 2D-pose convention (neck, paired
//! shoulder/elbow/wrist/hip/knee/ankle, plus the nose). Each keypoint carries
//! a confidence score; downstream layout code treats joints below its
//! confidence threshold as absent.

use crate::geometry::Point2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("keypoint {joint} has non-finite coordinates or confidence")]
    NonFinite { joint: JointName },
    #[error("keypoint {joint} at ({x}, {y}) lies outside the canvas margin")]
    OutOfBounds { joint: JointName, x: f64, y: f64 },
}

/// Keypoints may legitimately fall slightly outside the image (an elbow out
/// of frame); bounds validation allows this fraction of the canvas size on
/// every side.
pub const BOUNDS_MARGIN: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointName {
    Nose,
    Neck,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LWrist,
    RWrist,
    LHip,
    RHip,
    LKnee,
    RKnee,
    LAnkle,
    RAnkle,
}

impl JointName {
    pub const COUNT: usize = 14;

    pub const ALL: [JointName; Self::COUNT] = [
        JointName::Nose,
        JointName::Neck,
        JointName::LShoulder,
        JointName::RShoulder,
        JointName::LElbow,
        JointName::RElbow,
        JointName::LWrist,
        JointName::RWrist,
        JointName::LHip,
        JointName::RHip,
        JointName::LKnee,
        JointName::RKnee,
        JointName::LAnkle,
        JointName::RAnkle,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&j| j == self).expect("joint listed in ALL")
    }

    /// Snake_case wire name, as used in pose JSON files.
    pub fn name(self) -> &'static str {
        match self {
            JointName::Nose => "nose",
            JointName::Neck => "neck",
            JointName::LShoulder => "l_shoulder",
            JointName::RShoulder => "r_shoulder",
            JointName::LElbow => "l_elbow",
            JointName::RElbow => "r_elbow",
            JointName::LWrist => "l_wrist",
            JointName::RWrist => "r_wrist",
            JointName::LHip => "l_hip",
            JointName::RHip => "r_hip",
            JointName::LKnee => "l_knee",
            JointName::RKnee => "r_knee",
            JointName::LAnkle => "l_ankle",
            JointName::RAnkle => "r_ankle",
        }
    }

    /// Inverse of [`JointName::name`]; `None` for unrecognized names.
    pub fn from_name(name: &str) -> Option<JointName> {
        Self::ALL.iter().copied().find(|j| j.name() == name)
    }
}

impl std::fmt::Display for JointName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A detected joint position with its detector confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    pub fn point(self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Sparse per-joint keypoint map for one person.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseKeypoints {
    joints: [Option<Keypoint>; JointName::COUNT],
}

impl PoseKeypoints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, joint: JointName, keypoint: Keypoint) {
        self.joints[joint.index()] = Some(keypoint);
    }

    pub fn remove(&mut self, joint: JointName) {
        self.joints[joint.index()] = None;
    }

    pub fn get(&self, joint: JointName) -> Option<Keypoint> {
        self.joints[joint.index()]
    }

    /// The joint's position, if present with confidence of at least
    /// `min_confidence`.
    pub fn reliable(&self, joint: JointName, min_confidence: f64) -> Option<Point2> {
        self.get(joint).filter(|k| k.confidence >= min_confidence).map(Keypoint::point)
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointName, Keypoint)> + '_ {
        JointName::ALL.iter().filter_map(|&j| self.get(j).map(|k| (j, k)))
    }

    /// Rejects non-finite keypoints and keypoints further than
    /// [`BOUNDS_MARGIN`] of the canvas size outside the canvas.
    pub fn validate_bounds(&self, width: f64, height: f64) -> Result<(), PoseError> {
        let (mx, my) = (BOUNDS_MARGIN * width, BOUNDS_MARGIN * height);
        for (joint, k) in self.iter() {
            if !(k.x.is_finite() && k.y.is_finite() && k.confidence.is_finite()) {
                return Err(PoseError::NonFinite { joint });
            }
            if k.x < -mx || k.x > width + mx || k.y < -my || k.y > height + my {
                return Err(PoseError::OutOfBounds { joint, x: k.x, y: k.y });
            }
        }
        Ok(())
    }
}
