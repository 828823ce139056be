use std::fmt;

/// Semantic role of a garment patch.
///
/// The upper-garment layout uses the first eight roles; the lower-garment
/// layout mirrors the construction over hip/knee/ankle segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatchRole {
    Torso,
    Neck,
    LUpperArm,
    RUpperArm,
    LLowerArm,
    RLowerArm,
    LHip,
    RHip,
    Waist,
    LUpperLeg,
    RUpperLeg,
    LLowerLeg,
    RLowerLeg,
    Seat,
}

impl PatchRole {
    /// Compositing order used by `stitch`: later roles overwrite earlier ones.
    /// Upper garments: torso, hips, upper arms, lower arms, neck. Lower
    /// garments mirror this as seat, legs, waist.
    pub const Z_ORDER: [PatchRole; 14] = [
        PatchRole::Torso,
        PatchRole::LHip,
        PatchRole::RHip,
        PatchRole::Seat,
        PatchRole::LUpperLeg,
        PatchRole::RUpperLeg,
        PatchRole::LLowerLeg,
        PatchRole::RLowerLeg,
        PatchRole::LUpperArm,
        PatchRole::RUpperArm,
        PatchRole::LLowerArm,
        PatchRole::RLowerArm,
        PatchRole::Neck,
        PatchRole::Waist,
    ];

    /// Position in [`Self::Z_ORDER`].
    pub fn z_index(self) -> usize {
        Self::Z_ORDER.iter().position(|&r| r == self).unwrap()
    }

    pub fn is_arm(self) -> bool {
        matches!(
            self,
            PatchRole::LUpperArm | PatchRole::RUpperArm | PatchRole::LLowerArm | PatchRole::RLowerArm
        )
    }

    /// Stable snake_case name, used in file names and reports.
    pub fn name(self) -> &'static str {
        match self {
            PatchRole::Torso => "torso",
            PatchRole::Neck => "neck",
            PatchRole::LUpperArm => "l_upper_arm",
            PatchRole::RUpperArm => "r_upper_arm",
            PatchRole::LLowerArm => "l_lower_arm",
            PatchRole::RLowerArm => "r_lower_arm",
            PatchRole::LHip => "l_hip",
            PatchRole::RHip => "r_hip",
            PatchRole::Waist => "waist",
            PatchRole::LUpperLeg => "l_upper_leg",
            PatchRole::RUpperLeg => "r_upper_leg",
            PatchRole::LLowerLeg => "l_lower_leg",
            PatchRole::RLowerLeg => "r_lower_leg",
            PatchRole::Seat => "seat",
        }
    }
}

impl fmt::Display for PatchRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which part of the body a garment covers, selecting the patch layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GarmentKind {
    Upper,
    Lower,
    Full,
}

impl fmt::Display for GarmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GarmentKind::Upper => "upper",
            GarmentKind::Lower => "lower",
            GarmentKind::Full => "full",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_order_covers_every_role_once() {
        let mut seen = PatchRole::Z_ORDER.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 14);
    }

    #[test]
    fn arm_roles() {
        assert!(PatchRole::LUpperArm.is_arm());
        assert!(PatchRole::RLowerArm.is_arm());
        assert!(!PatchRole::Torso.is_arm());
        assert!(!PatchRole::LHip.is_arm());
    }
}
