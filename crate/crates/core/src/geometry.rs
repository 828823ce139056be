//! Points, quadrilaterals and exact 4-point homography estimation.
//!
//! A homography is the 3×3 projective transform relating pixel coordinates of
//! two planar quadrilaterals. With exactly four correspondences the transform
//! is fully determined, so estimation reduces to one 8×8 linear solve; no
//! iterative refinement is involved and results are deterministic.
//!
//! All geometry math runs in f64. Corner solves are ill-conditioned in f32;
//! images and feature tensors elsewhere in the crate stay f32.

use crate::role::PatchRole;
use thiserror::Error;

/// Degeneracy guard on quad areas, in px².
pub const AREA_TOL: f64 = 1e-9;
/// Below this |det| a (normalized) matrix is treated as singular.
pub const DET_TOL: f64 = 1e-12;
/// Below this |h33| the matrix is normalized to unit Frobenius norm instead.
pub const H33_TOL: f64 = 1e-9;
/// Below this |w'| a mapped point is at infinity.
pub const W_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate quad: collinear corners or |area| < {AREA_TOL}")]
    DegenerateQuad,
    #[error("corner coordinates must be finite")]
    NonFinite,
    #[error("homography linear system is singular")]
    SingularSystem,
    #[error("matrix is singular (|det| <= {DET_TOL})")]
    SingularMatrix,
    #[error("point maps to infinity (|w'| <= {W_TOL})")]
    PointAtInfinity,
}

/// A 2D point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// An ordered 4-corner quadrilateral with a semantic role.
///
/// Corners are stored as top-left, top-right, bottom-right, bottom-left in
/// the patch's local frame. In image coordinates (y down) this order gives a
/// strictly positive shoelace area, which construction enforces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    corners: [Point2; 4],
    role: PatchRole,
}

impl Quad {
    /// Validates finiteness, positive signed area and non-collinearity of
    /// every corner triple.
    pub fn new(corners: [Point2; 4], role: PatchRole) -> Result<Self, GeometryError> {
        if corners.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let quad = Self { corners, role };
        if quad.signed_area() < AREA_TOL {
            return Err(GeometryError::DegenerateQuad);
        }
        // Triangle over each corner triple must have area >= AREA_TOL.
        for skip in 0..4 {
            let tri: Vec<Point2> = (0..4).filter(|&i| i != skip).map(|i| corners[i]).collect();
            let cross = (tri[1].x - tri[0].x) * (tri[2].y - tri[0].y)
                - (tri[1].y - tri[0].y) * (tri[2].x - tri[0].x);
            if cross.abs() / 2.0 < AREA_TOL {
                return Err(GeometryError::DegenerateQuad);
            }
        }
        Ok(quad)
    }

    /// Axis-aligned rectangle with the given top-left corner and size.
    pub fn rect(x: f64, y: f64, width: f64, height: f64, role: PatchRole) -> Self {
        assert!(width > 0.0 && height > 0.0, "rect needs positive size");
        Self::new(
            [
                Point2::new(x, y),
                Point2::new(x + width, y),
                Point2::new(x + width, y + height),
                Point2::new(x, y + height),
            ],
            role,
        )
        .expect("positive-size rect is non-degenerate")
    }

    pub fn corners(&self) -> &[Point2; 4] {
        &self.corners
    }

    pub fn role(&self) -> PatchRole {
        self.role
    }

    /// Shoelace area; positive for the stored winding in y-down coordinates.
    pub fn signed_area(&self) -> f64 {
        let c = &self.corners;
        let mut acc = 0.0;
        for i in 0..4 {
            let j = (i + 1) % 4;
            acc += c[i].x * c[j].y - c[j].x * c[i].y;
        }
        acc / 2.0
    }

    /// Even-odd point-in-polygon test; valid for any simple quad.
    pub fn contains(&self, p: Point2) -> bool {
        let c = &self.corners;
        let mut inside = false;
        let mut j = 3;
        for i in 0..4 {
            let (a, b) = (c[i], c[j]);
            if (a.y > p.y) != (b.y > p.y)
                && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
            {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> (Point2, Point2) {
        let xs = self.corners.iter().map(|c| c.x);
        let ys = self.corners.iter().map(|c| c.y);
        (
            Point2::new(xs.clone().fold(f64::INFINITY, f64::min), ys.clone().fold(f64::INFINITY, f64::min)),
            Point2::new(xs.fold(f64::NEG_INFINITY, f64::max), ys.fold(f64::NEG_INFINITY, f64::max)),
        )
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut corners = self.corners;
        for c in &mut corners {
            c.x += dx;
            c.y += dy;
        }
        Self { corners, role: self.role }
    }
}

/// A 3×3 projective transform, stored row-major (entries h11..h33).
///
/// Normalized so that h33 = 1 whenever |h33| > `H33_TOL`; otherwise the
/// matrix is scaled to unit Frobenius norm and the fallback is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [f64; 9],
    frobenius_normalized: bool,
}

impl Homography {
    pub fn identity() -> Self {
        Self { m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], frobenius_normalized: false }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self { m: [1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0], frobenius_normalized: false }
    }

    /// Builds from a row-major matrix, normalizing and checking invertibility.
    pub fn from_matrix(m: [f64; 9]) -> Result<Self, GeometryError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let h = Self::normalized(m);
        if det3(&h.m).abs() <= DET_TOL {
            return Err(GeometryError::SingularMatrix);
        }
        Ok(h)
    }

    fn normalized(m: [f64; 9]) -> Self {
        if m[8].abs() > H33_TOL {
            let mut out = m;
            for v in &mut out {
                *v /= m[8];
            }
            out[8] = 1.0;
            Self { m: out, frobenius_normalized: false }
        } else {
            let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut out = m;
            for v in &mut out {
                *v /= norm;
            }
            Self { m: out, frobenius_normalized: true }
        }
    }

    /// Row-major entries h11..h33.
    pub fn matrix(&self) -> [f64; 9] {
        self.m
    }

    /// True when h33 was too small to scale to 1 and the Frobenius fallback
    /// normalization was applied.
    pub fn is_frobenius_normalized(&self) -> bool {
        self.frobenius_normalized
    }

    /// Homogeneous multiply, then divide by the third coordinate.
    pub fn apply(&self, p: Point2) -> Result<Point2, GeometryError> {
        let m = &self.m;
        let w = m[6] * p.x + m[7] * p.y + m[8];
        if w.abs() <= W_TOL {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(Point2::new(
            (m[0] * p.x + m[1] * p.y + m[2]) / w,
            (m[3] * p.x + m[4] * p.y + m[5]) / w,
        ))
    }

    pub fn invert(&self) -> Result<Self, GeometryError> {
        let m = &self.m;
        let det = det3(m);
        if det.abs() <= DET_TOL {
            return Err(GeometryError::SingularMatrix);
        }
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        let mut inv = adj;
        for v in &mut inv {
            *v /= det;
        }
        Ok(Self::normalized(inv))
    }

    /// `second.compose(&first)` applies `first`, then `second`; the combined
    /// matrix is `second · first`.
    pub fn compose(&self, first: &Homography) -> Homography {
        let a = &self.m;
        let b = &first.m;
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[3 * r + c] =
                    a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c];
            }
        }
        Self::normalized(out)
    }
}

fn det3(m: &[f64; 9]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Combined deformation matrix: `compose(second, first) = second · first`.
pub fn compose(second: &Homography, first: &Homography) -> Homography {
    second.compose(first)
}

/// Estimates the homography mapping `src` corners onto `dst` corners.
///
/// Four correspondences determine the transform exactly, so this solves the
/// 8×8 linear system for h11..h32 (with h33 fixed to 1) directly. Both corner
/// sets are conditioned to zero mean and √2 average radius before the solve
/// and the result is de-conditioned afterwards.
pub fn estimate_homography(src: &Quad, dst: &Quad) -> Result<Homography, GeometryError> {
    let (src_n, t_src) = condition(src.corners());
    let (dst_n, t_dst_inv) = condition_inverse(dst.corners());

    // Rows: h11 x + h12 y + h13 - u (h31 x + h32 y) = u, same pattern for v.
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = src_n[i];
        let (u, v) = dst_n[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    let h = solve8(&mut a).ok_or(GeometryError::SingularSystem)?;
    let h_hat = [h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0];

    let m = mat_mul(&t_dst_inv, &mat_mul(&h_hat, &t_src));
    Homography::from_matrix(m).map_err(|_| GeometryError::SingularSystem)
}

/// Similarity transform taking the corner set to zero centroid and √2 mean
/// radius, applied; returns transformed points and the transform matrix.
fn condition(corners: &[Point2; 4]) -> ([(f64, f64); 4], [f64; 9]) {
    let cx = corners.iter().map(|c| c.x).sum::<f64>() / 4.0;
    let cy = corners.iter().map(|c| c.y).sum::<f64>() / 4.0;
    let mean_dist = corners
        .iter()
        .map(|c| ((c.x - cx).powi(2) + (c.y - cy).powi(2)).sqrt())
        .sum::<f64>()
        / 4.0;
    let s = if mean_dist > 0.0 { std::f64::consts::SQRT_2 / mean_dist } else { 1.0 };
    let pts = [
        (s * (corners[0].x - cx), s * (corners[0].y - cy)),
        (s * (corners[1].x - cx), s * (corners[1].y - cy)),
        (s * (corners[2].x - cx), s * (corners[2].y - cy)),
        (s * (corners[3].x - cx), s * (corners[3].y - cy)),
    ];
    (pts, [s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0])
}

/// Same conditioning, but returns the inverse transform matrix.
fn condition_inverse(corners: &[Point2; 4]) -> ([(f64, f64); 4], [f64; 9]) {
    let (pts, t) = condition(corners);
    let s = t[0];
    let cx = -t[2] / s;
    let cy = -t[5] / s;
    (pts, [1.0 / s, 0.0, cx, 0.0, 1.0 / s, cy, 0.0, 0.0, 1.0])
}

fn mat_mul(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[3 * r + c] = a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c];
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on an 8×9 augmented system.
fn solve8(a: &mut [[f64; 9]; 8]) -> Option<[f64; 8]> {
    for col in 0..8 {
        let pivot_row = (col..8).max_by(|&r1, &r2| {
            a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap()
        })?;
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        for row in (col + 1)..8 {
            let factor = a[row][col] / a[col][col];
            for k in col..9 {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    let mut x = [0.0f64; 8];
    for row in (0..8).rev() {
        let mut acc = a[row][8];
        for k in (row + 1)..8 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
