//! Flat 2D primitives shared by every layer: vectors, halfspaces, boxes, disks.
//!
//! All operations are pure functions over immutable values. Absolute tolerance
//! for this module is 1e-12.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2D column vector. Components are finite in every value accepted or
/// produced by public operations; serialized as a `[x, y]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Largest component magnitude.
    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Unit vector in the same direction, or an error for the zero vector.
    pub fn normalized(self) -> Result<Vec2> {
        let len = self.norm();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(self * (1.0 / len))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Counterclockwise rotation by `beta` radians. Preserves the Euclidean norm.
pub fn rotate(v: Vec2, beta: f64) -> Vec2 {
    let (s, c) = beta.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Halfspace `{ v : normal . v >= offset }` with a unit normal. The feasible
/// side is the side the normal points into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Vec2,
    offset: f64,
}

impl Hyperplane {
    /// Normalizes the normal at construction; the offset is rescaled by the
    /// same factor so the halfspace is unchanged.
    pub fn new(normal: Vec2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if len == 0.0 || !len.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidParameter(
                "hyperplane needs a nonzero finite normal and finite offset".into(),
            ));
        }
        Ok(Hyperplane {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    pub fn normal(&self) -> Vec2 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed residual `normal . v - offset`; >= 0 on the feasible side.
    pub fn residual(&self, v: Vec2) -> f64 {
        self.normal.dot(v) - self.offset
    }
}

/// Projection onto the halfspace: identity when feasible, otherwise drop onto
/// the boundary along the normal (`v - n (n.v - c)` with unit `n`).
pub fn project_halfplane(v: Vec2, h: &Hyperplane) -> Vec2 {
    let r = h.residual(v);
    if r >= 0.0 {
        v
    } else {
        v - h.normal() * r
    }
}

/// Axis-aligned box `[lower.x, upper.x] x [lower.y, upper.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    lower: Vec2,
    upper: Vec2,
}

impl Box2 {
    pub fn new(lower: Vec2, upper: Vec2) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower.x > upper.x || lower.y > upper.y {
            return Err(Error::InvalidParameter(format!(
                "box lower bound must not exceed upper bound: {lower:?} vs {upper:?}"
            )));
        }
        Ok(Box2 { lower, upper })
    }

    /// Symmetric box `[-half, half]^2`.
    pub fn symmetric(half: f64) -> Result<Self> {
        if !(half >= 0.0) || !half.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "symmetric box half-width must be non-negative, got {half}"
            )));
        }
        Box2::new(Vec2::new(-half, -half), Vec2::new(half, half))
    }

    pub fn lower(&self) -> Vec2 {
        self.lower
    }

    pub fn upper(&self) -> Vec2 {
        self.upper
    }

    pub fn contains(&self, v: Vec2) -> bool {
        v.x >= self.lower.x && v.x <= self.upper.x && v.y >= self.lower.y && v.y <= self.upper.y
    }
}

/// Componentwise clamp. Bitwise idempotent.
pub fn project_box(v: Vec2, b: &Box2) -> Vec2 {
    Vec2::new(
        v.x.clamp(b.lower.x, b.upper.x),
        v.y.clamp(b.lower.y, b.upper.y),
    )
}

/// Circular obstacle footprint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !center.is_finite() || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "disk needs finite center and strictly positive radius, got {radius}"
            )));
        }
        Ok(Disk { center, radius })
    }
}
