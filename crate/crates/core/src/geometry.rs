//! Planar primitives shared by the protocol engine and the metrics.
//!
//! Headings use the compass convention: 0° points north (+y) and angles
//! grow clockwise, so a heading of 90° points east (+x).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GeometryError};

/// A point (or displacement) in world units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ORIGIN: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Add for Vec2 {
    type Output = Vec2;

    fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;

    fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Compass heading in degrees, always normalized into `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Heading(f64);

impl Heading {
    pub const NORTH: Heading = Heading(0.0);

    pub fn from_degrees(degrees: f64) -> Self {
        Heading(normalize_degrees(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    /// Unit vector pointing along this heading.
    pub fn unit(self) -> Vec2 {
        let rad = self.0.to_radians();
        Vec2::new(rad.sin(), rad.cos())
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Maps any finite angle into `[0, 360)`.
pub fn normalize_degrees(degrees: f64) -> f64 {
    let wrapped = degrees.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if wrapped >= 360.0 {
        0.0
    } else {
        wrapped
    }
}

pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (b - a).norm()
}

/// Compass heading that points from `from` to `to`.
pub fn heading_towards(from: Vec2, to: Vec2) -> Result<Heading, GeometryError> {
    let delta = to - from;
    if delta.x == 0.0 && delta.y == 0.0 {
        return Err(GeometryError::UndefinedHeading);
    }
    // atan2(x, y) measures from +y towards +x, i.e. compass order.
    Ok(Heading::from_degrees(delta.x.atan2(delta.y).to_degrees()))
}

pub fn rotate_clockwise(h: Heading, amount: f64) -> Heading {
    Heading::from_degrees(h.degrees() + amount)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    #[default]
    Clamp,
}

/// Square world `[-half_extent, half_extent]²` with the target fixed at its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub half_extent: f64,
    pub target: Vec2,
    pub boundary_policy: BoundaryPolicy,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig { half_extent: 50.0, target: Vec2::ORIGIN, boundary_policy: BoundaryPolicy::Clamp }
    }
}

impl WorldConfig {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x.abs() <= self.half_extent && p.y.abs() <= self.half_extent
    }

    /// Applies the boundary policy. The flag reports whether the point had to be moved.
    pub fn confine(&self, p: Vec2) -> (Vec2, bool) {
        match self.boundary_policy {
            BoundaryPolicy::Clamp => {
                let h = self.half_extent;
                let q = Vec2::new(p.x.clamp(-h, h), p.y.clamp(-h, h));
                (q, q != p)
            }
        }
    }
}

/// Displaces `pos` by `units` along `h`, then confines it to the world.
pub fn advance(pos: Vec2, h: Heading, units: f64, world: &WorldConfig) -> Vec2 {
    advance_reporting(pos, h, units, world).0
}

/// Like [`advance`] but also reports whether the boundary clamped the move.
pub fn advance_reporting(pos: Vec2, h: Heading, units: f64, world: &WorldConfig) -> (Vec2, bool) {
    if units == 0.0 {
        return (pos, false);
    }
    world.confine(pos + h.unit().scale(units))
}

/// Area of the stability band `δ-ε ≤ |p| ≤ δ+ε`, equal to `4πδε`.
///
/// Rejects `delta <= epsilon`, where the inner radius would not be positive.
pub fn annulus_area(delta: f64, epsilon: f64) -> Result<f64, ConfigError> {
    if !(delta > 0.0 && epsilon > 0.0) {
        return Err(ConfigError::invalid("delta", "delta and epsilon must be positive"));
    }
    if delta <= epsilon {
        return Err(ConfigError::DegenerateBand { delta, epsilon });
    }
    Ok(4.0 * PI * delta * epsilon)
}

/// Band area with the inner radius clamped at zero. Agrees with
/// [`annulus_area`] whenever `delta > epsilon`; for a degenerate band the
/// region is the disc of radius `δ+ε`.
pub fn clamped_band_area(delta: f64, epsilon: f64) -> f64 {
    let outer = delta + epsilon;
    let inner = (delta - epsilon).max(0.0);
    PI * (outer * outer - inner * inner)
}
