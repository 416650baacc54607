//! Agent and protocol-constant types.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{Heading, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Regular,
    Adversary,
}

/// Unique agent identifier. Regular agents come first, then adversaries.
pub type AgentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub pos: Vec2,
    pub heading: Heading,
    /// Adversaries stay off-field until their delay policy releases them.
    pub active: bool,
}

impl AgentState {
    pub fn regular(id: AgentId, pos: Vec2, heading: Heading) -> Self {
        AgentState { id, kind: AgentKind::Regular, pos, heading, active: true }
    }

    pub fn adversary(id: AgentId, pos: Vec2, heading: Heading, active: bool) -> Self {
        AgentState { id, kind: AgentKind::Adversary, pos, heading, active }
    }

    pub fn is_regular(&self) -> bool {
        self.kind == AgentKind::Regular
    }

    pub fn is_adversary(&self) -> bool {
        self.kind == AgentKind::Adversary
    }
}

/// Protocol constants shared by the regular swarm and the adversaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmParams {
    /// Ideal distance from the target.
    pub delta: f64,
    /// Half-width of the stability band around `delta`.
    pub epsilon: f64,
    /// Center Rule step per round.
    pub c: f64,
    /// Dispersion Rule step per round.
    pub d: f64,
    /// Extra clockwise rotation, in degrees, applied on top of the 180° turn.
    pub r: f64,
    /// Adversaries disperse at `d * adversary_disperse_factor`.
    pub adversary_disperse_factor: f64,
    /// Radius within which another agent makes a location non-empty.
    pub collision_radius: f64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        SwarmParams {
            delta: 16.0,
            epsilon: 4.0,
            c: 0.5,
            d: 0.5,
            r: 20.0,
            adversary_disperse_factor: 0.2,
            collision_radius: 1.0,
        }
    }
}

impl SwarmParams {
    pub fn band_inner(&self) -> f64 {
        (self.delta - self.epsilon).max(0.0)
    }

    pub fn band_outer(&self) -> f64 {
        self.delta + self.epsilon
    }

    /// Whether a distance to the target lies inside `[δ-ε, δ+ε]`.
    pub fn in_band(&self, dist: f64) -> bool {
        let offset = self.delta - dist;
        offset <= self.epsilon && offset >= -self.epsilon
    }

    pub fn is_degenerate_band(&self) -> bool {
        self.delta <= self.epsilon
    }

    pub fn validate(&self, allow_degenerate_band: bool) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, format!("must be a positive number, got {v}")))
            }
        }
        positive("delta", self.delta)?;
        positive("epsilon", self.epsilon)?;
        positive("c", self.c)?;
        positive("d", self.d)?;
        positive("collision_radius", self.collision_radius)?;
        if !(self.r.is_finite() && (0.0..180.0).contains(&self.r)) {
            return Err(ConfigError::invalid("r", format!("must lie in [0, 180), got {}", self.r)));
        }
        let f = self.adversary_disperse_factor;
        if !(f.is_finite() && f > 0.0 && f <= 1.0) {
            return Err(ConfigError::invalid("adversary_disperse_factor", format!("must lie in (0, 1], got {f}")));
        }
        if self.is_degenerate_band() && !allow_degenerate_band {
            return Err(ConfigError::DegenerateBand { delta: self.delta, epsilon: self.epsilon });
        }
        Ok(())
    }
}
