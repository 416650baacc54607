//! Security metric, stability predicate and per-round observables.
//!
//! The ring is measured over active regular agents only: adversaries are
//! never counted as ring members, otherwise an attacker could close the very
//! gap it opened. Gaps are normalized by angle, which is the same as
//! normalizing arc length by the ideal circle of radius δ.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{clamped_band_area, distance, heading_towards, Vec2};
use crate::model::AgentState;

/// Points closer than this to the target have no meaningful angular position.
const COINCIDENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityParams {
    /// Consecutive rounds the predicate must hold.
    pub window: usize,
    /// Upper bound on the coefficient of variation of the angular gaps.
    pub gap_cv_threshold: f64,
    /// Band widening, in units of the larger per-round step `max(c, d)`, used
    /// when deciding whether an agent has settled. Zero means the exact band.
    pub band_slack_steps: f64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams { window: 10, gap_cv_threshold: 0.75, band_slack_steps: 1.0 }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<(), crate::ConfigError> {
        if self.window == 0 {
            return Err(crate::ConfigError::invalid("stability.window", "must be at least 1"));
        }
        if !(self.gap_cv_threshold.is_finite() && self.gap_cv_threshold > 0.0) {
            return Err(crate::ConfigError::invalid(
                "stability.gap_cv_threshold",
                format!("must be positive, got {}", self.gap_cv_threshold),
            ));
        }
        if !(self.band_slack_steps.is_finite() && self.band_slack_steps >= 0.0) {
            return Err(crate::ConfigError::invalid(
                "stability.band_slack_steps",
                format!("must be non-negative, got {}", self.band_slack_steps),
            ));
        }
        Ok(())
    }
}

/// Observables recorded at the end of every round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    /// Largest angular gap between adjacent regular agents, as a fraction of 360°.
    pub max_gap_fraction: f64,
    /// Coefficient of variation of the angular gaps between regular agents.
    pub gap_cv: f64,
    pub in_band_count: usize,
    /// Regular agents within the band widened by the stability slack.
    pub settled_count: usize,
    pub stable: bool,
    /// Unordered active pairs closer than the collision radius.
    pub collisions: usize,
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config_digest: String,
    /// Largest gap fraction seen once the attack is being measured; 0 if it never was.
    pub percent_access: f64,
    pub first_stable_at: Option<u64>,
    pub adversaries_activated_at: Option<u64>,
    pub total_collisions: u64,
    /// Stability-band area per regular agent.
    pub congestion: f64,
    /// `percent_access` expressed as arc length on the ideal circle.
    pub max_gap_arc_length: f64,
    /// Band area with the inner radius clamped at zero.
    pub band_area: f64,
    /// `4πδε`, reported alongside `band_area` for degenerate bands.
    pub band_area_closed_form: f64,
    pub degenerate_band: bool,
    /// Number of moves that the world boundary clamped.
    pub clamp_events: u64,
}

/// Sorted compass angles (degrees) of `points` about `target`.
/// Points coincident with the target are skipped.
pub fn angular_positions(points: impl IntoIterator<Item = Vec2>, target: Vec2) -> Vec<f64> {
    let mut angles: Vec<f64> = points
        .into_iter()
        .filter(|p| distance(*p, target) > COINCIDENT)
        .filter_map(|p| heading_towards(target, p).ok())
        .map(|h| h.degrees())
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
}

/// Circular differences between consecutive sorted angles, wraparound last.
/// They always sum to 360°. A single angle yields one full-circle gap.
pub fn circular_gaps(sorted: &[f64]) -> Vec<f64> {
    match sorted {
        [] => Vec::new(),
        [_] => vec![360.0],
        _ => {
            let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.push(360.0 - sorted[sorted.len() - 1] + sorted[0]);
            gaps
        }
    }
}

fn ring_positions(agents: &[AgentState]) -> impl Iterator<Item = Vec2> + '_ {
    agents.iter().filter(|a| a.active && a.is_regular()).map(|a| a.pos)
}

pub fn max_gap_fraction_of(points: impl IntoIterator<Item = Vec2>, target: Vec2) -> f64 {
    let gaps = circular_gaps(&angular_positions(points, target));
    match gaps.iter().copied().reduce(f64::max) {
        Some(g) => (g / 360.0).clamp(0.0, 1.0),
        None => 1.0,
    }
}

/// Largest angular gap between active regular agents as a fraction of the circle.
/// With zero or one agent the whole circle is open (1.0).
pub fn max_gap_fraction(agents: &[AgentState], target: Vec2) -> f64 {
    max_gap_fraction_of(ring_positions(agents), target)
}

pub fn gap_cv_of(points: impl IntoIterator<Item = Vec2>, target: Vec2) -> f64 {
    coefficient_of_variation(&circular_gaps(&angular_positions(points, target)))
}

/// Coefficient of variation (population stddev over mean) of the regular ring's gaps.
pub fn gap_cv(agents: &[AgentState], target: Vec2) -> f64 {
    gap_cv_of(ring_positions(agents), target)
}

fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// True iff each of the last `params.window` rounds had every regular agent
/// settled in the (slack-widened) band and a gap CV within threshold.
pub fn detect_stability(history: &[RoundMetrics], population: usize, params: &StabilityParams) -> bool {
    if params.window == 0 || history.len() < params.window {
        return false;
    }
    history[history.len() - params.window..]
        .iter()
        .all(|m| m.settled_count == population && m.gap_cv <= params.gap_cv_threshold)
}

/// Round from which gaps count towards the security metric.
pub fn measurement_start(first_stable_at: Option<u64>, activation: Option<u64>) -> Option<u64> {
    Some(first_stable_at?.max(activation?))
}

/// Running maximum of the gap fraction from the measurement start onwards.
/// Zero if the adversaries never entered or the swarm never stabilized.
pub fn percent_access(per_round: &[RoundMetrics], first_stable_at: Option<u64>, activation: Option<u64>) -> f64 {
    let Some(start) = measurement_start(first_stable_at, activation) else {
        return 0.0;
    };
    per_round.iter().filter(|m| m.round >= start).map(|m| m.max_gap_fraction).fold(0.0, f64::max)
}

/// Stability-band area per regular agent.
pub fn congestion(delta: f64, epsilon: f64, population: usize) -> f64 {
    clamped_band_area(delta, epsilon) / population.max(1) as f64
}

/// O(N²) reference count of active pairs closer than `radius`.
pub fn count_collisions(agents: &[AgentState], radius: f64) -> usize {
    let active: Vec<Vec2> = agents.iter().filter(|a| a.active).map(|a| a.pos).collect();
    let mut count = 0;
    for i in 0..active.len() {
        for j in i + 1..active.len() {
            if distance(active[i], active[j]) < radius {
                count += 1;
            }
        }
    }
    count
}

/// Same count as [`count_collisions`], binning positions into cells of side
/// `radius` so only neighbouring cells are compared.
pub fn count_collisions_binned(agents: &[AgentState], radius: f64) -> usize {
    if radius <= 0.0 {
        return 0;
    }
    let cell_of = |p: Vec2| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<Vec2>> = HashMap::new();
    let mut count = 0;
    for p in agents.iter().filter(|a| a.active).map(|a| a.pos) {
        let (cx, cy) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = cells.get(&(cx + dx, cy + dy)) {
                    count += bucket.iter().filter(|q| distance(p, **q) < radius).count();
                }
            }
        }
        cells.entry((cx, cy)).or_default().push(p);
    }
    count
}
