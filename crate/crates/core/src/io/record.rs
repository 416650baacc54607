//! Self-describing JSON record of a single run.

use serde::{Deserialize, Serialize};

use crate::engine::{SimConfig, SimOutcome};
use crate::error::FormatError;
use crate::geometry::BoundaryPolicy;
use crate::metrics::{RoundMetrics, SimResult, StabilityParams};

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Every N-th round is kept in a record unless the full series is requested.
pub const DEFAULT_SERIES_STRIDE: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: SimConfig,
    pub result: SimResult,
    pub series: Option<Series>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Rounds whose index is a multiple of `stride` are kept.
    pub stride: u64,
    pub rounds: Vec<RoundMetrics>,
}

/// Conventions needed to interpret a record without the binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub heading_convention: String,
    pub update_order: String,
    pub occupancy: String,
    pub ring_members: String,
    pub gap_normalization: String,
    pub measurement_start: String,
    pub percent_units: String,
    pub stability_predicate: String,
    pub stability: StabilityParams,
    pub boundary_policy: BoundaryPolicy,
    pub half_extent: f64,
    /// The world edge clamped at least one move, so results may depend on the world size.
    pub boundary_sensitive: bool,
    pub degenerate_band: bool,
}

impl Metadata {
    pub fn describe(config: &SimConfig, result: &SimResult) -> Self {
        Metadata {
            heading_convention: "compass degrees: 0 = north (+y), clockwise positive".into(),
            update_order: "sequential, reshuffled each round; center rule then dispersion rule per agent".into(),
            occupancy: "a location is empty iff no other active agent is at distance < collision_radius; adversary dispersion skips the check".into(),
            ring_members: "active regular agents only; adversaries excluded".into(),
            gap_normalization: "largest angular gap / 360 degrees (equivalent to the ideal circle of radius delta)".into(),
            measurement_start: "max(first stable round, adversary activation round); 0 if either never happens".into(),
            percent_units: "fraction in [0, 1]".into(),
            stability_predicate: "for `window` consecutive rounds: every regular agent within [delta-epsilon-s, delta+epsilon+s] with s = band_slack_steps * max(c, d), and angular gap CV <= gap_cv_threshold".into(),
            stability: config.stability,
            boundary_policy: config.world.boundary_policy,
            half_extent: config.world.half_extent,
            boundary_sensitive: result.clamp_events > 0,
            degenerate_band: result.degenerate_band,
        }
    }
}

impl RunRecord {
    /// Builds a record, keeping every `stride`-th round (all rounds for stride 1,
    /// none for stride 0).
    pub fn new(config: &SimConfig, outcome: &SimOutcome, stride: u64) -> Self {
        let series = (stride > 0).then(|| Series {
            stride,
            rounds: outcome.series.iter().filter(|m| m.round.is_multiple_of(stride)).copied().collect(),
        });
        RunRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            config: config.clone(),
            result: outcome.result.clone(),
            series,
            metadata: Metadata::describe(config, &outcome.result),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run record serializes")
    }
}

pub fn parse_run_record(text: &str) -> Result<RunRecord, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a configuration from either a bare JSON `SimConfig` or a run record.
pub fn parse_config_json(text: &str) -> Result<SimConfig, FormatError> {
    match parse_run_record(text) {
        Ok(record) => Ok(record.config),
        Err(_) => Ok(serde_json::from_str(text)?),
    }
}
