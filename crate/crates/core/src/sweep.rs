//! Parameter-grid expansion, replicated execution and aggregation.
//!
//! Every (grid point, replication) pair gets its own seed derived from a
//! stable hash, so runs are independent and can be executed in any order on
//! any number of workers. Rows are sorted by digest then replication before
//! anything is reported.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{run_simulation, DelayPolicy, SimConfig};
use crate::error::{ConfigError, Error};
use crate::geometry::{clamped_band_area, WorldConfig};
use crate::io::table::sig6;
use crate::metrics::{SimResult, StabilityParams};
use crate::model::SwarmParams;

/// A full-factorial experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub populations: Vec<usize>,
    pub adversaries: Vec<usize>,
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// `(d, c)` pairs.
    pub dc_ratios: Vec<(f64, f64)>,
    pub delays: Vec<DelayPolicy>,
    pub replications: usize,
    pub base_seed: u64,
    pub r: f64,
    pub rounds: u64,
    pub stability: StabilityParams,
    pub half_extent: f64,
    pub collision_radius: f64,
    pub adversary_entry_angle: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            populations: vec![8, 16, 32, 64],
            adversaries: vec![2, 3, 4, 5, 6, 7, 8],
            deltas: vec![8.0, 12.0, 16.0],
            epsilons: vec![4.0, 6.0, 8.0],
            dc_ratios: vec![(0.5, 0.5), (0.5, 1.0), (1.0, 0.5), (1.0, 1.0)],
            delays: vec![
                DelayPolicy::NoDelay,
                DelayPolicy::OnStability,
                DelayPolicy::StabilityPlus(DelayPolicy::DEFAULT_EXTRA_ROUNDS),
            ],
            replications: 3,
            base_seed: 0,
            r: 20.0,
            rounds: 10_000,
            stability: StabilityParams::default(),
            half_extent: WorldConfig::default().half_extent,
            collision_radius: SwarmParams::default().collision_radius,
            adversary_entry_angle: 0.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let lists: [(&'static str, bool); 6] = [
            ("populations", self.populations.is_empty()),
            ("adversaries", self.adversaries.is_empty()),
            ("deltas", self.deltas.is_empty()),
            ("epsilons", self.epsilons.is_empty()),
            ("dc_ratios", self.dc_ratios.is_empty()),
            ("delays", self.delays.is_empty()),
        ];
        if let Some((field, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(ConfigError::invalid(field, "list must not be empty"));
        }
        if self.replications == 0 {
            return Err(ConfigError::invalid("replications", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(ConfigError::invalid("rounds", "must be at least 1"));
        }
        self.stability.validate()
    }

    /// Number of grid points, i.e. the product of the list lengths.
    pub fn grid_size(&self) -> usize {
        self.populations.len()
            * self.adversaries.len()
            * self.deltas.len()
            * self.epsilons.len()
            * self.dc_ratios.len()
            * self.delays.len()
    }
}

/// Cartesian product of the spec's lists in lexicographic list order.
/// Seeds are left at zero; see [`expand_runs`].
pub fn expand_grid(spec: &SweepSpec) -> Vec<SimConfig> {
    let mut out = Vec::with_capacity(spec.grid_size());
    for &population in &spec.populations {
        for &num_adversaries in &spec.adversaries {
            for &delta in &spec.deltas {
                for &epsilon in &spec.epsilons {
                    for &(d, c) in &spec.dc_ratios {
                        for &delay in &spec.delays {
                            let params = SwarmParams {
                                delta,
                                epsilon,
                                c,
                                d,
                                r: spec.r,
                                collision_radius: spec.collision_radius,
                                ..SwarmParams::default()
                            };
                            out.push(SimConfig {
                                population,
                                num_adversaries,
                                params,
                                world: WorldConfig { half_extent: spec.half_extent, ..Default::default() },
                                delay,
                                max_rounds: spec.rounds,
                                seed: 0,
                                stability: spec.stability,
                                adversary_entry_angle: spec.adversary_entry_angle,
                                allow_degenerate_band: params.is_degenerate_band(),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Seed for one replication of one grid point.
pub fn derive_seed(base_seed: u64, digest: &str, replication: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(digest.as_bytes());
    h.update((replication as u64).to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 yields 32 bytes"))
}

/// One scheduled run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub digest: String,
    pub replication: usize,
    pub config: SimConfig,
}

/// Every grid point crossed with every replication, seeds filled in.
pub fn expand_runs(spec: &SweepSpec) -> Vec<PlannedRun> {
    let mut runs = Vec::with_capacity(spec.grid_size() * spec.replications);
    for config in expand_grid(spec) {
        let digest = config.digest();
        for replication in 0..spec.replications {
            let seed = derive_seed(spec.base_seed, &digest, replication);
            runs.push(PlannedRun { digest: digest.clone(), replication, config: SimConfig { seed, ..config.clone() } });
        }
    }
    runs
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok(SimResult),
    /// The configuration failed validation.
    Rejected(String),
    /// The run itself failed.
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RowStatus::Ok(_) => "ok",
            RowStatus::Rejected(_) => "rejected",
            RowStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub digest: String,
    pub replication: usize,
    pub config: SimConfig,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn to_raw(&self) -> RawRow {
        let cfg = &self.config;
        let p = &cfg.params;
        let (result, error) = match &self.status {
            RowStatus::Ok(r) => (Some(r), String::new()),
            RowStatus::Rejected(e) | RowStatus::Failed(e) => (None, e.clone()),
        };
        RawRow {
            digest: self.digest.clone(),
            replication: self.replication,
            seed: cfg.seed,
            population: cfg.population,
            adversaries: cfg.num_adversaries,
            delta: p.delta,
            epsilon: p.epsilon,
            d: p.d,
            c: p.c,
            r: p.r,
            delay: cfg.delay,
            rounds: cfg.max_rounds,
            status: self.status.label().to_string(),
            degenerate_band: p.is_degenerate_band(),
            percent_access: result.map(|r| r.percent_access),
            first_stable_at: result.and_then(|r| r.first_stable_at),
            activated_at: result.and_then(|r| r.adversaries_activated_at),
            total_collisions: result.map(|r| r.total_collisions),
            congestion: clamped_band_area(p.delta, p.epsilon) / cfg.population.max(1) as f64,
            band_area: clamped_band_area(p.delta, p.epsilon),
            band_area_closed_form: 4.0 * std::f64::consts::PI * p.delta * p.epsilon,
            max_gap_arc_length: result.map(|r| r.max_gap_arc_length),
            clamp_events: result.map(|r| r.clamp_events),
            error,
        }
    }
}

/// Flat per-run record: the in-memory form of one `raw.csv` line.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub digest: String,
    pub replication: usize,
    pub seed: u64,
    pub population: usize,
    pub adversaries: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub d: f64,
    pub c: f64,
    pub r: f64,
    pub delay: DelayPolicy,
    pub rounds: u64,
    pub status: String,
    pub degenerate_band: bool,
    pub percent_access: Option<f64>,
    pub first_stable_at: Option<u64>,
    pub activated_at: Option<u64>,
    pub total_collisions: Option<u64>,
    pub congestion: f64,
    pub band_area: f64,
    pub band_area_closed_form: f64,
    pub max_gap_arc_length: Option<f64>,
    pub clamp_events: Option<u64>,
    pub error: String,
}

impl RawRow {
    fn measured(&self) -> Option<f64> {
        if self.status == "ok" {
            self.percent_access
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// One summary per standard view, in [`View::ALL`] order.
    pub aggregates: Vec<(View, SummaryTable)>,
}

impl SweepResult {
    pub fn raw_rows(&self) -> Vec<RawRow> {
        self.rows.iter().map(SweepRow::to_raw).collect()
    }

    pub fn failed_count(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.status, RowStatus::Failed(_))).count()
    }
}

/// Runs one planned row; panics inside the simulation are contained.
pub fn execute(run: &PlannedRun) -> SweepRow {
    let status = match run.config.validate() {
        Err(e) => RowStatus::Rejected(e.to_string()),
        Ok(()) => match panic::catch_unwind(AssertUnwindSafe(|| run_simulation(&run.config))) {
            Ok(Ok(outcome)) => RowStatus::Ok(outcome.result),
            Ok(Err(e)) => RowStatus::Failed(e.to_string()),
            Err(payload) => RowStatus::Failed(panic_message(payload.as_ref())),
        },
    };
    SweepRow { digest: run.digest.clone(), replication: run.replication, config: run.config.clone(), status }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".to_string()
    }
}

/// Executes a list of planned runs on `parallelism` workers. Output order is
/// by digest then replication, whatever the worker count.
pub fn run_planned(runs: &[PlannedRun], parallelism: usize) -> Result<Vec<SweepRow>, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| runs.par_iter().map(execute).collect());
    rows.sort_by(|a, b| a.digest.cmp(&b.digest).then(a.replication.cmp(&b.replication)));
    Ok(rows)
}

pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult, Error> {
    spec.validate()?;
    if parallelism == 0 {
        return Err(ConfigError::invalid("workers", "must be at least 1").into());
    }
    let rows = run_planned(&expand_runs(spec), parallelism)?;
    let raw: Vec<RawRow> = rows.iter().map(SweepRow::to_raw).collect();
    let aggregates = View::ALL.iter().map(|v| (*v, aggregate(&raw, &v.dimensions()))).collect();
    Ok(SweepResult { rows, aggregates })
}

/// A column of the raw table to group by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dimension {
    Population,
    Adversaries,
    Delta,
    Epsilon,
    D,
    C,
    Delay,
    /// Congestion rating, bucketed by the given width, or exact when `None`.
    Congestion(Option<f64>),
}

impl Dimension {
    pub const DEFAULT_CONGESTION_BUCKET: f64 = 10.0;
    pub const NAMES: &'static str =
        "population, adversaries, delta, epsilon, d, c, delay, congestion[:WIDTH], congestion_exact";

    pub fn headers(&self) -> Vec<&'static str> {
        match self {
            Dimension::Population => vec!["population"],
            Dimension::Adversaries => vec!["adversaries"],
            Dimension::Delta => vec!["delta"],
            Dimension::Epsilon => vec!["epsilon"],
            Dimension::D => vec!["d"],
            Dimension::C => vec!["c"],
            Dimension::Delay => vec!["delay"],
            Dimension::Congestion(Some(_)) => vec!["congestion_lo", "congestion_hi"],
            Dimension::Congestion(None) => vec!["congestion"],
        }
    }

    fn key(&self, row: &RawRow) -> GroupKey {
        match *self {
            Dimension::Population => GroupKey::Count(row.population as u64),
            Dimension::Adversaries => GroupKey::Count(row.adversaries as u64),
            Dimension::Delta => GroupKey::Number(row.delta),
            Dimension::Epsilon => GroupKey::Number(row.epsilon),
            Dimension::D => GroupKey::Number(row.d),
            Dimension::C => GroupKey::Number(row.c),
            Dimension::Delay => GroupKey::Delay(row.delay),
            Dimension::Congestion(Some(w)) => {
                let lo = (row.congestion / w).floor() * w;
                GroupKey::Bucket(lo, lo + w)
            }
            Dimension::Congestion(None) => GroupKey::Number(row.congestion),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || Error::UnknownDimension(s.to_string(), Dimension::NAMES);
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "population" | "populations" => Dimension::Population,
            "adversaries" | "num_adversaries" => Dimension::Adversaries,
            "delta" => Dimension::Delta,
            "epsilon" => Dimension::Epsilon,
            "d" => Dimension::D,
            "c" => Dimension::C,
            "delay" => Dimension::Delay,
            "congestion" => Dimension::Congestion(Some(Dimension::DEFAULT_CONGESTION_BUCKET)),
            "congestion_exact" => Dimension::Congestion(None),
            _ => {
                let w = t
                    .strip_prefix("congestion:")
                    .and_then(|w| w.parse::<f64>().ok())
                    .filter(|w| w.is_finite() && *w > 0.0)
                    .ok_or_else(unknown)?;
                Dimension::Congestion(Some(w))
            }
        })
    }
}

/// Parses a comma-separated dimension list such as `delta,epsilon`.
pub fn parse_dimensions(s: &str) -> Result<Vec<Dimension>, Error> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// A value a row is grouped under. Values are totally ordered for stable output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupKey {
    Count(u64),
    Number(f64),
    Delay(DelayPolicy),
    Bucket(f64, f64),
}

impl GroupKey {
    fn rank(&self) -> (u8, f64, f64) {
        match *self {
            GroupKey::Count(n) => (0, n as f64, 0.0),
            GroupKey::Number(x) => (1, x, 0.0),
            GroupKey::Delay(DelayPolicy::NoDelay) => (2, 0.0, 0.0),
            GroupKey::Delay(DelayPolicy::OnStability) => (2, 1.0, 0.0),
            GroupKey::Delay(DelayPolicy::StabilityPlus(k)) => (2, 2.0, k as f64),
            GroupKey::Bucket(lo, hi) => (3, lo, hi),
        }
    }
}

impl Eq for GroupKey {}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a0, a1, a2) = self.rank();
        let (b0, b1, b2) = other.rank();
        a0.cmp(&b0).then(a1.total_cmp(&b1)).then(a2.total_cmp(&b2))
    }
}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl GroupKey {
    /// CSV cells for this key; a bucket spans two columns.
    pub fn cells(&self) -> Vec<String> {
        match self {
            GroupKey::Bucket(lo, hi) => vec![sig6(*lo), sig6(*hi)],
            other => vec![other.to_string()],
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Count(n) => write!(f, "{n}"),
            GroupKey::Number(x) => f.write_str(&sig6(*x)),
            GroupKey::Delay(p) => write!(f, "{p}"),
            GroupKey::Bucket(lo, hi) => write!(f, "[{}, {})", sig6(*lo), sig6(*hi)),
        }
    }
}

/// Statistics of percent access (as a fraction) over one group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub keys: Vec<GroupKey>,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub dimensions: Vec<Dimension>,
    pub rows: Vec<SummaryRow>,
}

/// Groups successful rows by `dims` and summarizes their percent access.
/// Rows without a measured value (rejected or failed) are left out.
pub fn aggregate(rows: &[RawRow], dims: &[Dimension]) -> SummaryTable {
    let mut groups: BTreeMap<Vec<GroupKey>, Vec<f64>> = BTreeMap::new();
    for row in rows {
        let Some(v) = row.measured() else { continue };
        let key = dims.iter().map(|d| d.key(row)).collect();
        groups.entry(key).or_default().push(v);
    }
    let rows = groups
        .into_iter()
        .map(|(keys, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            SummaryRow {
                keys,
                count: values.len(),
                mean,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                stddev: var.sqrt(),
            }
        })
        .collect();
    SummaryTable { dimensions: dims.to_vec(), rows }
}

/// The standard summaries written by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    /// Percent access by population and adversary count.
    Fig1,
    /// Percent access by stability region (δ × ε).
    Table2,
    /// Percent access by step sizes (d × c).
    Table3,
    /// Percent access by adversary delay policy.
    Delay,
    /// Percent access by congestion rating.
    Fig4,
}

impl View {
    pub const ALL: [View; 5] = [View::Fig1, View::Table2, View::Table3, View::Delay, View::Fig4];
    pub const NAMES: &'static str = "fig1, table2, table3, delay, fig4";

    pub fn name(&self) -> &'static str {
        match self {
            View::Fig1 => "fig1",
            View::Table2 => "table2",
            View::Table3 => "table3",
            View::Delay => "delay",
            View::Fig4 => "fig4",
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            View::Fig1 => "fig1_population_saturation.csv",
            View::Table2 => "table2_stability_region.csv",
            View::Table3 => "table3_agent_movements.csv",
            View::Delay => "delay_comparison.csv",
            View::Fig4 => "fig4_congestion.csv",
        }
    }

    pub fn dimensions(&self) -> Vec<Dimension> {
        match self {
            View::Fig1 => vec![Dimension::Population, Dimension::Adversaries],
            View::Table2 => vec![Dimension::Delta, Dimension::Epsilon],
            View::Table3 => vec![Dimension::D, Dimension::C],
            View::Delay => vec![Dimension::Delay],
            View::Fig4 => vec![Dimension::Congestion(Some(Dimension::DEFAULT_CONGESTION_BUCKET))],
        }
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        View::ALL
            .iter()
            .copied()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownView(s.to_string(), View::NAMES))
    }
}
