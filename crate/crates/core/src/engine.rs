//! Round-based execution of the SHARKS rules and the adversarial variants.
//!
//! Each round every active agent takes one turn, in an order freshly
//! shuffled from the run's generator. On its turn an agent applies the
//! Center Rule and then the Dispersion Rule, seeing every move already made
//! earlier in the same round.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, FormatError};
use crate::geometry::{
    advance_reporting, clamped_band_area, distance, heading_towards, rotate_clockwise, Heading, Vec2, WorldConfig,
};
use crate::metrics::{
    count_collisions_binned, detect_stability, gap_cv, max_gap_fraction, percent_access, RoundMetrics, SimResult,
    StabilityParams,
};
use crate::model::{AgentId, AgentKind, AgentState, SwarmParams};

/// Upper bound on placement draws before a population is declared too crowded.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// When the adversaries enter the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DelayPolicy {
    /// Enter together with the regular agents.
    NoDelay,
    /// Enter in the round the swarm first becomes stable.
    OnStability,
    /// Enter the given number of rounds after the swarm first becomes stable.
    StabilityPlus(u64),
}

impl DelayPolicy {
    pub const DEFAULT_EXTRA_ROUNDS: u64 = 20;

    /// Round at which adversaries enter, given the first stable round.
    fn activation_round(self, first_stable_at: Option<u64>) -> Option<u64> {
        match self {
            DelayPolicy::NoDelay => Some(0),
            DelayPolicy::OnStability => first_stable_at,
            DelayPolicy::StabilityPlus(k) => first_stable_at.map(|s| s + k),
        }
    }
}

impl fmt::Display for DelayPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayPolicy::NoDelay => f.write_str("none"),
            DelayPolicy::OnStability => f.write_str("stability"),
            DelayPolicy::StabilityPlus(k) => write!(f, "stability+{k}"),
        }
    }
}

impl FromStr for DelayPolicy {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "none" | "nodelay" | "no-delay" => Ok(DelayPolicy::NoDelay),
            "stability" => Ok(DelayPolicy::OnStability),
            _ => t
                .strip_prefix("stability+")
                .and_then(|k| k.trim().parse::<u64>().ok())
                .map(DelayPolicy::StabilityPlus)
                .ok_or_else(|| FormatError::Delay(s.to_string())),
        }
    }
}

impl TryFrom<String> for DelayPolicy {
    type Error = FormatError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DelayPolicy> for String {
    fn from(p: DelayPolicy) -> Self {
        p.to_string()
    }
}

/// One complete simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub population: usize,
    pub num_adversaries: usize,
    pub params: SwarmParams,
    pub world: WorldConfig,
    pub delay: DelayPolicy,
    pub max_rounds: u64,
    pub seed: u64,
    pub stability: StabilityParams,
    /// Compass angle of the single point where adversaries enter the ring.
    pub adversary_entry_angle: f64,
    /// Permit `delta <= epsilon`, clamping the band's inner radius at zero.
    pub allow_degenerate_band: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            population: 8,
            num_adversaries: 2,
            params: SwarmParams::default(),
            world: WorldConfig::default(),
            delay: DelayPolicy::OnStability,
            max_rounds: 10_000,
            seed: 0,
            stability: StabilityParams::default(),
            adversary_entry_angle: 0.0,
            allow_degenerate_band: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population < 2 {
            return Err(ConfigError::invalid(
                "population",
                format!("at least 2 regular agents are required, got {}", self.population),
            ));
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::invalid("max_rounds", "must be at least 1"));
        }
        self.params.validate(self.allow_degenerate_band)?;
        self.stability.validate()?;
        if !self.adversary_entry_angle.is_finite() {
            return Err(ConfigError::invalid("adversary_entry_angle", "must be finite"));
        }
        if !self.world.target.is_finite() || !self.world.half_extent.is_finite() {
            return Err(ConfigError::invalid("world", "extent and target must be finite"));
        }
        let p = &self.params;
        let reach = self.world.target.x.abs().max(self.world.target.y.abs()) + p.delta + p.epsilon + p.c + p.d;
        if self.world.half_extent < reach {
            return Err(ConfigError::invalid(
                "world.half_extent",
                format!("{} cannot hold the band plus one move ({reach})", self.world.half_extent),
            ));
        }
        Ok(())
    }

    /// Stable identifier of the configuration with the seed left out, so all
    /// replications of one grid point share it.
    pub fn digest(&self) -> String {
        let canonical = SimConfig { seed: 0, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    pub fn regular_ids(&self) -> std::ops::Range<AgentId> {
        0..self.population
    }

    pub fn adversary_ids(&self) -> std::ops::Range<AgentId> {
        self.population..self.population + self.num_adversaries
    }
}

/// Mutable state of a run. `agents[i].id == i` always holds.
#[derive(Debug, Clone)]
pub struct SimState {
    pub round: u64,
    pub agents: Vec<AgentState>,
    pub rng: ChaCha8Rng,
    pub adversaries_activated_at: Option<u64>,
    pub first_stable_at: Option<u64>,
    pub clamp_events: u64,
    recent: VecDeque<RoundMetrics>,
}

impl SimState {
    pub fn regulars(&self) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(|a| a.is_regular())
    }

    pub fn adversaries(&self) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(|a| a.is_adversary())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveProposal {
    pub agent_id: AgentId,
    pub new_pos: Vec2,
    pub new_heading: Heading,
    /// The occupancy check failed; `new_pos` is the current position.
    pub blocked: bool,
    /// The world boundary shortened the move.
    pub clamped: bool,
}

impl MoveProposal {
    fn stay(agent: &AgentState) -> Self {
        MoveProposal {
            agent_id: agent.id,
            new_pos: agent.pos,
            new_heading: agent.heading,
            blocked: false,
            clamped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborFilter {
    AnyActive,
    AdversariesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no neighbor")]
pub struct NoNeighbor;

/// True iff no active agent other than `self_id` is strictly closer than `radius` to `loc`.
pub fn is_empty(loc: Vec2, agents: &[AgentState], radius: f64, self_id: AgentId) -> bool {
    let r2 = radius * radius;
    !agents.iter().any(|a| {
        a.active && a.id != self_id && {
            let dx = a.pos.x - loc.x;
            let dy = a.pos.y - loc.y;
            dx * dx + dy * dy < r2
        }
    })
}

/// Closest active agent passing `filter`, ties broken by lowest id.
pub fn nearest_neighbor(me: &AgentState, agents: &[AgentState], filter: NeighborFilter) -> Result<AgentId, NoNeighbor> {
    let mut best: Option<(f64, AgentId)> = None;
    for a in agents {
        if !a.active || a.id == me.id {
            continue;
        }
        if filter == NeighborFilter::AdversariesOnly && !a.is_adversary() {
            continue;
        }
        let dx = a.pos.x - me.pos.x;
        let dy = a.pos.y - me.pos.y;
        let d2 = dx * dx + dy * dy;
        let better = match best {
            None => true,
            Some((bd, bid)) => d2 < bd || (d2 == bd && a.id < bid),
        };
        if better {
            best = Some((d2, a.id));
        }
    }
    best.map(|(_, id)| id).ok_or(NoNeighbor)
}

/// Moves `c` units along the agent–target line when outside `[δ-ε, δ+ε]`,
/// provided the destination is empty. Shared by both agent kinds.
pub fn center_rule(me: &AgentState, params: &SwarmParams, world: &WorldConfig, agents: &[AgentState]) -> MoveProposal {
    let dist = distance(me.pos, world.target);
    let offset = params.delta - dist;
    let direction = if offset > params.epsilon {
        // Too close: back away from the target. On the target itself there
        // is no bearing, so keep the current heading.
        match heading_towards(me.pos, world.target) {
            Ok(h) => rotate_clockwise(h, 180.0),
            Err(_) => me.heading,
        }
    } else if offset < -params.epsilon {
        match heading_towards(me.pos, world.target) {
            Ok(h) => h,
            Err(_) => me.heading,
        }
    } else {
        return MoveProposal::stay(me);
    };
    let (candidate, clamped) = advance_reporting(me.pos, direction, params.c, world);
    if is_empty(candidate, agents, params.collision_radius, me.id) {
        MoveProposal { new_pos: candidate, clamped, ..MoveProposal::stay(me) }
    } else {
        MoveProposal { blocked: true, ..MoveProposal::stay(me) }
    }
}

fn dispersal_heading(me: &AgentState, neighbor: &AgentState, r: f64) -> Heading {
    let facing = heading_towards(me.pos, neighbor.pos).unwrap_or(me.heading);
    rotate_clockwise(facing, 180.0 + r)
}

/// Turns away from the nearest active agent (regular or not) by `180 + r`
/// degrees and moves `d` units if the destination is empty. The new heading
/// is kept even when the move is blocked.
pub fn dispersion_rule(
    me: &AgentState,
    agents: &[AgentState],
    params: &SwarmParams,
    world: &WorldConfig,
) -> MoveProposal {
    let Ok(nid) = nearest_neighbor(me, agents, NeighborFilter::AnyActive) else {
        return MoveProposal::stay(me);
    };
    let heading = dispersal_heading(me, &agents[nid], params.r);
    let (candidate, clamped) = advance_reporting(me.pos, heading, params.d, world);
    let base = MoveProposal { new_heading: heading, ..MoveProposal::stay(me) };
    if is_empty(candidate, agents, params.collision_radius, me.id) {
        MoveProposal { new_pos: candidate, clamped, ..base }
    } else {
        MoveProposal { blocked: true, ..base }
    }
}

/// Turns away from the nearest other adversary and moves
/// `d * adversary_disperse_factor` units without any occupancy check.
pub fn adversarial_dispersion_rule(
    me: &AgentState,
    agents: &[AgentState],
    params: &SwarmParams,
    world: &WorldConfig,
) -> MoveProposal {
    let Ok(nid) = nearest_neighbor(me, agents, NeighborFilter::AdversariesOnly) else {
        return MoveProposal::stay(me);
    };
    let heading = dispersal_heading(me, &agents[nid], params.r);
    let step = params.d * params.adversary_disperse_factor;
    let (new_pos, clamped) = advance_reporting(me.pos, heading, step, world);
    MoveProposal { new_pos, new_heading: heading, clamped, ..MoveProposal::stay(me) }
}

/// Places the regular swarm and parks the adversaries off-field.
pub fn initialize(config: &SimConfig) -> Result<SimState, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let world = &config.world;
    let radius = config.params.collision_radius;
    let h = world.half_extent;

    let mut agents: Vec<AgentState> = Vec::with_capacity(config.population + config.num_adversaries);
    let mut attempts = 0;
    while agents.len() < config.population {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(ConfigError::WorldTooCrowded { attempts });
        }
        attempts += 1;
        let p = world.target + Vec2::new(rng.gen_range(-h..=h), rng.gen_range(-h..=h));
        if !world.contains(p) || distance(p, world.target) < radius {
            continue;
        }
        if agents.iter().any(|a| distance(a.pos, p) < radius) {
            continue;
        }
        let heading = Heading::from_degrees(rng.gen_range(0.0..360.0));
        agents.push(AgentState::regular(agents.len(), p, heading));
    }
    for id in config.adversary_ids() {
        agents.push(AgentState::adversary(id, world.target, Heading::NORTH, false));
    }

    let mut state = SimState {
        round: 0,
        agents,
        rng,
        adversaries_activated_at: None,
        first_stable_at: None,
        clamp_events: 0,
        recent: VecDeque::with_capacity(config.stability.window + 1),
    };
    if config.delay == DelayPolicy::NoDelay {
        activate_adversaries(&mut state, config, 0);
    }
    Ok(state)
}

/// Brings every adversary onto the field at the single entry point: distance
/// δ from the target at the configured angle, the i-th one offset
/// `i * collision_radius` clockwise along the tangent.
pub fn activate_adversaries(state: &mut SimState, config: &SimConfig, round: u64) {
    if config.num_adversaries == 0 || state.adversaries_activated_at.is_some() {
        return;
    }
    let angle = Heading::from_degrees(config.adversary_entry_angle);
    let tangent = rotate_clockwise(angle, 90.0);
    let entry = config.world.target + angle.unit().scale(config.params.delta);
    for (i, id) in config.adversary_ids().enumerate() {
        let offset = tangent.unit().scale(i as f64 * config.params.collision_radius);
        let (pos, _) = config.world.confine(entry + offset);
        let agent = &mut state.agents[id];
        agent.pos = pos;
        agent.heading = tangent;
        agent.active = true;
    }
    state.adversaries_activated_at = Some(round);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Center,
    Dispersion,
}

/// One rule application, captured for inspection by [`step_round_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct MoveRecord {
    pub round: u64,
    pub agent_id: AgentId,
    pub kind: AgentKind,
    pub rule: RuleKind,
    pub from: Vec2,
    pub proposal: MoveProposal,
    /// Positions of the other active agents when the move was validated.
    pub others: Vec<Vec2>,
}

/// Advances the simulation one round and reports that round's observables.
pub fn step_round(state: &mut SimState, config: &SimConfig) -> RoundMetrics {
    step_round_traced(state, config, None)
}

/// [`step_round`] that optionally records every rule application.
pub fn step_round_traced(
    state: &mut SimState,
    config: &SimConfig,
    mut trace: Option<&mut Vec<MoveRecord>>,
) -> RoundMetrics {
    let round = state.round;
    let params = &config.params;
    let world = &config.world;

    let mut order: Vec<usize> = (0..state.agents.len()).filter(|&i| state.agents[i].active).collect();
    order.shuffle(&mut state.rng);

    for idx in order {
        for rule in [RuleKind::Center, RuleKind::Dispersion] {
            let me = state.agents[idx];
            let proposal = match (rule, me.kind) {
                (RuleKind::Center, _) => center_rule(&me, params, world, &state.agents),
                (RuleKind::Dispersion, AgentKind::Regular) => dispersion_rule(&me, &state.agents, params, world),
                (RuleKind::Dispersion, AgentKind::Adversary) => {
                    adversarial_dispersion_rule(&me, &state.agents, params, world)
                }
            };
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(MoveRecord {
                    round,
                    agent_id: me.id,
                    kind: me.kind,
                    rule,
                    from: me.pos,
                    proposal,
                    others: state.agents.iter().filter(|a| a.active && a.id != me.id).map(|a| a.pos).collect(),
                });
            }
            if proposal.clamped {
                state.clamp_events += 1;
            }
            let agent = &mut state.agents[idx];
            agent.pos = proposal.new_pos;
            agent.heading = proposal.new_heading;
        }
    }

    let target = world.target;
    let slack = config.stability.band_slack_steps * params.c.max(params.d);
    let (mut in_band_count, mut settled_count) = (0, 0);
    for a in state.regulars() {
        let dist = distance(a.pos, target);
        in_band_count += params.in_band(dist) as usize;
        settled_count += (dist >= params.band_inner() - slack && dist <= params.band_outer() + slack) as usize;
    }
    let mut metrics = RoundMetrics {
        round,
        max_gap_fraction: max_gap_fraction(&state.agents, target),
        gap_cv: gap_cv(&state.agents, target),
        in_band_count,
        settled_count,
        stable: false,
        collisions: count_collisions_binned(&state.agents, params.collision_radius),
    };

    state.recent.push_back(metrics);
    while state.recent.len() > config.stability.window {
        state.recent.pop_front();
    }
    metrics.stable = detect_stability(state.recent.make_contiguous(), config.population, &config.stability);
    if let Some(last) = state.recent.back_mut() {
        last.stable = metrics.stable;
    }
    if metrics.stable && state.first_stable_at.is_none() {
        state.first_stable_at = Some(round);
    }
    if state.adversaries_activated_at.is_none() && config.delay.activation_round(state.first_stable_at) == Some(round) {
        activate_adversaries(state, config, round);
    }

    state.round += 1;
    metrics
}

/// A finished run: its summary and the full per-round series.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub result: SimResult,
    pub series: Vec<RoundMetrics>,
}

/// Runs `config.max_rounds` rounds from a fresh initial state.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutcome, ConfigError> {
    let mut state = initialize(config)?;
    let mut series = Vec::with_capacity(config.max_rounds as usize);
    while state.round < config.max_rounds {
        series.push(step_round(&mut state, config));
    }
    Ok(SimOutcome { result: summarize(config, &state, &series), series })
}

fn summarize(config: &SimConfig, state: &SimState, series: &[RoundMetrics]) -> SimResult {
    let p = &config.params;
    let access = percent_access(series, state.first_stable_at, state.adversaries_activated_at);
    let band_area = clamped_band_area(p.delta, p.epsilon);
    SimResult {
        config_digest: config.digest(),
        percent_access: access,
        first_stable_at: state.first_stable_at,
        adversaries_activated_at: state.adversaries_activated_at,
        total_collisions: series.iter().map(|m| m.collisions as u64).sum(),
        congestion: band_area / config.population as f64,
        max_gap_arc_length: access * 2.0 * std::f64::consts::PI * p.delta,
        band_area,
        band_area_closed_form: 4.0 * std::f64::consts::PI * p.delta * p.epsilon,
        degenerate_band: p.is_degenerate_band(),
        clamp_events: state.clamp_events,
    }
}
