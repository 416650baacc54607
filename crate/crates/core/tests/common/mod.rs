//! Property checks and independent oracles shared by the property and
//! acceptance test targets. Each check runs a deterministic proptest runner for
//! the requested number of cases and reports the first failure as text.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};

use sharks_core::engine::{center_rule, initialize, step_round, step_round_traced, MoveRecord, RuleKind};
use sharks_core::geometry::{advance, annulus_area, distance, heading_towards, normalize_degrees, rotate_clockwise};
use sharks_core::io::table::{parse_raw_csv, sig6, write_raw_csv};
use sharks_core::io::{parse_run_record, RunRecord};
use sharks_core::metrics::{
    angular_positions, circular_gaps, count_collisions, count_collisions_binned, max_gap_fraction_of, percent_access,
};
use sharks_core::sweep::{aggregate, execute, expand_grid, expand_runs, Dimension, GroupKey, RawRow, SweepSpec};
use sharks_core::{
    run_simulation, AgentKind, AgentState, DelayPolicy, Heading, RoundMetrics, SimConfig, SwarmParams, Vec2,
    WorldConfig,
};

pub const CASES: u32 = 1000;

pub type Check = fn(u32) -> Result<(), String>;

/// Every invariant, grouped by the module it belongs to.
pub const ALL: &[(&str, &str, Check)] = &[
    ("core-model", "rotation is a group action", rotation_is_group_action),
    ("core-model", "headings normalize into [0, 360)", headings_normalize),
    ("core-model", "distance is a metric", distance_is_a_metric),
    ("core-model", "zero advance is identity", zero_advance_is_identity),
    ("core-model", "heading then advance lands on target", heading_then_advance_lands),
    ("core-model", "annulus area matches Monte-Carlo", annulus_area_matches_monte_carlo),
    ("protocol-engine", "occupancy checks are respected", occupancy_is_respected),
    ("protocol-engine", "in-band agents ignore the center rule", in_band_agents_hold_still),
    ("protocol-engine", "moves are bounded by step sizes", moves_are_bounded),
    ("protocol-engine", "two repelling agents become antipodal", two_agents_become_antipodal),
    ("protocol-engine", "serialized config replays bitwise", serialized_config_replays),
    ("protocol-engine", "state invariants hold every round", state_invariants_hold),
    ("metrics", "even spacing gives 1/N", even_spacing_gives_inverse_n),
    ("metrics", "gaps sum to the full circle", gaps_sum_to_full_circle),
    ("metrics", "percent access is a running maximum", percent_access_is_running_max),
    ("metrics", "gap metric is rotation and scale invariant", gap_metric_is_invariant),
    ("metrics", "binned collisions match pair scan", binned_collisions_match_pair_scan),
    ("sweep-harness", "grid size is the product of list lengths", grid_size_is_product),
    ("sweep-harness", "aggregate means match a one-pass oracle", aggregate_matches_oracle),
    ("sweep-harness", "isolated rows reproduce sweep rows", isolated_rows_reproduce),
    ("cli", "run records round-trip", run_records_round_trip),
    ("cli", "raw CSV round-trips with escaped cells", raw_csv_round_trips),
    ("cli", "numbers have six significant digits", numbers_have_six_significant_digits),
];

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 256, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(reason, value) => format!("{reason}; minimal input: {value:?}"),
        other => other.to_string(),
    })
}

fn coord() -> impl Strategy<Value = f64> {
    -45.0..45.0f64
}

fn point() -> impl Strategy<Value = Vec2> {
    (coord(), coord()).prop_map(|(x, y)| Vec2::new(x, y))
}

fn heading() -> impl Strategy<Value = Heading> {
    (0.0..360.0f64).prop_map(Heading::from_degrees)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

// ---------------------------------------------------------------- core-model

pub fn rotation_is_group_action(cases: u32) -> Result<(), String> {
    run(cases, (heading(), -1e4..1e4f64, -1e4..1e4f64), |(h, a, b)| {
        let twice = rotate_clockwise(rotate_clockwise(h, a), b);
        let once = rotate_clockwise(h, a + b);
        prop_assert!(angle_diff(twice.degrees(), once.degrees()) < 1e-9, "{twice} vs {once}");
        Ok(())
    })
}

pub fn headings_normalize(cases: u32) -> Result<(), String> {
    let any = prop_oneof![-1e9..1e9f64, -1e-12..1e-12f64, Just(-0.0), Just(360.0), Just(-360.0)];
    run(cases, any, |deg| {
        let n = normalize_degrees(deg);
        prop_assert!((0.0..360.0).contains(&n), "{deg} -> {n}");
        prop_assert!(angle_diff(n, deg % 360.0) < 1e-6);
        Ok(())
    })
}

pub fn distance_is_a_metric(cases: u32) -> Result<(), String> {
    run(cases, (point(), point(), point()), |(a, b, c)| {
        prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
        prop_assert_eq!(distance(a, b), distance(b, a));
        prop_assert!(distance(a, b) >= 0.0);
        Ok(())
    })
}

pub fn zero_advance_is_identity(cases: u32) -> Result<(), String> {
    let world = WorldConfig::default();
    run(cases, (point(), heading()), |(p, h)| {
        prop_assert_eq!(advance(p, h, 0.0, &world), p);
        Ok(())
    })
}

pub fn heading_then_advance_lands(cases: u32) -> Result<(), String> {
    let world = WorldConfig::default();
    let pair = (point(), point()).prop_filter("distinct", |(a, b)| distance(*a, *b) > 1e-6);
    run(cases, pair, |(a, b)| {
        let h = heading_towards(a, b).unwrap();
        let back = heading_towards(b, a).unwrap();
        prop_assert!((angle_diff(h.degrees(), back.degrees()) - 180.0).abs() < 1e-9);
        let landed = advance(a, h, distance(a, b), &world);
        prop_assert!(distance(landed, b) < 1e-9, "landed {landed}, wanted {b}");
        Ok(())
    })
}

/// Jittered-grid Monte-Carlo estimate of the band area over one quadrant.
fn monte_carlo_band_area(delta: f64, epsilon: f64, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (inner, outer) = (delta - epsilon, delta + epsilon);
    const N: usize = 256;
    let cell = outer / N as f64;
    let mut hits = 0usize;
    for i in 0..N {
        for j in 0..N {
            let x = (i as f64 + rng.gen::<f64>()) * cell;
            let y = (j as f64 + rng.gen::<f64>()) * cell;
            let r2 = x * x + y * y;
            hits += (r2 >= inner * inner && r2 <= outer * outer) as usize;
        }
    }
    4.0 * outer * outer * hits as f64 / (N * N) as f64
}

pub fn annulus_area_matches_monte_carlo(cases: u32) -> Result<(), String> {
    let band = (1.0..40.0f64, 0.05..0.95f64, any::<u64>()).prop_map(|(d, f, s)| (d, d * f, s));
    run(cases, band, |(delta, epsilon, seed)| {
        let exact = annulus_area(delta, epsilon).unwrap();
        let estimate = monte_carlo_band_area(delta, epsilon, seed);
        prop_assert!((estimate - exact).abs() <= 0.01 * exact, "{estimate} vs {exact}");
        Ok(())
    })
}

// ----------------------------------------------------------- protocol-engine

fn delay() -> impl Strategy<Value = DelayPolicy> {
    prop_oneof![
        Just(DelayPolicy::NoDelay),
        Just(DelayPolicy::OnStability),
        (0..30u64).prop_map(DelayPolicy::StabilityPlus)
    ]
}

/// Small, crowded worlds so that occupancy checks actually fire.
fn crowded_config() -> impl Strategy<Value = SimConfig> {
    (
        2..14usize,
        0..5usize,
        (3.0..16.0f64, 0.1..0.6f64),
        prop_oneof![Just(0.5), Just(1.0), 0.1..2.0f64],
        prop_oneof![Just(0.5), Just(1.0), 0.1..2.0f64],
        0.0..179.0f64,
        0.0..10.0f64,
        delay(),
        any::<u64>(),
        0.0..360.0f64,
    )
        .prop_map(|(population, adv, (delta, ef), c, d, r, margin, delay, seed, angle)| {
            let params = SwarmParams { delta, epsilon: delta * ef, c, d, r, ..SwarmParams::default() };
            let half_extent = params.band_outer() + c + d + margin;
            SimConfig {
                population,
                num_adversaries: adv,
                params,
                world: WorldConfig { half_extent, ..WorldConfig::default() },
                delay,
                max_rounds: 40,
                seed,
                adversary_entry_angle: angle,
                ..SimConfig::default()
            }
        })
        .prop_filter("placeable", |cfg| initialize(cfg).is_ok())
}

fn traced_run(cfg: &SimConfig, rounds: u64) -> (Vec<MoveRecord>, Vec<RoundMetrics>) {
    let mut state = initialize(cfg).unwrap();
    let mut trace = Vec::new();
    let mut series = Vec::new();
    for _ in 0..rounds {
        series.push(step_round_traced(&mut state, cfg, Some(&mut trace)));
    }
    (trace, series)
}

pub fn occupancy_is_respected(cases: u32) -> Result<(), String> {
    run(cases, crowded_config(), |cfg| {
        let radius = cfg.params.collision_radius;
        let (trace, _) = traced_run(&cfg, 25);
        for rec in trace.iter().filter(|r| r.kind == AgentKind::Regular) {
            let p = rec.proposal;
            if p.blocked {
                prop_assert_eq!(p.new_pos, rec.from);
                continue;
            }
            if p.new_pos == rec.from {
                continue;
            }
            for other in &rec.others {
                prop_assert!(
                    distance(p.new_pos, *other) >= radius * (1.0 - 1e-12),
                    "agent {} moved to {} within {} of {other}",
                    rec.agent_id,
                    p.new_pos,
                    radius
                );
            }
        }
        Ok(())
    })
}

pub fn in_band_agents_hold_still(cases: u32) -> Result<(), String> {
    let setup =
        ((3.0..30.0f64, 0.05..0.95f64), -1.0..1.0f64, heading(), heading(), prop::collection::vec(point(), 0..12));
    run(cases, setup, |((delta, ef), t, bearing, facing, others)| {
        let params = SwarmParams { delta, epsilon: delta * ef, ..SwarmParams::default() };
        let world = WorldConfig { half_extent: 200.0, ..WorldConfig::default() };
        let dist = delta + t * params.epsilon;
        let me = AgentState::regular(0, bearing.unit().scale(dist), facing);
        let mut agents = vec![me];
        agents.extend(others.iter().enumerate().map(|(i, p)| AgentState::regular(i + 1, *p, Heading::NORTH)));
        let p = center_rule(&me, &params, &world, &agents);
        prop_assert_eq!(p.new_pos, me.pos);
        prop_assert!(!p.blocked);
        Ok(())
    })
}

pub fn moves_are_bounded(cases: u32) -> Result<(), String> {
    run(cases, crowded_config(), |cfg| {
        let params = cfg.params;
        let target = cfg.world.target;
        let (trace, _) = traced_run(&cfg, 25);
        for rec in &trace {
            let moved = distance(rec.from, rec.proposal.new_pos);
            let limit = match (rec.rule, rec.kind) {
                (RuleKind::Center, _) => {
                    let change = (distance(rec.proposal.new_pos, target) - distance(rec.from, target)).abs();
                    prop_assert!(change <= params.c + 1e-9, "center changed distance by {change}");
                    params.c
                }
                (RuleKind::Dispersion, AgentKind::Regular) => params.d,
                (RuleKind::Dispersion, AgentKind::Adversary) => params.d * params.adversary_disperse_factor,
            };
            prop_assert!(moved <= limit + 1e-9, "{:?} {:?} moved {moved} > {limit}", rec.kind, rec.rule);
        }
        Ok(())
    })
}

pub fn two_agents_become_antipodal(cases: u32) -> Result<(), String> {
    let setup = (any::<u64>(), prop_oneof![Just(0.5), Just(1.0)], prop_oneof![Just(0.5), Just(1.0)]);
    run(cases, setup, |(seed, c, d)| {
        let cfg = SimConfig {
            population: 2,
            num_adversaries: 0,
            params: SwarmParams { r: 0.0, c, d, ..SwarmParams::default() },
            max_rounds: 1500,
            seed,
            ..SimConfig::default()
        };
        let out = run_simulation(&cfg).unwrap();
        for m in &out.series[out.series.len() - 10..] {
            prop_assert!((m.max_gap_fraction - 0.5).abs() <= 0.05, "round {} gap {}", m.round, m.max_gap_fraction);
        }
        Ok(())
    })
}

pub fn serialized_config_replays(cases: u32) -> Result<(), String> {
    run(cases, crowded_config(), |cfg| {
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SimConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &cfg);
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&back).unwrap();
        prop_assert_eq!(a.series.len(), b.series.len());
        for (x, y) in a.series.iter().zip(&b.series) {
            prop_assert_eq!(x.max_gap_fraction.to_bits(), y.max_gap_fraction.to_bits());
            prop_assert_eq!(x.gap_cv.to_bits(), y.gap_cv.to_bits());
            prop_assert_eq!(x, y);
        }
        prop_assert_eq!(a.result, b.result);
        Ok(())
    })
}

pub fn state_invariants_hold(cases: u32) -> Result<(), String> {
    run(cases, crowded_config(), |cfg| {
        let mut state = initialize(&cfg).unwrap();
        let radius = cfg.params.collision_radius;
        let regs: Vec<Vec2> = state.regulars().map(|a| a.pos).collect();
        for (i, a) in regs.iter().enumerate() {
            for b in &regs[i + 1..] {
                prop_assert!(distance(*a, *b) >= radius, "initial agents overlap");
            }
        }
        for _ in 0..cfg.max_rounds {
            let m = step_round(&mut state, &cfg);
            let mut ids: Vec<_> = state.agents.iter().map(|a| a.id).collect();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), state.agents.len());
            prop_assert!(state.regulars().all(|a| a.active));
            prop_assert!(state.agents.iter().all(|a| !a.active || cfg.world.contains(a.pos)));
            let any_active = state.adversaries().any(|a| a.active);
            prop_assert_eq!(any_active, state.adversaries_activated_at.is_some());
            prop_assert!((0.0..=1.0).contains(&m.max_gap_fraction));
            prop_assert!(m.in_band_count <= cfg.population);
            prop_assert!(m.in_band_count <= m.settled_count);
        }
        Ok(())
    })
}

// ------------------------------------------------------------------- metrics

pub fn even_spacing_gives_inverse_n(cases: u32) -> Result<(), String> {
    run(cases, (2..=128usize, 0.5..40.0f64, 0.0..360.0f64), |(n, radius, phase)| {
        let pts = (0..n).map(|i| Heading::from_degrees(phase + 360.0 * i as f64 / n as f64).unit().scale(radius));
        let g = max_gap_fraction_of(pts, Vec2::ORIGIN);
        prop_assert!((g - 1.0 / n as f64).abs() < 1e-9, "n={n}: {g}");
        Ok(())
    })
}

fn ring() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((0.0..360.0f64, 0.1..40.0f64), 1..80)
        .prop_map(|v| v.into_iter().map(|(a, r)| Heading::from_degrees(a).unit().scale(r)).collect())
}

pub fn gaps_sum_to_full_circle(cases: u32) -> Result<(), String> {
    run(cases, ring(), |pts| {
        let angles = angular_positions(pts.iter().copied(), Vec2::ORIGIN);
        let gaps = circular_gaps(&angles);
        prop_assert!((gaps.iter().sum::<f64>() - 360.0).abs() < 1e-9);
        prop_assert!(gaps.iter().all(|g| *g >= 0.0));
        let g = max_gap_fraction_of(pts.iter().copied(), Vec2::ORIGIN);
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!(g * pts.len() as f64 >= 1.0 - 1e-12, "{g} * {}", pts.len());
        Ok(())
    })
}

fn metrics_row(round: u64, gap: f64) -> RoundMetrics {
    RoundMetrics {
        round,
        max_gap_fraction: gap,
        gap_cv: 0.0,
        in_band_count: 0,
        settled_count: 0,
        stable: false,
        collisions: 0,
    }
}

pub fn percent_access_is_running_max(cases: u32) -> Result<(), String> {
    let setup = (prop::collection::vec(0.0..=1.0f64, 1..200), prop::option::of(0..220u64), prop::option::of(0..220u64));
    run(cases, setup, |(gaps, stable, active)| {
        let series: Vec<_> = gaps.iter().enumerate().map(|(i, g)| metrics_row(i as u64, *g)).collect();
        let mut previous = 0.0;
        for end in 1..=series.len() {
            let pa = percent_access(&series[..end], stable, active);
            prop_assert!(pa >= previous, "dropped from {previous} to {pa} at {end}");
            previous = pa;
        }
        let oracle = match (stable, active) {
            (Some(s), Some(a)) => gaps.iter().skip(s.max(a) as usize).fold(0.0f64, |m, g| m.max(*g)),
            _ => 0.0,
        };
        prop_assert_eq!(previous, oracle);
        Ok(())
    })
}

pub fn gap_metric_is_invariant(cases: u32) -> Result<(), String> {
    run(cases, (ring(), 0.0..360.0f64, 0.01..100.0f64), |(pts, rot, scale)| {
        let base = max_gap_fraction_of(pts.iter().copied(), Vec2::ORIGIN);
        let (s, c) = rot.to_radians().sin_cos();
        let rotated = pts.iter().map(|p| Vec2::new(p.x * c + p.y * s, -p.x * s + p.y * c));
        let scaled = pts.iter().map(|p| p.scale(scale));
        prop_assert!((max_gap_fraction_of(rotated, Vec2::ORIGIN) - base).abs() < 1e-9);
        prop_assert!((max_gap_fraction_of(scaled, Vec2::ORIGIN) - base).abs() < 1e-9);
        Ok(())
    })
}

pub fn binned_collisions_match_pair_scan(cases: u32) -> Result<(), String> {
    let agents =
        (prop::collection::vec(((-8.0..8.0f64, -8.0..8.0f64), any::<bool>(), any::<bool>()), 0..60), 0.2..3.0f64);
    run(cases, agents, |(spec, radius)| {
        let agents: Vec<AgentState> = spec
            .iter()
            .enumerate()
            .map(|(id, ((x, y), adv, active))| {
                let p = Vec2::new(*x, *y);
                if *adv {
                    AgentState::adversary(id, p, Heading::NORTH, *active)
                } else {
                    AgentState::regular(id, p, Heading::NORTH)
                }
            })
            .collect();
        prop_assert_eq!(count_collisions(&agents, radius), count_collisions_binned(&agents, radius));
        Ok(())
    })
}

// ------------------------------------------------------------- sweep-harness

fn small_spec(max_runs: usize) -> impl Strategy<Value = SweepSpec> {
    use prop::collection::vec;
    (
        vec(2..10usize, 1..3),
        vec(0..4usize, 1..3),
        vec(prop_oneof![Just(8.0), Just(12.0), Just(16.0)], 1..3),
        vec(prop_oneof![Just(4.0), Just(6.0), Just(8.0)], 1..3),
        vec((prop_oneof![Just(0.5), Just(1.0)], prop_oneof![Just(0.5), Just(1.0)]), 1..3),
        vec(delay(), 1..3),
        1..3usize,
        any::<u64>(),
        5..25u64,
    )
        .prop_map(|(populations, adversaries, deltas, epsilons, dc_ratios, delays, replications, base_seed, rounds)| {
            SweepSpec {
                populations,
                adversaries,
                deltas,
                epsilons,
                dc_ratios,
                delays,
                replications,
                base_seed,
                rounds,
                ..SweepSpec::default()
            }
        })
        .prop_filter("small", move |s| s.grid_size() * s.replications <= max_runs)
}

pub fn grid_size_is_product(cases: u32) -> Result<(), String> {
    run(cases, small_spec(usize::MAX), |spec| {
        let product = spec.populations.len()
            * spec.adversaries.len()
            * spec.deltas.len()
            * spec.epsilons.len()
            * spec.dc_ratios.len()
            * spec.delays.len();
        prop_assert_eq!(expand_grid(&spec).len(), product);
        prop_assert_eq!(expand_runs(&spec).len(), product * spec.replications);
        Ok(())
    })
}

fn synthetic_raw() -> impl Strategy<Value = Vec<RawRow>> {
    let row = (
        prop_oneof![Just(8usize), Just(16), Just(64)],
        2..5usize,
        prop_oneof![Just(8.0), Just(16.0)],
        prop_oneof![Just(4.0), Just(8.0)],
        delay(),
        prop::option::of(0.0..=1.0f64),
        prop_oneof![Just("ok"), Just("ok"), Just("ok"), Just("failed")],
    );
    prop::collection::vec(row, 0..60).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (population, adversaries, delta, epsilon, delay, pa, status))| RawRow {
                digest: format!("{i:016x}"),
                replication: i % 3,
                seed: i as u64,
                population,
                adversaries,
                delta,
                epsilon,
                d: 0.5,
                c: 0.5,
                r: 20.0,
                delay,
                rounds: 100,
                status: status.to_string(),
                degenerate_band: delta <= epsilon,
                percent_access: pa,
                first_stable_at: None,
                activated_at: None,
                total_collisions: None,
                congestion: 4.0 * PI * delta * epsilon / population as f64,
                band_area: 4.0 * PI * delta * epsilon,
                band_area_closed_form: 4.0 * PI * delta * epsilon,
                max_gap_arc_length: None,
                clamp_events: None,
                error: String::new(),
            })
            .collect()
    })
}

/// One pass over the rows, accumulating count and sum per textual group key.
fn oracle_means(rows: &[RawRow], key: impl Fn(&RawRow) -> String) -> HashMap<String, (usize, f64)> {
    let mut acc: HashMap<String, (usize, f64)> = HashMap::new();
    for r in rows {
        if r.status != "ok" {
            continue;
        }
        if let Some(v) = r.percent_access {
            let e = acc.entry(key(r)).or_default();
            e.0 += 1;
            e.1 += v;
        }
    }
    acc
}

pub fn aggregate_matches_oracle(cases: u32) -> Result<(), String> {
    run(cases, synthetic_raw(), |rows| {
        let table = aggregate(&rows, &[Dimension::Population, Dimension::Delay]);
        let oracle = oracle_means(&rows, |r| format!("{}|{}", r.population, r.delay));
        prop_assert_eq!(table.rows.len(), oracle.len());
        for row in &table.rows {
            let (GroupKey::Count(pop), GroupKey::Delay(delay)) = (row.keys[0], row.keys[1]) else {
                return Err(TestCaseError::fail("unexpected key kinds"));
            };
            let (n, sum) = oracle[&format!("{pop}|{delay}")];
            prop_assert_eq!(row.count, n);
            prop_assert!((row.mean - sum / n as f64).abs() < 1e-12);
            prop_assert!(row.min <= row.mean + 1e-12 && row.mean <= row.max + 1e-12);
        }
        Ok(())
    })
}

pub fn isolated_rows_reproduce(cases: u32) -> Result<(), String> {
    run(cases, (small_spec(6), any::<prop::sample::Index>()), |(spec, pick)| {
        let result = sharks_core::run_sweep(&spec, 1).unwrap();
        let runs = expand_runs(&spec);
        prop_assert_eq!(result.rows.len(), runs.len());
        let row = &result.rows[pick.index(result.rows.len())];
        let planned = runs.iter().find(|r| r.digest == row.digest && r.replication == row.replication).unwrap();
        prop_assert_eq!(&execute(planned), row);
        if let sharks_core::sweep::RowStatus::Ok(res) = &row.status {
            prop_assert_eq!(&run_simulation(&row.config).unwrap().result, res);
        }
        Ok(())
    })
}

// ----------------------------------------------------------------------- cli

pub fn run_records_round_trip(cases: u32) -> Result<(), String> {
    run(cases, (crowded_config(), 0..12u64), |(cfg, stride)| {
        let out = run_simulation(&cfg).unwrap();
        let rec = RunRecord::new(&cfg, &out, stride);
        let json = rec.to_json();
        let back = parse_run_record(&json).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(back.to_json(), json);
        Ok(())
    })
}

fn messy_text() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[a-z ,\"\n\r;:]{0,24}", any::<String>()]
}

pub fn raw_csv_round_trips(cases: u32) -> Result<(), String> {
    let rows = (synthetic_raw(), prop::collection::vec(messy_text(), 60), -1e7..1e7f64);
    run(cases, rows, |(mut rows, errors, big)| {
        for (r, e) in rows.iter_mut().zip(errors) {
            r.error = e;
            r.band_area = big;
        }
        let text = write_raw_csv(&rows);
        prop_assert!(!text.contains("\r\n") || rows.iter().any(|r| r.error.contains("\r\n")));
        let back = parse_raw_csv(&text).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(&a.error, &b.error);
            prop_assert_eq!(a.delay, b.delay);
            prop_assert_eq!(sig6(a.band_area), sig6(b.band_area));
            prop_assert_eq!(a.percent_access.map(sig6), b.percent_access.map(sig6));
        }
        prop_assert_eq!(write_raw_csv(&back), text);
        Ok(())
    })
}

fn significant_digits(s: &str) -> usize {
    let digits: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

pub fn numbers_have_six_significant_digits(cases: u32) -> Result<(), String> {
    let magnitude = (-6.0..5.9f64, any::<bool>()).prop_map(|(e, neg)| {
        let v = 10f64.powf(e);
        if neg {
            -v
        } else {
            v
        }
    });
    run(cases, magnitude, |x| {
        let s = sig6(x);
        prop_assert!(!s.contains('e') && !s.contains('E'), "{s}");
        prop_assert_eq!(significant_digits(&s), 6, "{} -> {}", x, s);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs() * 1.0000001, "{x} -> {s}");
        Ok(())
    })
}
