//! Per-node movement simulation. Nodes alternate between pausing at a point
//! and traveling a polyline toward a destination; the three models differ
//! only in how the next destination is chosen:
//!
//! - `fmm`: fuzzy destination selection over the class rule table, travel
//!   along shortest graph paths
//! - `rwp_graph`: uniform random graph vertex, same graph travel
//! - `rwp_free`: uniform random point in the area, straight-line travel
//!
//! Transitions are processed at their exact times inside each tick (the
//! remainder of the tick carries across a transition), so halving `dt` does
//! not change where nodes end up. Every node owns its own RNG stream, which
//! keeps per-node draw sequences independent of tick size and of each other.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{hours_of, select_destination_fuzzy, NodeClass, RuleTable, TimeLabel};
use crate::environment::CityMap;
use crate::error::{Error, Result};
use crate::fuzzy::FuzzySystem;
use crate::geometry::Point;
use crate::mobility::build_fuzzy_system;

/// RNG stream ids: 0 seeds initial placement, 1 is reserved for the traffic
/// layer, and node `i` draws from stream `2 + i`.
const STREAM_INIT: u64 = 0;
pub const STREAM_TRAFFIC: u64 = 1;
const STREAM_NODE_BASE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Fmm,
    RwpFree,
    RwpGraph,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Fmm, Model::RwpFree, Model::RwpGraph];

    pub fn name(self) -> &'static str {
        match self {
            Model::Fmm => "fmm",
            Model::RwpFree => "rwp_free",
            Model::RwpGraph => "rwp_graph",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown model {s:?} (expected fmm, rwp_free or rwp_graph)"))
    }
}

/// Everything a single run needs besides the map and rule table.
#[derive(Debug, Clone)]
pub struct MobilityParams {
    pub model: Model,
    pub area: (f64, f64),
    pub node_count: usize,
    pub classes: Vec<NodeClass>,
    /// Fraction of nodes per class; must sum to 1.
    pub class_mix: Vec<f64>,
    pub pause_range: (f64, f64),
    pub warmup: f64,
    pub duration: f64,
    pub dt: f64,
    pub snapshot_interval: f64,
    pub secs_per_hour: f64,
    pub labels: Vec<TimeLabel>,
}

impl MobilityParams {
    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.node_count == 0 {
            return fail("node_count must be at least 1".into());
        }
        if self.classes.is_empty() {
            return fail("at least one node class is required".into());
        }
        if self.class_mix.len() != self.classes.len() {
            return fail(format!(
                "class_mix has {} entries for {} classes",
                self.class_mix.len(),
                self.classes.len()
            ));
        }
        if self.class_mix.iter().any(|&m| m < 0.0) {
            return fail("class_mix entries must be non-negative".into());
        }
        let total: f64 = self.class_mix.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return fail(format!("class_mix sums to {total}, expected 1"));
        }
        for class in &self.classes {
            let (lo, hi) = class.speed_range;
            if !(0.0 <= lo && lo <= hi) {
                return fail(format!("class {:?} has speed range ({lo}, {hi})", class.name));
            }
        }
        let (plo, phi) = self.pause_range;
        if !(0.0 <= plo && plo <= phi) {
            return fail(format!("pause range ({plo}, {phi}) is not ordered"));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if self.duration < 0.0 || self.warmup < 0.0 {
            return fail("duration and warmup must be non-negative".into());
        }
        if self.area.0 <= 0.0 || self.area.1 <= 0.0 {
            return fail(format!("area {:?} must be positive", self.area));
        }
        if !self.secs_per_hour.is_finite() || self.secs_per_hour <= 0.0 {
            return fail("secs_per_hour must be positive".into());
        }
        if self.labels.is_empty() {
            return fail("at least one time label is required".into());
        }
        for (what, value) in [
            ("snapshot_interval", self.snapshot_interval),
            ("duration", self.duration),
        ] {
            let steps = (value / self.dt).round();
            if (steps * self.dt - value).abs() > 1e-9 {
                return fail(format!("{what} {value} is not a multiple of dt {}", self.dt));
            }
        }
        if self.snapshot_interval <= 0.0 {
            return fail("snapshot_interval must be positive".into());
        }
        Ok(())
    }
}

/// A movement order in a trace: from its timestamp on, the node heads toward
/// `dest` at `speed` until it gets there (or a later order arrives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub node: usize,
    pub dest: Point,
    pub speed: f64,
}

/// Where the current leg ends: a graph vertex or a free point.
#[derive(Debug, Clone, PartialEq)]
pub enum LegTarget {
    Vertex(usize),
    Free(Point),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Paused {
        remaining: f64,
    },
    Moving {
        speed: f64,
        leg_start: Point,
        target: LegTarget,
        leg_length: f64,
        traveled: f64,
        /// Vertices still ahead after the current leg.
        waypoints: VecDeque<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: usize,
    pub class: usize,
    pub pos: Point,
    pub mode: Mode,
    /// Site the node is headed to (or paused at); graph-travel models only.
    pub destination_site: Option<usize>,
    /// Vertex the node is sitting on while paused; `None` mid-journey.
    current_vertex: Option<usize>,
}

impl NodeState {
    pub fn current_vertex(&self) -> Option<usize> {
        self.current_vertex
    }

    pub fn is_paused(&self) -> bool {
        matches!(self.mode, Mode::Paused { .. })
    }
}

/// Read-only context shared by all per-node stepping functions.
struct StepContext<'a> {
    model: Model,
    map: &'a CityMap,
    systems: &'a [FuzzySystem],
    rules: &'a RuleTable,
    labels: &'a [TimeLabel],
    classes: &'a [NodeClass],
    pause_range: (f64, f64),
    area: (f64, f64),
    secs_per_hour: f64,
}

pub struct MobilitySim<'a> {
    params: MobilityParams,
    map: &'a CityMap,
    rules: RuleTable,
    systems: Vec<FuzzySystem>,
    nodes: Vec<NodeState>,
    rngs: Vec<ChaCha8Rng>,
    events: Vec<TraceEvent>,
    steps: u64,
}

impl<'a> MobilitySim<'a> {
    pub fn new(
        params: &MobilityParams,
        map: &'a CityMap,
        rules: &RuleTable,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if params.model == Model::Fmm
            && (rules.class_count() != params.classes.len()
                || rules.site_count() != map.sites.len()
                || rules.label_count() != params.labels.len())
        {
            return Err(Error::InvalidParams(format!(
                "rule table is {}x{}x{} but the run has {} classes, {} sites, {} labels",
                rules.class_count(),
                rules.site_count(),
                rules.label_count(),
                params.classes.len(),
                map.sites.len(),
                params.labels.len()
            )));
        }
        let systems = if params.model == Model::Fmm {
            (0..params.classes.len())
                .map(|c| build_fuzzy_system(map, rules, c, &params.labels))
                .collect()
        } else {
            Vec::new()
        };

        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        init_rng.set_stream(STREAM_INIT);
        let class_of = assign_classes(params.node_count, &params.class_mix);
        let mut nodes = Vec::with_capacity(params.node_count);
        let mut rngs = Vec::with_capacity(params.node_count);
        for (i, &class) in class_of.iter().enumerate() {
            let vertex = init_rng.random_range(0..map.graph.vertex_count());
            let pause = if params.warmup > 0.0 {
                init_rng.random_range(0.0..=params.warmup)
            } else {
                0.0
            };
            nodes.push(NodeState {
                id: i,
                class,
                pos: map.graph.position(vertex),
                mode: Mode::Paused { remaining: pause },
                destination_site: None,
                current_vertex: Some(vertex),
            });
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_NODE_BASE + i as u64);
            rngs.push(rng);
        }

        Ok(MobilitySim {
            params: params.clone(),
            map,
            rules: rules.clone(),
            systems,
            nodes,
            rngs,
            events: Vec::new(),
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.params.dt
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn positions(&self) -> Vec<Point> {
        self.nodes.iter().map(|n| n.pos).collect()
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Advances the whole simulation by one `dt` tick.
    pub fn step(&mut self) {
        let time = self.time();
        let dt = self.params.dt;
        let ctx = StepContext {
            model: self.params.model,
            map: self.map,
            systems: &self.systems,
            rules: &self.rules,
            labels: &self.params.labels,
            classes: &self.params.classes,
            pause_range: self.params.pause_range,
            area: self.params.area,
            secs_per_hour: self.params.secs_per_hour,
        };
        for (node, rng) in self.nodes.iter_mut().zip(self.rngs.iter_mut()) {
            step_node(&ctx, node, rng, &mut self.events, time, dt);
        }
        self.steps += 1;
    }
}

/// Splits `n` nodes into class counts proportional to `mix` (largest
/// remainders get the leftovers), then assigns contiguous id blocks.
fn assign_classes(n: usize, mix: &[f64]) -> Vec<usize> {
    let mut counts: Vec<usize> = mix.iter().map(|&m| (m * n as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut remainders: Vec<(usize, f64)> = mix
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, m * n as f64 - counts[i] as f64))
        .collect();
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for k in 0..n.saturating_sub(assigned) {
        counts[remainders[k % remainders.len()].0] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (class, &count) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(class, count));
    }
    debug_assert_eq!(out.len(), n);
    out
}

fn step_node(
    ctx: &StepContext,
    node: &mut NodeState,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<TraceEvent>,
    tick_start: f64,
    dt: f64,
) {
    let t_end = tick_start + dt;
    let mut remaining = dt;
    // Guards against a pathological zero-pause self-loop configuration; a
    // capped node just forfeits the rest of the tick.
    let mut guard = 0u32;
    while remaining > 0.0 {
        guard += 1;
        if guard > 10_000 {
            break;
        }
        if let Mode::Paused { remaining: pr } = &mut node.mode {
            if *pr > remaining {
                *pr -= remaining;
                return;
            }
            remaining -= *pr;
            let t = t_end - remaining;
            begin_trip(ctx, node, rng, events, t);
            continue;
        }
        let Mode::Moving {
            speed,
            leg_start,
            target,
            leg_length,
            traveled,
            mut waypoints,
        } = std::mem::replace(&mut node.mode, Mode::Paused { remaining: 0.0 })
        else {
            unreachable!()
        };
        let left = (leg_length - traveled).max(0.0);
        let leg_time = if speed > 0.0 {
            left / speed
        } else {
            f64::INFINITY
        };
        if leg_time > remaining {
            let traveled = traveled + speed * remaining;
            let end = target_point(ctx.map, &target);
            node.pos = leg_start.lerp(end, traveled / leg_length);
            node.mode = Mode::Moving {
                speed,
                leg_start,
                target,
                leg_length,
                traveled,
                waypoints,
            };
            return;
        }
        remaining -= leg_time;
        let t = t_end - remaining;
        match target {
            LegTarget::Vertex(v) => {
                node.pos = ctx.map.graph.position(v);
                if let Some(next) = waypoints.pop_front() {
                    let next_pos = ctx.map.graph.position(next);
                    events.push(TraceEvent {
                        time: t,
                        node: node.id,
                        dest: next_pos,
                        speed,
                    });
                    node.mode = Mode::Moving {
                        speed,
                        leg_start: node.pos,
                        target: LegTarget::Vertex(next),
                        leg_length: node.pos.distance(next_pos),
                        traveled: 0.0,
                        waypoints,
                    };
                } else {
                    node.current_vertex = Some(v);
                    pause(node, rng, ctx.pause_range);
                }
            }
            LegTarget::Free(p) => {
                node.pos = p;
                pause(node, rng, ctx.pause_range);
            }
        }
    }
}

/// Chooses the next destination and either starts moving toward it or, when
/// it is the spot the node already occupies, re-pauses.
fn begin_trip(
    ctx: &StepContext,
    node: &mut NodeState,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<TraceEvent>,
    t: f64,
) {
    match ctx.model {
        Model::Fmm => {
            let hours = hours_of(t, ctx.secs_per_hour);
            let site = select_destination_fuzzy(
                &ctx.systems[node.class],
                ctx.map,
                ctx.rules,
                ctx.labels,
                node.class,
                hours,
                node.pos,
            );
            node.destination_site = Some(site);
            let anchor = ctx.map.sites[site].anchor;
            start_graph_trip(ctx, node, rng, events, anchor, t);
        }
        Model::RwpGraph => {
            let target = rng.random_range(0..ctx.map.graph.vertex_count());
            node.destination_site = None;
            start_graph_trip(ctx, node, rng, events, target, t);
        }
        Model::RwpFree => {
            let target = draw_free_point(rng, ctx.area);
            node.destination_site = None;
            let length = node.pos.distance(target);
            let speed = draw_speed(rng, &ctx.classes[node.class]);
            if length <= 0.0 {
                pause(node, rng, ctx.pause_range);
                return;
            }
            events.push(TraceEvent {
                time: t,
                node: node.id,
                dest: target,
                speed,
            });
            node.mode = Mode::Moving {
                speed,
                leg_start: node.pos,
                target: LegTarget::Free(target),
                leg_length: length,
                traveled: 0.0,
                waypoints: VecDeque::new(),
            };
        }
    }
}

fn start_graph_trip(
    ctx: &StepContext,
    node: &mut NodeState,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<TraceEvent>,
    target_vertex: usize,
    t: f64,
) {
    let from = node
        .current_vertex
        .expect("graph-travel nodes pause on a vertex");
    if target_vertex == from {
        pause(node, rng, ctx.pause_range);
        return;
    }
    let path = ctx
        .map
        .graph
        .shortest_path(from, target_vertex)
        .expect("validated maps are connected");
    let speed = draw_speed(rng, &ctx.classes[node.class]);
    let mut waypoints: VecDeque<usize> = path.vertices[1..].iter().copied().collect();
    let first = waypoints.pop_front().expect("path has at least one leg");
    let first_pos = ctx.map.graph.position(first);
    events.push(TraceEvent {
        time: t,
        node: node.id,
        dest: first_pos,
        speed,
    });
    node.current_vertex = None;
    node.mode = Mode::Moving {
        speed,
        leg_start: node.pos,
        target: LegTarget::Vertex(first),
        leg_length: node.pos.distance(first_pos),
        traveled: 0.0,
        waypoints,
    };
}

fn pause(node: &mut NodeState, rng: &mut ChaCha8Rng, range: (f64, f64)) {
    let remaining = if range.1 > range.0 {
        rng.random_range(range.0..=range.1)
    } else {
        range.0
    };
    node.mode = Mode::Paused { remaining };
}

fn draw_speed(rng: &mut ChaCha8Rng, class: &NodeClass) -> f64 {
    let (lo, hi) = class.speed_range;
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn draw_free_point(rng: &mut ChaCha8Rng, area: (f64, f64)) -> Point {
    Point::new(
        rng.random_range(0.0..=area.0),
        rng.random_range(0.0..=area.1),
    )
}

fn target_point(map: &CityMap, target: &LegTarget) -> Point {
    match target {
        LegTarget::Vertex(v) => map.graph.position(*v),
        LegTarget::Free(p) => *p,
    }
}

/// Node positions at one sample instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub positions: Vec<Point>,
}

/// A completed mobility run: sampled positions plus the movement orders that
/// reproduce it.
#[derive(Debug, Clone)]
pub struct MobilityRun {
    pub model: Model,
    pub seed: u64,
    pub node_count: usize,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<TraceEvent>,
}

/// Runs one full simulation, sampling positions every snapshot interval
/// (including t = 0).
pub fn run_mobility(
    params: &MobilityParams,
    map: &CityMap,
    rules: &RuleTable,
    seed: u64,
) -> Result<MobilityRun> {
    let mut sim = MobilitySim::new(params, map, rules, seed)?;
    let steps_per_snapshot = (params.snapshot_interval / params.dt).round().max(1.0) as u64;
    let total_steps = (params.duration / params.dt).round() as u64;
    let mut snapshots = vec![Snapshot {
        time: 0.0,
        positions: sim.positions(),
    }];
    for k in 1..=total_steps {
        sim.step();
        if k % steps_per_snapshot == 0 {
            snapshots.push(Snapshot {
                time: sim.time(),
                positions: sim.positions(),
            });
        }
    }
    Ok(MobilityRun {
        model: params.model,
        seed,
        node_count: params.node_count,
        snapshots,
        events: sim.events,
    })
}
