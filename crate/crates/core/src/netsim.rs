//! Network layer evaluated over sampled node positions: unit-disk
//! connectivity, min-hop routing, reactive route discovery (modeled as a
//! flood whose cost is the number of nodes it reaches), and constant-bit-rate
//! traffic that produces the summary metrics.

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Who can hear whom at one sample instant: an undirected unit-disk graph
/// over node positions (link iff distance <= range, boundary inclusive).
#[derive(Debug, Clone)]
pub struct ConnectivitySnapshot {
    pub time: f64,
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl ConnectivitySnapshot {
    pub fn build(time: f64, positions: &[Point], range: f64) -> Self {
        let n = positions.len();
        let r2 = range * range;
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if positions[i].distance_squared(positions[j]) <= r2 {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        // Built in increasing order already, but keep the invariant explicit.
        for list in &mut adj {
            list.sort_unstable();
        }
        ConnectivitySnapshot { time, n, adj }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Mean degree: 2E / n.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (2 * self.edge_count()) as f64 / self.n as f64
        }
    }
}

/// Counts link breaks: node pairs adjacent in one snapshot and not in the
/// next, summed over consecutive snapshot pairs.
pub fn count_broken_links(snapshots: &[ConnectivitySnapshot]) -> Result<u64> {
    let mut broken = 0u64;
    for w in snapshots.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if prev.n != next.n {
            return Err(Error::SnapshotNodeMismatch(prev.n, next.n));
        }
        for a in 0..prev.n {
            for &b in prev.neighbors(a) {
                if b > a && !next.adjacent(a, b) {
                    broken += 1;
                }
            }
        }
    }
    Ok(broken)
}

fn bfs_hops(snap: &ConnectivitySnapshot, from: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; snap.n];
    dist[from] = Some(0);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in snap.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Minimum-hop route from `src` to `dst`, or `None` when they are in
/// different components. Among equal-hop next hops the lowest node id wins,
/// so routes are deterministic.
pub fn route(snap: &ConnectivitySnapshot, src: usize, dst: usize) -> Option<Vec<usize>> {
    if src == dst {
        return Some(vec![src]);
    }
    let dist = bfs_hops(snap, dst);
    dist[src]?;
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        let need = dist[cur].unwrap() - 1;
        let next = snap
            .neighbors(cur)
            .iter()
            .copied()
            .find(|&v| dist[v] == Some(need))
            .expect("some neighbor is one hop closer");
        path.push(next);
        cur = next;
    }
    Some(path)
}

/// Number of nodes a route-discovery flood from `src` reaches (everyone in
/// its component except the source itself).
pub fn flood_reach(snap: &ConnectivitySnapshot, src: usize) -> u64 {
    bfs_hops(snap, src).iter().flatten().count() as u64 - 1
}

/// One constant-bit-rate conversation.
#[derive(Debug, Clone)]
pub struct CbrSession {
    pub src: usize,
    pub dst: usize,
    pub start: f64,
    pub packet_bytes: u32,
    /// Packets per second.
    pub rate: f64,
    pub max_packets: u32,
}

/// Link characteristics used for the delay model.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    pub bandwidth_bps: f64,
    pub per_hop_latency: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            bandwidth_bps: 2_000_000.0,
            per_hop_latency: 0.002,
        }
    }
}

impl LinkParams {
    /// Transmission plus fixed processing delay for one hop.
    pub fn hop_delay(&self, packet_bytes: u32) -> f64 {
        (packet_bytes as f64 * 8.0) / self.bandwidth_bps + self.per_hop_latency
    }
}

/// Summary metrics for one run. `end_to_end_delay` is absent when nothing
/// was delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub node_density: f64,
    pub broken_links: f64,
    pub delivered_fraction: f64,
    pub routing_overhead: f64,
    pub end_to_end_delay: Option<f64>,
}

impl MetricsReport {
    pub const METRIC_NAMES: [&'static str; 5] = [
        "node_density",
        "broken_links",
        "delivered_fraction",
        "routing_overhead",
        "end_to_end_delay",
    ];

    pub fn value(&self, metric: &str) -> Option<f64> {
        match metric {
            "node_density" => Some(self.node_density),
            "broken_links" => Some(self.broken_links),
            "delivered_fraction" => Some(self.delivered_fraction),
            "routing_overhead" => Some(self.routing_overhead),
            "end_to_end_delay" => self.end_to_end_delay,
            _ => None,
        }
    }
}

struct SessionState {
    cached_route: Option<Vec<usize>>,
    sent: u64,
    delivered: u64,
    delay_sum: f64,
}

/// Replays CBR traffic against a sequence of connectivity snapshots.
///
/// Each snapshot covers the window up to the next one. Per window a session
/// first repairs its route: a cached route whose links broke triggers a
/// rediscovery flood, and a session with packets due but no route floods to
/// look for one. At most one flood per session per window. Packets due in
/// the window are then delivered iff a route is cached, each costing the
/// per-hop delay times the route's hop count.
pub fn run_traffic(
    snapshots: &[ConnectivitySnapshot],
    sessions: &[CbrSession],
    link: LinkParams,
) -> Result<MetricsReport> {
    let n = match snapshots.first() {
        Some(s) => s.node_count(),
        None => 0,
    };
    for s in snapshots {
        if s.node_count() != n {
            return Err(Error::SnapshotNodeMismatch(n, s.node_count()));
        }
    }
    for session in sessions {
        for node in [session.src, session.dst] {
            if node >= n {
                return Err(Error::SessionNodeOutOfRange { node, nodes: n });
            }
        }
    }

    let density = if snapshots.is_empty() {
        0.0
    } else {
        snapshots.iter().map(ConnectivitySnapshot::mean_degree).sum::<f64>()
            / snapshots.len() as f64
    };
    let broken = count_broken_links(snapshots)? as f64;

    let mut states: Vec<SessionState> = sessions
        .iter()
        .map(|_| SessionState {
            cached_route: None,
            sent: 0,
            delivered: 0,
            delay_sum: 0.0,
        })
        .collect();
    let mut overhead = 0u64;

    for (k, snap) in snapshots.iter().enumerate() {
        let Some(next) = snapshots.get(k + 1) else {
            break; // the final snapshot opens no window
        };
        let window = (snap.time, next.time);
        for (session, state) in sessions.iter().zip(states.iter_mut()) {
            let due = packets_due(session, window);
            let already_sent = state.sent;
            let mut flooded = false;

            if let Some(path) = &state.cached_route {
                let intact = path.windows(2).all(|hop| snap.adjacent(hop[0], hop[1]));
                if !intact {
                    overhead += flood_reach(snap, session.src);
                    flooded = true;
                    state.cached_route = route(snap, session.src, session.dst);
                }
            }
            if state.cached_route.is_none()
                && !flooded
                && due > 0
                && already_sent < session.max_packets as u64
            {
                overhead += flood_reach(snap, session.src);
                state.cached_route = route(snap, session.src, session.dst);
            }

            for _ in 0..due {
                if state.sent >= session.max_packets as u64 {
                    break;
                }
                state.sent += 1;
                if let Some(path) = &state.cached_route {
                    let hops = path.len().saturating_sub(1);
                    state.delivered += 1;
                    state.delay_sum += hops as f64 * link.hop_delay(session.packet_bytes);
                }
            }
        }
    }

    let sent: u64 = states.iter().map(|s| s.sent).sum();
    let delivered: u64 = states.iter().map(|s| s.delivered).sum();
    let delay_sum: f64 = states.iter().map(|s| s.delay_sum).sum();
    Ok(MetricsReport {
        node_density: density,
        broken_links: broken,
        delivered_fraction: delivered as f64 / (sent.max(1)) as f64,
        routing_overhead: overhead as f64,
        end_to_end_delay: (delivered > 0).then(|| delay_sum / delivered as f64),
    })
}

/// Packets a session emits in `[window.0, window.1)`.
fn packets_due(session: &CbrSession, window: (f64, f64)) -> u64 {
    if session.rate <= 0.0 || window.1 <= session.start {
        return 0;
    }
    let period = 1.0 / session.rate;
    // Packet i departs at start + i/rate; count i with departure in window.
    let first = if window.0 <= session.start {
        0
    } else {
        ((window.0 - session.start) / period).ceil() as u64
    };
    let last = ((window.1 - session.start) / period).ceil() as u64;
    last.saturating_sub(first)
}

/// Per-metric mean and sample standard deviation across runs. Delay
/// aggregates over the runs where it exists; absent everywhere stays absent.
pub struct AggregatedMetric {
    pub mean: f64,
    pub sd: f64,
}

pub fn aggregate_runs(reports: &[MetricsReport]) -> Vec<(String, Option<AggregatedMetric>)> {
    MetricsReport::METRIC_NAMES
        .iter()
        .map(|&name| {
            let values: Vec<f64> = reports.iter().filter_map(|r| r.value(name)).collect();
            (name.to_string(), mean_sd(&values))
        })
        .collect()
}

fn mean_sd(values: &[f64]) -> Option<AggregatedMetric> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(AggregatedMetric { mean, sd })
}
