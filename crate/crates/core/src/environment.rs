//! The city: a connected path graph vehicles drive on, plus named sites
//! (hospital, bazaar, ...) with a center point and an anchor vertex each.
//!
//! Map files are sectioned text:
//!
//! ```text
//! # comment
//! [vertices]
//! id, x, y
//! [edges]
//! u, v
//! [sites]
//! id, name, x, y, anchor_vertex
//! ```
//!
//! Edge lengths are always derived from vertex coordinates, never stored.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Undirected graph with euclidean edge lengths. Vertices are exposed as dense
/// indices ordered by ascending original id, so comparing indices is the same
/// as comparing ids.
#[derive(Debug, Clone)]
pub struct PathGraph {
    ids: Vec<u32>,
    positions: Vec<Point>,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize)>,
}

impl PathGraph {
    pub fn new(vertices: &[(u32, Point)], edge_list: &[(u32, u32)]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut sorted: Vec<(u32, Point)> = vertices.to_vec();
        sorted.sort_by_key(|&(id, _)| id);
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateVertex(pair[0].0));
            }
        }
        let ids: Vec<u32> = sorted.iter().map(|&(id, _)| id).collect();
        let positions: Vec<Point> = sorted.iter().map(|&(_, p)| p).collect();
        let index: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut adj = vec![Vec::new(); ids.len()];
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen = HashSet::new();
        for &(a, b) in edge_list {
            if a == b {
                return Err(Error::SelfLoopEdge(a));
            }
            let (&ia, &ib) = match (index.get(&a), index.get(&b)) {
                (Some(ia), Some(ib)) => (ia, ib),
                _ => return Err(Error::UnknownEdgeVertex(a, b)),
            };
            if !seen.insert((ia.min(ib), ia.max(ib))) {
                return Err(Error::DuplicateEdge(a, b));
            }
            let len = positions[ia].distance(positions[ib]);
            if len <= 0.0 {
                return Err(Error::ZeroLengthEdge(a, b));
            }
            adj[ia].push((ib, len));
            adj[ib].push((ia, len));
            edges.push((ia.min(ib), ia.max(ib)));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        edges.sort_unstable();
        Ok(PathGraph {
            ids,
            positions,
            adj,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Original file id of a dense vertex index.
    pub fn vertex_id(&self, idx: usize) -> u32 {
        self.ids[idx]
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn position(&self, idx: usize) -> Point {
        self.positions[idx]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Neighbors of `idx` with edge lengths, ascending by index.
    pub fn neighbors(&self, idx: usize) -> &[(usize, f64)] {
        &self.adj[idx]
    }

    /// Undirected edges as index pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Errors unless every vertex is reachable from the first one.
    pub fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            None => Ok(()),
            Some(idx) => Err(Error::Disconnected(self.ids[idx], self.ids[0])),
        }
    }

    /// Closest vertex to `p`; the lowest index wins ties.
    pub fn nearest_vertex(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = self.positions[0].distance_squared(p);
        for (i, pos) in self.positions.iter().enumerate().skip(1) {
            let d = pos.distance_squared(p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Distance from every vertex to `to`, by Dijkstra. Unreachable vertices
    /// get `f64::INFINITY`.
    fn distances_to(&self, to: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        dist[to] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push((Reverse(OrdF64(0.0)), to));
        while let Some((Reverse(OrdF64(d)), u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, len) in &self.adj[u] {
                let nd = d + len;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push((Reverse(OrdF64(nd)), v));
                }
            }
        }
        dist
    }

    /// Shortest path between two vertex indices; among equal-length paths,
    /// the one whose vertex-id sequence is lexicographically smallest.
    /// `None` when the vertices are disconnected.
    ///
    /// Runs Dijkstra from the destination, then walks forward always taking
    /// the lowest-index neighbor that stays on a shortest path; picking the
    /// minimum at every step is what makes the result lexicographically
    /// minimal.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Option<ShortestPath> {
        if src == dst {
            return Some(ShortestPath {
                length: 0.0,
                vertices: vec![src],
            });
        }
        let dist = self.distances_to(dst);
        if !dist[src].is_finite() {
            return None;
        }
        let mut vertices = vec![src];
        let mut u = src;
        while u != dst {
            let tol = 1e-9 * dist[u].max(1.0);
            let next = self.adj[u]
                .iter()
                .find(|&&(v, len)| (len + dist[v] - dist[u]).abs() <= tol)
                .map(|&(v, _)| v)
                .expect("some neighbor continues the shortest path");
            vertices.push(next);
            u = next;
            debug_assert!(vertices.len() <= self.vertex_count());
        }
        Some(ShortestPath {
            length: dist[src],
            vertices,
        })
    }
}

/// Result of a shortest-path query: total length in meters and the full
/// vertex-index sequence including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPath {
    pub length: f64,
    pub vertices: Vec<usize>,
}

/// f64 ordered by total order; fine here because distances are never NaN.
#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A named destination: a center point (used by memberships and scoring) and
/// the graph vertex vehicles actually drive to.
#[derive(Debug, Clone)]
pub struct Site {
    pub id: u32,
    pub name: String,
    pub center: Point,
    /// Dense vertex index of the anchor vertex.
    pub anchor: usize,
}

/// Pairwise euclidean distances between site centers.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_sites(sites: &[Site]) -> Self {
        let n = sites.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = sites[i].center.distance(sites[j].center);
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Largest pairwise distance (max_dis).
    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// The full environment: graph plus sites, sorted by site id so a site's
/// position in the vec equals its rank by id.
#[derive(Debug, Clone)]
pub struct CityMap {
    pub graph: PathGraph,
    pub sites: Vec<Site>,
}

impl CityMap {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Parses and fully validates a map: well-formed sections, known anchor
    /// vertices, unique site ids/names, and a connected graph.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq, Clone, Copy)]
        enum Section {
            None,
            Vertices,
            Edges,
            Sites,
        }
        let mut section = Section::None;
        let mut vertices: Vec<(u32, Point)> = Vec::new();
        let mut edge_list: Vec<(u32, u32)> = Vec::new();
        let mut raw_sites: Vec<(u32, String, Point, u32)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[vertices]" => {
                    section = Section::Vertices;
                    continue;
                }
                "[edges]" => {
                    section = Section::Edges;
                    continue;
                }
                "[sites]" => {
                    section = Section::Sites;
                    continue;
                }
                _ if line.starts_with('[') => {
                    return Err(Error::parse(lineno, format!("unknown section {line}")));
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match section {
                Section::None => {
                    return Err(Error::parse(lineno, "data before any section header"));
                }
                Section::Vertices => {
                    if fields.len() != 3 {
                        return Err(Error::parse(lineno, "vertex rows need: id, x, y"));
                    }
                    let id = parse_num::<u32>(fields[0], lineno, "vertex id")?;
                    let x = parse_num::<f64>(fields[1], lineno, "x")?;
                    let y = parse_num::<f64>(fields[2], lineno, "y")?;
                    vertices.push((id, Point::new(x, y)));
                }
                Section::Edges => {
                    if fields.len() != 2 {
                        return Err(Error::parse(lineno, "edge rows need: u, v"));
                    }
                    let u = parse_num::<u32>(fields[0], lineno, "vertex id")?;
                    let v = parse_num::<u32>(fields[1], lineno, "vertex id")?;
                    edge_list.push((u, v));
                }
                Section::Sites => {
                    if fields.len() != 5 {
                        return Err(Error::parse(
                            lineno,
                            "site rows need: id, name, x, y, anchor_vertex",
                        ));
                    }
                    let id = parse_num::<u32>(fields[0], lineno, "site id")?;
                    let name = fields[1].to_string();
                    if name.is_empty() {
                        return Err(Error::parse(lineno, "empty site name"));
                    }
                    let x = parse_num::<f64>(fields[2], lineno, "x")?;
                    let y = parse_num::<f64>(fields[3], lineno, "y")?;
                    let anchor = parse_num::<u32>(fields[4], lineno, "anchor vertex id")?;
                    raw_sites.push((id, name, Point::new(x, y), anchor));
                }
            }
        }

        if edge_list.is_empty() {
            return Err(Error::NoEdges);
        }
        let graph = PathGraph::new(&vertices, &edge_list)?;
        graph.check_connected()?;

        if raw_sites.is_empty() {
            return Err(Error::NoSites);
        }
        raw_sites.sort_by_key(|s| s.0);
        let mut sites = Vec::with_capacity(raw_sites.len());
        let mut names = HashSet::new();
        for window in raw_sites.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::DuplicateSiteId(window[0].0));
            }
        }
        for (id, name, center, anchor_id) in raw_sites {
            if !names.insert(name.clone()) {
                return Err(Error::DuplicateSiteName(name));
            }
            let anchor = graph.index_of(anchor_id).ok_or(Error::UnknownAnchor {
                name: name.clone(),
                vertex: anchor_id,
            })?;
            sites.push(Site {
                id,
                name,
                center,
                anchor,
            });
        }
        Ok(CityMap { graph, sites })
    }

    /// Site whose center is closest to `p`; the lowest site id wins ties.
    pub fn nearest_site(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = self.sites[0].center.distance_squared(p);
        for (i, site) in self.sites.iter().enumerate().skip(1) {
            let d = site.center.distance_squared(p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn site_named(&self, name: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.name == name)
    }

    pub fn site_names(&self) -> Vec<String> {
        self.sites.iter().map(|s| s.name.clone()).collect()
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_sites(&self.sites)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, lineno: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(lineno, format!("bad {what}: {s:?}")))
}
