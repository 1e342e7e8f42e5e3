use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u32),
    #[error("edge ({0}, {1}) references an unknown vertex")]
    UnknownEdgeVertex(u32, u32),
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoopEdge(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("edge ({0}, {1}) has zero length")]
    ZeroLengthEdge(u32, u32),
    #[error("map has no vertices")]
    EmptyGraph,
    #[error("map has no edges")]
    NoEdges,
    #[error("graph is disconnected: vertex {0} is unreachable from vertex {1}")]
    Disconnected(u32, u32),

    #[error("map has no sites")]
    NoSites,
    #[error("duplicate site id {0}")]
    DuplicateSiteId(u32),
    #[error("duplicate site name {0:?}")]
    DuplicateSiteName(String),
    #[error("site {name:?} is anchored to unknown vertex {vertex}")]
    UnknownAnchor { name: String, vertex: u32 },

    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("unknown site {0:?}")]
    UnknownSite(String),
    #[error("unknown time label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate row for ({class}, {site}, {label})")]
    DuplicateRow {
        class: String,
        site: String,
        label: String,
    },
    #[error("missing row for ({class}, {site}, {label})")]
    MissingRow {
        class: String,
        site: String,
        label: String,
    },
    #[error("priority {value} for ({class}, {label}, {site}) is outside [0, 1]")]
    PriorityOutOfRange {
        class: String,
        label: String,
        site: String,
        value: f64,
    },

    #[error("distance {distance} exceeds max_dis {max_dis}")]
    DistanceAboveMax { distance: f64, max_dis: f64 },

    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),

    #[error("snapshots disagree on node count ({0} vs {1})")]
    SnapshotNodeMismatch(usize, usize),
    #[error("session references node {node} but the run has {nodes} nodes")]
    SessionNodeOutOfRange { node: usize, nodes: usize },

    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
