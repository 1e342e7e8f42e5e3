//! Experiment configuration: a TOML file where every key is optional and the
//! defaults reproduce the reference scenario (10 km x 10 km area, 30 nodes in
//! three equal classes at 0-10 m/s, 10-300 s pauses, 3600 s runs with 60 s
//! warm-up, 250 m radio range, 20 CBR sessions of 512 B at 4 packets/s).
//!
//! Validation reports every offending key in one pass, not just the first.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use fmm_core::mobility::{Model, NodeClass, TimeLabel, DEFAULT_SECS_PER_HOUR};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub name: String,
    pub mix: f64,
    pub speed: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSpec {
    pub name: String,
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionSpec {
    pub count: usize,
    pub packet_bytes: u32,
    pub rate: f64,
    pub max_packets: u32,
}

impl Default for SessionSpec {
    fn default() -> Self {
        SessionSpec {
            count: 20,
            packet_bytes: 512,
            rate: 4.0,
            max_packets: 6000,
        }
    }
}

/// Where destination rule tables come from: shipped verbatim with the
/// library, or re-derived from a site-priority file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    Bundled,
    Derived,
}

impl fmt::Display for TableSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableSource::Bundled => "bundled",
            TableSource::Derived => "derived",
        })
    }
}

impl FromStr for TableSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bundled" => Ok(TableSource::Bundled),
            "derived" => Ok(TableSource::Derived),
            other => Err(format!("unknown table_source {other:?} (expected bundled or derived)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub area: (f64, f64),
    pub models: Vec<Model>,
    pub nodes: usize,
    pub classes: Vec<ClassSpec>,
    pub pause: (f64, f64),
    pub duration: f64,
    pub warmup: f64,
    pub dt: f64,
    pub snapshot_interval: f64,
    pub range: f64,
    pub sessions: SessionSpec,
    pub seeds: Vec<u64>,
    pub map: Option<PathBuf>,
    pub priorities: Option<PathBuf>,
    pub table_source: TableSource,
    pub p1: f64,
    pub p2: f64,
    pub labels: Vec<LabelSpec>,
    pub secs_per_hour: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area: (10_000.0, 10_000.0),
            models: vec![Model::Fmm],
            nodes: 30,
            classes: ["personal", "public", "ambulance"]
                .iter()
                .map(|&name| ClassSpec {
                    name: name.to_string(),
                    mix: 1.0 / 3.0,
                    speed: (0.0, 10.0),
                })
                .collect(),
            pause: (10.0, 300.0),
            duration: 3600.0,
            warmup: 60.0,
            dt: 1.0,
            snapshot_interval: 1.0,
            range: 250.0,
            sessions: SessionSpec::default(),
            seeds: vec![1],
            map: None,
            priorities: None,
            table_source: TableSource::Bundled,
            p1: 0.6,
            p2: 0.4,
            labels: [("morning", 8.0), ("noon", 12.0), ("evening", 17.0)]
                .iter()
                .map(|&(name, center)| LabelSpec {
                    name: name.to_string(),
                    center,
                })
                .collect(),
            secs_per_hour: DEFAULT_SECS_PER_HOUR,
        }
    }
}

impl SimConfig {
    pub fn node_classes(&self) -> Vec<NodeClass> {
        self.classes
            .iter()
            .enumerate()
            .map(|(id, c)| NodeClass {
                id,
                name: c.name.clone(),
                speed_range: c.speed,
                priorities: None,
            })
            .collect()
    }

    pub fn time_labels(&self) -> Vec<TimeLabel> {
        self.labels
            .iter()
            .map(|l| TimeLabel {
                name: l.name.clone(),
                center: l.center,
            })
            .collect()
    }

    pub fn mobility_params(&self, model: Model) -> fmm_core::mobility::MobilityParams {
        fmm_core::mobility::MobilityParams {
            model,
            area: self.area,
            node_count: self.nodes,
            classes: self.node_classes(),
            class_mix: self.classes.iter().map(|c| c.mix).collect(),
            pause_range: self.pause,
            warmup: self.warmup,
            duration: self.duration,
            dt: self.dt,
            snapshot_interval: self.snapshot_interval,
            secs_per_hour: self.secs_per_hour,
            labels: self.time_labels(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArea {
    width: f64,
    height: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    name: String,
    mix: f64,
    speed: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabel {
    name: String,
    center: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSessions {
    count: Option<usize>,
    packet_bytes: Option<u32>,
    rate: Option<f64>,
    max_packets: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    area: Option<RawArea>,
    models: Option<Vec<String>>,
    nodes: Option<usize>,
    classes: Option<Vec<RawClass>>,
    pause: Option<[f64; 2]>,
    duration: Option<f64>,
    warmup: Option<f64>,
    dt: Option<f64>,
    snapshot_interval: Option<f64>,
    range: Option<f64>,
    sessions: Option<RawSessions>,
    seeds: Option<Vec<u64>>,
    map: Option<PathBuf>,
    priorities: Option<PathBuf>,
    table_source: Option<String>,
    p1: Option<f64>,
    p2: Option<f64>,
    labels: Option<Vec<RawLabel>>,
    secs_per_hour: Option<f64>,
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::file(path.display().to_string(), e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    let mut problems: Vec<String> = Vec::new();
    let mut complain = |key: &str, msg: String| problems.push(format!("{key}: {msg}"));

    if let Some(area) = raw.area {
        if area.width > 0.0 && area.height > 0.0 {
            cfg.area = (area.width, area.height);
        } else {
            complain("area", format!("{} x {} is not positive", area.width, area.height));
        }
    }
    if let Some(models) = raw.models {
        if models.is_empty() {
            complain("models", "at least one model is required".into());
        }
        let mut parsed = Vec::new();
        for (i, name) in models.iter().enumerate() {
            match name.parse::<Model>() {
                Ok(m) => parsed.push(m),
                Err(e) => complain(&format!("models[{i}]"), e),
            }
        }
        cfg.models = parsed;
    }
    if let Some(nodes) = raw.nodes {
        if nodes == 0 {
            complain("nodes", "must be at least 1".into());
        }
        cfg.nodes = nodes;
    }
    if let Some(classes) = raw.classes {
        if classes.is_empty() {
            complain("classes", "at least one class is required".into());
        } else {
            let mix_total: f64 = classes.iter().map(|c| c.mix).sum();
            if classes.iter().any(|c| c.mix < 0.0) || (mix_total - 1.0).abs() > 1e-6 {
                complain("classes", format!("mix values must be non-negative and sum to 1 (got {mix_total})"));
            }
            for (i, c) in classes.iter().enumerate() {
                if let Some([lo, hi]) = c.speed {
                    if !(0.0 <= lo && lo <= hi) {
                        complain(&format!("classes[{i}].speed"), format!("({lo}, {hi}) is not an ordered non-negative range"));
                    }
                }
            }
            cfg.classes = classes
                .into_iter()
                .map(|c| ClassSpec {
                    name: c.name,
                    mix: c.mix,
                    speed: c.speed.map_or((0.0, 10.0), |[lo, hi]| (lo, hi)),
                })
                .collect();
        }
    }
    if let Some([lo, hi]) = raw.pause {
        if 0.0 <= lo && lo <= hi {
            cfg.pause = (lo, hi);
        } else {
            complain("pause", format!("({lo}, {hi}) is not an ordered non-negative range"));
        }
    }
    if let Some(v) = raw.duration {
        cfg.duration = v;
    }
    if let Some(v) = raw.warmup {
        if v < 0.0 {
            complain("warmup", "must be non-negative".into());
        }
        cfg.warmup = v;
    }
    if cfg.duration <= cfg.warmup {
        complain("duration", format!("must exceed warmup ({} <= {})", cfg.duration, cfg.warmup));
    }
    if let Some(v) = raw.dt {
        if v <= 0.0 {
            complain("dt", "must be positive".into());
        }
        cfg.dt = v;
    }
    if let Some(v) = raw.snapshot_interval {
        if v <= 0.0 {
            complain("snapshot_interval", "must be positive".into());
        }
        cfg.snapshot_interval = v;
    }
    if let Some(v) = raw.range {
        if v <= 0.0 {
            complain("range", "must be positive".into());
        }
        cfg.range = v;
    }
    if let Some(s) = raw.sessions {
        if let Some(v) = s.count {
            cfg.sessions.count = v;
        }
        if let Some(v) = s.packet_bytes {
            if v == 0 {
                complain("sessions.packet_bytes", "must be at least 1".into());
            }
            cfg.sessions.packet_bytes = v;
        }
        if let Some(v) = s.rate {
            if v <= 0.0 {
                complain("sessions.rate", "must be positive".into());
            }
            cfg.sessions.rate = v;
        }
        if let Some(v) = s.max_packets {
            cfg.sessions.max_packets = v;
        }
    }
    if cfg.sessions.count > 0 && cfg.nodes < 2 {
        complain("sessions.count", "traffic needs at least 2 nodes".into());
    }
    if let Some(seeds) = raw.seeds {
        if seeds.is_empty() {
            complain("seeds", "at least one seed is required".into());
        }
        cfg.seeds = seeds;
    }
    for (key, path) in [("map", &raw.map), ("priorities", &raw.priorities)] {
        if let Some(p) = path {
            if !p.is_file() {
                complain(key, format!("file not found: {}", p.display()));
            }
        }
    }
    cfg.map = raw.map;
    cfg.priorities = raw.priorities;
    if let Some(s) = raw.table_source {
        match s.parse::<TableSource>() {
            Ok(t) => cfg.table_source = t,
            Err(e) => complain("table_source", e),
        }
    }
    if cfg.table_source == TableSource::Derived && cfg.priorities.is_none() {
        complain("priorities", "required when table_source is derived".into());
    }
    if let Some(v) = raw.p1 {
        if v < 0.0 {
            complain("p1", "must be non-negative".into());
        }
        cfg.p1 = v;
    }
    if let Some(v) = raw.p2 {
        if v < 0.0 {
            complain("p2", "must be non-negative".into());
        }
        cfg.p2 = v;
    }
    if cfg.p1 == 0.0 && cfg.p2 == 0.0 {
        complain("p1", "p1 and p2 cannot both be zero".into());
    }
    if let Some(labels) = raw.labels {
        if labels.is_empty() {
            complain("labels", "at least one time label is required".into());
        } else {
            cfg.labels = labels
                .into_iter()
                .map(|l| LabelSpec {
                    name: l.name,
                    center: l.center,
                })
                .collect();
        }
    }
    if let Some(v) = raw.secs_per_hour {
        if v <= 0.0 {
            complain("secs_per_hour", "must be positive".into());
        }
        cfg.secs_per_hour = v;
    }

    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(problems.join("\n")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_yields_reference_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.area, (10_000.0, 10_000.0));
        assert_eq!(cfg.models, vec![Model::Fmm]);
        assert_eq!(cfg.nodes, 30);
        assert_eq!(cfg.classes.len(), 3);
        for c in &cfg.classes {
            assert!((c.mix - 1.0 / 3.0).abs() < 1e-12);
            assert_eq!(c.speed, (0.0, 10.0));
        }
        assert_eq!(cfg.pause, (10.0, 300.0));
        assert_eq!(cfg.duration, 3600.0);
        assert_eq!(cfg.warmup, 60.0);
        assert_eq!(cfg.dt, 1.0);
        assert_eq!(cfg.snapshot_interval, 1.0);
        assert_eq!(cfg.range, 250.0);
        assert_eq!(
            cfg.sessions,
            SessionSpec {
                count: 20,
                packet_bytes: 512,
                rate: 4.0,
                max_packets: 6000
            }
        );
        assert_eq!(cfg.seeds, vec![1]);
        assert_eq!(cfg.map, None);
        assert_eq!(cfg.table_source, TableSource::Bundled);
        assert_eq!(cfg.p1, 0.6);
        assert_eq!(cfg.p2, 0.4);
        let names: Vec<&str> = cfg.labels.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["morning", "noon", "evening"]);
        let centers: Vec<f64> = cfg.labels.iter().map(|l| l.center).collect();
        assert_eq!(centers, [8.0, 12.0, 17.0]);
        assert_eq!(cfg.secs_per_hour, 150.0);
    }

    #[test]
    fn duration_must_exceed_warmup() {
        let err = parse_config("duration = 30.0\nwarmup = 60.0").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duration"), "{msg}");
        assert!(msg.contains("warmup") || msg.contains("exceed"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("nodez = 30").unwrap_err();
        assert!(err.to_string().contains("nodez"), "{err}");
    }

    #[test]
    fn all_violations_are_reported_together() {
        let err = parse_config(
            "dt = -1.0\nrange = 0.0\nseeds = []\nmodels = [\"fm\"]\nmap = \"/no/such/file.map\"",
        )
        .unwrap_err();
        let msg = err.to_string();
        for key in ["dt", "range", "seeds", "models[0]", "map"] {
            assert!(msg.contains(key), "missing {key} in {msg}");
        }
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config(
            r#"
models = ["fmm", "rwp_free"]
nodes = 50
duration = 960.0
warmup = 60.0
seeds = [1, 2, 3]
range = 100.0

[area]
width = 2000.0
height = 1500.0

[sessions]
count = 5

[[classes]]
name = "car"
mix = 0.5
speed = [2.0, 14.0]

[[classes]]
name = "bus"
mix = 0.5

[[labels]]
name = "rush"
center = 7.5
"#,
        )
        .unwrap();
        assert_eq!(cfg.models, vec![Model::Fmm, Model::RwpFree]);
        assert_eq!(cfg.nodes, 50);
        assert_eq!(cfg.area, (2000.0, 1500.0));
        assert_eq!(cfg.sessions.count, 5);
        assert_eq!(cfg.sessions.packet_bytes, 512, "unset session keys keep defaults");
        assert_eq!(cfg.classes.len(), 2);
        assert_eq!(cfg.classes[0].speed, (2.0, 14.0));
        assert_eq!(cfg.classes[1].speed, (0.0, 10.0));
        assert_eq!(cfg.labels.len(), 1);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn derived_tables_require_a_priority_file() {
        let err = parse_config("table_source = \"derived\"").unwrap_err();
        assert!(err.to_string().contains("priorities"), "{err}");
    }

    #[test]
    fn class_mix_must_sum_to_one() {
        let err = parse_config(
            "[[classes]]\nname = \"a\"\nmix = 0.4\n\n[[classes]]\nname = \"b\"\nmix = 0.4",
        )
        .unwrap_err();
        assert!(err.to_string().contains("sum to 1"), "{err}");
    }

    #[test]
    fn traffic_needs_two_nodes() {
        let err = parse_config("nodes = 1").unwrap_err();
        assert!(err.to_string().contains("at least 2 nodes"), "{err}");
    }
}
