//! Orchestration: expand a config into (model, seed) cells, run mobility and
//! the network layer for each, and emit traces, a metrics CSV, and per-metric
//! plot data. Everything is assembled in memory first; files only appear
//! once the whole experiment has succeeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fmm_core::environment::CityMap;
use fmm_core::mobility::{
    derive_rule_table, load_priorities, run_mobility, MobilityRun, Model, RuleTable,
    ScoringParams, STREAM_TRAFFIC,
};
use fmm_core::netsim::{
    aggregate_runs, run_traffic, CbrSession, ConnectivitySnapshot, LinkParams, MetricsReport,
};

use crate::config::{SimConfig, TableSource};
use crate::trace::format_trace;
use crate::{CliError, Result};

pub struct CellOutput {
    pub model: Model,
    pub seed: u64,
    pub trace_name: String,
    pub trace: String,
    pub report: MetricsReport,
}

pub struct ExperimentOutput {
    pub cells: Vec<CellOutput>,
    pub csv: String,
    /// (file name, contents) per metric.
    pub plots: Vec<(String, String)>,
}

/// The map a config points at, or the bundled city when it names none.
pub fn load_map(config: &SimConfig) -> Result<CityMap> {
    match &config.map {
        None => Ok(fmm_core::data::bundled_map()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::file(path.display().to_string(), e))?;
            CityMap::parse(&text).map_err(|e| CliError::file(path.display().to_string(), e))
        }
    }
}

/// The destination rule table for a config: bundled verbatim, or re-derived
/// from the configured site-priority file.
pub fn load_rules(config: &SimConfig, map: &CityMap) -> Result<RuleTable> {
    match config.table_source {
        TableSource::Bundled => {
            let class_names: Vec<String> =
                config.classes.iter().map(|c| c.name.clone()).collect();
            let label_names: Vec<String> = config.labels.iter().map(|l| l.name.clone()).collect();
            RuleTable::parse(
                fmm_core::data::RULE_TABLE,
                &class_names,
                &map.site_names(),
                &label_names,
            )
            .map_err(CliError::Core)
        }
        TableSource::Derived => {
            let tables = load_priority_tables(config, map)?;
            let matrix = map.distance_matrix();
            let scoring = ScoringParams {
                p1: config.p1,
                p2: config.p2,
                max_dis: matrix.max_distance(),
            };
            derive_rule_table(&tables, &matrix, &scoring).map_err(CliError::Core)
        }
    }
}

fn load_priority_tables(
    config: &SimConfig,
    map: &CityMap,
) -> Result<Vec<fmm_core::mobility::PriorityTable>> {
    let path = config
        .priorities
        .as_ref()
        .ok_or_else(|| CliError::Config("priorities: no priority file configured".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::file(path.display().to_string(), e))?;
    let class_names: Vec<String> = config.classes.iter().map(|c| c.name.clone()).collect();
    let label_names: Vec<String> = config.labels.iter().map(|l| l.name.clone()).collect();
    load_priorities(&text, &class_names, &map.site_names(), &label_names)
        .map_err(|e| CliError::file(path.display().to_string(), e))
}

/// Rule-table text derived from the configured priority file, in the same
/// format the bundled table ships in.
pub fn derive_rules_text(config: &SimConfig) -> Result<String> {
    let map = load_map(config)?;
    let tables = load_priority_tables(config, &map)?;
    let matrix = map.distance_matrix();
    let scoring = ScoringParams {
        p1: config.p1,
        p2: config.p2,
        max_dis: matrix.max_distance(),
    };
    let rules = derive_rule_table(&tables, &matrix, &scoring)?;
    let class_names: Vec<String> = config.classes.iter().map(|c| c.name.clone()).collect();
    let label_names: Vec<String> = config.labels.iter().map(|l| l.name.clone()).collect();
    Ok(rules.format(&class_names, &map.site_names(), &label_names))
}

fn cells_of(config: &SimConfig) -> Vec<(Model, u64)> {
    config
        .models
        .iter()
        .flat_map(|&m| config.seeds.iter().map(move |&s| (m, s)))
        .collect()
}

fn run_cell_mobility(
    config: &SimConfig,
    map: &CityMap,
    rules: &RuleTable,
    model: Model,
    seed: u64,
) -> Result<MobilityRun> {
    let params = config.mobility_params(model);
    run_mobility(&params, map, rules, seed).map_err(|source| CliError::Run {
        context: format!("model {model}, seed {seed}"),
        source,
    })
}

fn draw_sessions(config: &SimConfig, seed: u64) -> Vec<CbrSession> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_TRAFFIC);
    (0..config.sessions.count)
        .map(|_| {
            let src = rng.random_range(0..config.nodes);
            let mut dst = rng.random_range(0..config.nodes);
            while dst == src {
                dst = rng.random_range(0..config.nodes);
            }
            CbrSession {
                src,
                dst,
                start: config.warmup,
                packet_bytes: config.sessions.packet_bytes,
                rate: config.sessions.rate,
                max_packets: config.sessions.max_packets,
            }
        })
        .collect()
}

fn measure(config: &SimConfig, run: &MobilityRun, seed: u64) -> Result<MetricsReport> {
    let snapshots: Vec<ConnectivitySnapshot> = run
        .snapshots
        .iter()
        .filter(|s| s.time >= config.warmup)
        .map(|s| ConnectivitySnapshot::build(s.time, &s.positions, config.range))
        .collect();
    let sessions = draw_sessions(config, seed);
    run_traffic(&snapshots, &sessions, LinkParams::default()).map_err(|source| CliError::Run {
        context: format!("model {}, seed {seed}", run.model),
        source,
    })
}

pub fn run_cells(config: &SimConfig) -> Result<ExperimentOutput> {
    let map = load_map(config)?;
    let rules = load_rules(config, &map)?;
    let mut cells = Vec::new();
    for (model, seed) in cells_of(config) {
        let run = run_cell_mobility(config, &map, &rules, model, seed)?;
        let report = measure(config, &run, seed)?;
        cells.push(CellOutput {
            model,
            seed,
            trace_name: format!("trace_{model}_seed{seed}.tcl"),
            trace: format_trace(&run.snapshots[0].positions, &run.events),
            report,
        });
    }
    let csv = metrics_csv(&cells);
    let plots = plot_files(config, &cells);
    Ok(ExperimentOutput { cells, csv, plots })
}

fn metrics_csv(cells: &[CellOutput]) -> String {
    let mut out = String::from("model,seed,metric,value\n");
    for cell in cells {
        for name in MetricsReport::METRIC_NAMES {
            let value = match cell.report.value(name) {
                Some(v) => v.to_string(),
                None => "na".to_string(),
            };
            writeln!(out, "{},{},{name},{value}", cell.model, cell.seed).unwrap();
        }
    }
    out
}

/// One plot-data file per metric: a `model mean sd` row per model,
/// aggregated across that model's seeds.
fn plot_files(config: &SimConfig, cells: &[CellOutput]) -> Vec<(String, String)> {
    let mut by_model: BTreeMap<&str, Vec<&MetricsReport>> = BTreeMap::new();
    for cell in cells {
        by_model.entry(cell.model.name()).or_default().push(&cell.report);
    }
    // keep the config's model order rather than alphabetical
    let order: Vec<&str> = config.models.iter().map(|m| m.name()).collect();

    MetricsReport::METRIC_NAMES
        .iter()
        .map(|&metric| {
            let mut body = String::from("# model mean sd\n");
            for name in &order {
                let Some(reports) = by_model.get(name) else {
                    continue;
                };
                let cloned: Vec<MetricsReport> = reports.iter().map(|&r| r.clone()).collect();
                let aggregated = aggregate_runs(&cloned);
                let row = aggregated
                    .iter()
                    .find(|(n, _)| n == metric)
                    .and_then(|(_, v)| v.as_ref())
                    .map_or_else(
                        || format!("{name} na na\n"),
                        |a| format!("{name} {} {}\n", a.mean, a.sd),
                    );
                body.push_str(&row);
            }
            (format!("plot_{metric}.dat"), body)
        })
        .collect()
}

/// Runs the whole experiment and writes traces, `metrics.csv`, and the plot
/// files into `dir` (created if needed).
pub fn run_experiment(config: &SimConfig, dir: &Path) -> Result<()> {
    let output = run_cells(config)?;
    let mut files: Vec<(&str, &str)> = output
        .cells
        .iter()
        .map(|c| (c.trace_name.as_str(), c.trace.as_str()))
        .collect();
    files.push(("metrics.csv", &output.csv));
    files.extend(output.plots.iter().map(|(n, c)| (n.as_str(), c.as_str())));
    write_files(dir, &files)
}

/// Mobility only: writes the trace files and nothing else.
pub fn run_traces(config: &SimConfig, dir: &Path) -> Result<()> {
    let map = load_map(config)?;
    let rules = load_rules(config, &map)?;
    let mut traces = Vec::new();
    for (model, seed) in cells_of(config) {
        let run = run_cell_mobility(config, &map, &rules, model, seed)?;
        traces.push((
            format!("trace_{model}_seed{seed}.tcl"),
            format_trace(&run.snapshots[0].positions, &run.events),
        ));
    }
    let files: Vec<(&str, &str)> = traces.iter().map(|(n, c)| (n.as_str(), c.as_str())).collect();
    write_files(dir, &files)
}

fn write_files(dir: &Path, files: &[(&str, &str)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir.display().to_string(), e))?;
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::file(path.display().to_string(), e))?;
    }
    Ok(())
}
