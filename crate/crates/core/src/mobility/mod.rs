//! The movement layer: vehicle classes, destination rule tables, fuzzy
//! destination selection, and the per-node state machine, plus two
//! random-waypoint baselines for comparison.

mod rules;
mod sim;

pub use rules::{
    derive_rule_table, load_priorities, score_destination, PriorityTable, RuleTable, ScoringParams,
};
pub use sim::{
    run_mobility, LegTarget, MobilityParams, MobilityRun, MobilitySim, Mode, Model, NodeState,
    Snapshot, TraceEvent, STREAM_TRAFFIC,
};

use crate::environment::CityMap;
use crate::fuzzy::{time_membership, FuzzyRule, FuzzySystem};
use crate::geometry::Point;

/// How many simulated seconds make one hour of model time.
pub const DEFAULT_SECS_PER_HOUR: f64 = 150.0;

/// A vehicle class. `priorities` is only populated when destination tables are
/// being re-derived from site attractions instead of loaded verbatim.
#[derive(Debug, Clone)]
pub struct NodeClass {
    pub id: usize,
    pub name: String,
    pub speed_range: (f64, f64),
    pub priorities: Option<PriorityTable>,
}

/// A named time-of-day fuzzy set, e.g. morning centered at hour 8.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLabel {
    pub name: String,
    pub center: f64,
}

pub fn default_classes() -> Vec<NodeClass> {
    ["personal", "public", "ambulance"]
        .iter()
        .enumerate()
        .map(|(id, &name)| NodeClass {
            id,
            name: name.to_string(),
            speed_range: (0.0, 10.0),
            priorities: None,
        })
        .collect()
}

pub fn default_labels() -> Vec<TimeLabel> {
    [("morning", 8.0), ("noon", 12.0), ("evening", 17.0)]
        .iter()
        .map(|&(name, center)| TimeLabel {
            name: name.to_string(),
            center,
        })
        .collect()
}

/// Hour of day for a simulation timestamp; wraps every 24 model hours.
pub fn hours_of(t_sim: f64, secs_per_hour: f64) -> f64 {
    (t_sim / secs_per_hour).rem_euclid(24.0)
}

/// One fuzzy rule per (site, label) cell of a class's rule table: IF the hour
/// is near the label's center AND the position is near the site's center THEN
/// head toward the cell's destination center.
pub fn build_fuzzy_system(
    map: &CityMap,
    rules: &RuleTable,
    class: usize,
    labels: &[TimeLabel],
) -> FuzzySystem {
    let mut out = Vec::with_capacity(map.sites.len() * labels.len());
    for (s, site) in map.sites.iter().enumerate() {
        for (l, label) in labels.iter().enumerate() {
            out.push(FuzzyRule {
                time_center: label.center,
                place_center: site.center,
                consequent: map.sites[rules.destination(class, s, l)].center,
            });
        }
    }
    FuzzySystem::new(out)
}

/// Picks the destination site for a node of `class` at position `p` and model
/// hour `hours`: evaluate the class's fuzzy system and snap the output point
/// to the nearest site. When every rule activation underflows (far from all
/// sites), fall back to the crisp table entry at the nearest site and the
/// best-matching time label.
pub fn select_destination_fuzzy(
    system: &FuzzySystem,
    map: &CityMap,
    rules: &RuleTable,
    labels: &[TimeLabel],
    class: usize,
    hours: f64,
    p: Point,
) -> usize {
    match system.evaluate(hours, p) {
        Some(out) => map.nearest_site(out),
        None => {
            let site = map.nearest_site(p);
            let label = argmax_label(labels, hours);
            rules.destination(class, site, label)
        }
    }
}

/// Label with the highest time membership at `hours`; the first wins ties.
fn argmax_label(labels: &[TimeLabel], hours: f64) -> usize {
    let mut best = 0;
    let mut best_w = time_membership(hours, labels[0].center);
    for (i, label) in labels.iter().enumerate().skip(1) {
        let w = time_membership(hours, label.center);
        if w > best_w {
            best = i;
            best_w = w;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hours_wrap_daily() {
        assert_abs_diff_eq!(hours_of(0.0, 150.0), 0.0);
        assert_abs_diff_eq!(hours_of(1200.0, 150.0), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hours_of(3600.0, 150.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hours_of(3750.0, 150.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn label_argmax_prefers_nearest_center() {
        let labels = default_labels();
        assert_eq!(argmax_label(&labels, 7.0), 0);
        assert_eq!(argmax_label(&labels, 13.0), 1);
        assert_eq!(argmax_label(&labels, 23.0), 2);
        // Equidistant between morning (8) and noon (12): first label wins.
        assert_eq!(argmax_label(&labels, 10.0), 0);
    }

    #[test]
    fn dominant_rule_wins_at_exact_centers() {
        let map = data::bundled_map();
        let rules = data::bundled_rules(&map);
        let labels = default_labels();
        for class in 0..3 {
            let system = build_fuzzy_system(&map, &rules, class, &labels);
            for (s, site) in map.sites.iter().enumerate() {
                for (l, label) in labels.iter().enumerate() {
                    let weights = system.activations(label.center, site.center);
                    let dominant = l + s * labels.len();
                    let max_other = weights
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != dominant)
                        .map(|(_, &w)| w)
                        .fold(0.0, f64::max);
                    assert!(
                        weights[dominant] >= 10.0 * max_other,
                        "rule for ({}, {}) is not dominant at its own centers",
                        site.name,
                        label.name
                    );
                    let picked = select_destination_fuzzy(
                        &system,
                        &map,
                        &rules,
                        &labels,
                        class,
                        label.center,
                        site.center,
                    );
                    assert_eq!(picked, rules.destination(class, s, l));
                }
            }
        }
    }

    #[test]
    fn uniform_table_collapses_to_single_site() {
        let map = data::bundled_map();
        let labels = default_labels();
        let n = map.sites.len();
        let emergency = map.site_named("Emergency").unwrap();
        let rules = RuleTable::uniform(1, n, labels.len(), emergency);
        let system = build_fuzzy_system(&map, &rules, 0, &labels);
        for &(t, x, y) in &[
            (0.0, 0.0, 0.0),
            (9.5, 5000.0, 5000.0),
            (16.0, 9000.0, 1000.0),
            (23.0, 2000.0, 8000.0),
        ] {
            let got =
                select_destination_fuzzy(&system, &map, &rules, &labels, 0, t, Point::new(x, y));
            assert_eq!(got, emergency);
        }
    }

    #[test]
    fn snapped_output_is_always_a_site() {
        use rand::Rng;
        use rand::SeedableRng;
        let map = data::bundled_map();
        let rules = data::bundled_rules(&map);
        let labels = default_labels();
        let system = build_fuzzy_system(&map, &rules, 1, &labels);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = rng.random_range(0.0..24.0);
            let p = Point::new(
                rng.random_range(0.0..10_000.0),
                rng.random_range(0.0..10_000.0),
            );
            let site = select_destination_fuzzy(&system, &map, &rules, &labels, 1, t, p);
            assert!(site < map.sites.len());
        }
    }

    #[test]
    fn underflow_far_from_sites_falls_back_to_crisp_lookup() {
        // A map whose single site cluster is tiny compared to the queried
        // point, so all activations underflow.
        let text = "
[vertices]
0, 0.0, 0.0
1, 100.0, 0.0
[edges]
0, 1
[sites]
0, A, 0.0, 0.0, 0
1, B, 100.0, 0.0, 1
";
        let map = CityMap::parse(text).unwrap();
        let labels = default_labels();
        let rules = RuleTable::uniform(1, 2, labels.len(), 1);
        let system = build_fuzzy_system(&map, &rules, 0, &labels);
        let far = Point::new(1.0e6, 1.0e6);
        assert_eq!(system.evaluate(8.0, far), None);
        let got = select_destination_fuzzy(&system, &map, &rules, &labels, 0, 8.0, far);
        assert_eq!(got, 1);
    }
}
