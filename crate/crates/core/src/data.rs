//! Assets compiled into the library: the default city map and the default
//! destination rule tables for the three node classes.

use crate::environment::CityMap;
use crate::mobility::{default_classes, default_labels, RuleTable};

pub const CITY_MAP: &str = include_str!("../data/city.map");
pub const RULE_TABLE: &str = include_str!("../data/rules.csv");
pub const EXAMPLE_PRIORITIES: &str = include_str!("../data/example_priorities.csv");

/// The default 10 km x 10 km city: a 21x21 street grid at 500 m pitch with
/// eight destination sites.
pub fn bundled_map() -> CityMap {
    CityMap::parse(CITY_MAP).expect("bundled map is valid")
}

/// Destination rules for the bundled map and the default classes/labels.
pub fn bundled_rules(map: &CityMap) -> RuleTable {
    let class_names: Vec<String> = default_classes().into_iter().map(|c| c.name).collect();
    let label_names: Vec<String> = default_labels().into_iter().map(|l| l.name).collect();
    RuleTable::parse(RULE_TABLE, &class_names, &map.site_names(), &label_names)
        .expect("bundled rule table is valid")
}
