//! Destination rule tables and their two sources: verbatim files, or
//! derivation from per-class site attractions by scored argmin.

use std::collections::HashMap;

use crate::environment::DistanceMatrix;
use crate::error::{Error, Result};

/// Per-class site attraction `A` in `[0, 1]`, indexed by (time label, site).
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityTable {
    labels: usize,
    sites: usize,
    values: Vec<f64>,
}

impl PriorityTable {
    pub fn from_values(labels: usize, sites: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), labels * sites);
        PriorityTable {
            labels,
            sites,
            values,
        }
    }

    pub fn get(&self, label: usize, site: usize) -> f64 {
        self.values[label * self.sites + site]
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn sites(&self) -> usize {
        self.sites
    }
}

/// Weights of Eq-style destination scoring: `k = p1 (1 - A) + p2 (d / max_dis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringParams {
    pub p1: f64,
    pub p2: f64,
    pub max_dis: f64,
}

/// Scores a candidate destination; lower is better. `a` is the candidate's
/// attraction, `d` the distance from the current site to the candidate.
pub fn score_destination(a: f64, d: f64, params: &ScoringParams) -> Result<f64> {
    if d > params.max_dis {
        return Err(Error::DistanceAboveMax {
            distance: d,
            max_dis: params.max_dis,
        });
    }
    Ok(params.p1 * (1.0 - a) + params.p2 * (d / params.max_dis))
}

/// Total map (class, current site, time label) -> destination site.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    classes: usize,
    sites: usize,
    labels: usize,
    dest: Vec<usize>,
}

impl RuleTable {
    pub fn from_dest(classes: usize, sites: usize, labels: usize, dest: Vec<usize>) -> Self {
        assert_eq!(dest.len(), classes * sites * labels);
        RuleTable {
            classes,
            sites,
            labels,
            dest,
        }
    }

    /// A table sending every cell to the same destination.
    pub fn uniform(classes: usize, sites: usize, labels: usize, dest: usize) -> Self {
        RuleTable {
            classes,
            sites,
            labels,
            dest: vec![dest; classes * sites * labels],
        }
    }

    pub fn destination(&self, class: usize, site: usize, label: usize) -> usize {
        self.dest[(class * self.sites + site) * self.labels + label]
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    /// Parses `class, current_site, time_label, destination_site` rows.
    /// Names are matched case-insensitively; the table must be total.
    pub fn parse(
        text: &str,
        class_names: &[String],
        site_names: &[String],
        label_names: &[String],
    ) -> Result<Self> {
        let classes = NameIndex::new(class_names, NameKind::Class);
        let sites = NameIndex::new(site_names, NameKind::Site);
        let labels = NameIndex::new(label_names, NameKind::Label);
        let mut dest: Vec<Option<usize>> =
            vec![None; class_names.len() * site_names.len() * label_names.len()];

        for (lineno, fields) in data_rows(text) {
            if fields.len() != 4 {
                return Err(Error::parse(
                    lineno,
                    "rule rows need: class, current_site, time_label, destination_site",
                ));
            }
            let c = classes.get(fields[0])?;
            let s = sites.get(fields[1])?;
            let l = labels.get(fields[2])?;
            let d = sites.get(fields[3])?;
            let slot = &mut dest[(c * site_names.len() + s) * label_names.len() + l];
            if slot.is_some() {
                return Err(Error::DuplicateRow {
                    class: class_names[c].clone(),
                    site: site_names[s].clone(),
                    label: label_names[l].clone(),
                });
            }
            *slot = Some(d);
        }

        let mut out = Vec::with_capacity(dest.len());
        for (i, slot) in dest.iter().enumerate() {
            match slot {
                Some(d) => out.push(*d),
                None => {
                    let l = i % label_names.len();
                    let s = (i / label_names.len()) % site_names.len();
                    let c = i / (label_names.len() * site_names.len());
                    return Err(Error::MissingRow {
                        class: class_names[c].clone(),
                        site: site_names[s].clone(),
                        label: label_names[l].clone(),
                    });
                }
            }
        }
        Ok(RuleTable::from_dest(
            class_names.len(),
            site_names.len(),
            label_names.len(),
            out,
        ))
    }

    /// Renders the table in the same row format `parse` accepts.
    pub fn format(
        &self,
        class_names: &[String],
        site_names: &[String],
        label_names: &[String],
    ) -> String {
        let mut out = String::from("# class, current_site, time_label, destination_site\n");
        for c in 0..self.classes {
            for s in 0..self.sites {
                for l in 0..self.labels {
                    out.push_str(&format!(
                        "{}, {}, {}, {}\n",
                        class_names[c],
                        site_names[s],
                        label_names[l],
                        site_names[self.destination(c, s, l)]
                    ));
                }
            }
        }
        out
    }
}

/// Parses `class, time_label, site, A` rows into one complete attraction
/// table per class. Every (label, site) pair must appear exactly once per
/// class and every `A` must be in `[0, 1]`.
pub fn load_priorities(
    text: &str,
    class_names: &[String],
    site_names: &[String],
    label_names: &[String],
) -> Result<Vec<PriorityTable>> {
    let classes = NameIndex::new(class_names, NameKind::Class);
    let sites = NameIndex::new(site_names, NameKind::Site);
    let labels = NameIndex::new(label_names, NameKind::Label);
    let per_class = label_names.len() * site_names.len();
    let mut values: Vec<Option<f64>> = vec![None; class_names.len() * per_class];

    for (lineno, fields) in data_rows(text) {
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                "priority rows need: class, time_label, site, attraction",
            ));
        }
        let c = classes.get(fields[0])?;
        let l = labels.get(fields[1])?;
        let s = sites.get(fields[2])?;
        let a: f64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad attraction: {:?}", fields[3])))?;
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::PriorityOutOfRange {
                class: class_names[c].clone(),
                label: label_names[l].clone(),
                site: site_names[s].clone(),
                value: a,
            });
        }
        let slot = &mut values[c * per_class + l * site_names.len() + s];
        if slot.is_some() {
            return Err(Error::DuplicateRow {
                class: class_names[c].clone(),
                site: site_names[s].clone(),
                label: label_names[l].clone(),
            });
        }
        *slot = Some(a);
    }

    let mut out = Vec::with_capacity(class_names.len());
    for c in 0..class_names.len() {
        let mut table = Vec::with_capacity(per_class);
        for i in 0..per_class {
            match values[c * per_class + i] {
                Some(a) => table.push(a),
                None => {
                    let s = i % site_names.len();
                    let l = i / site_names.len();
                    return Err(Error::MissingRow {
                        class: class_names[c].clone(),
                        site: site_names[s].clone(),
                        label: label_names[l].clone(),
                    });
                }
            }
        }
        out.push(PriorityTable::from_values(
            label_names.len(),
            site_names.len(),
            table,
        ));
    }
    Ok(out)
}

/// Fills a rule table by scoring all candidate sites for every (class,
/// current site, label) cell and keeping the argmin; the smallest site id
/// wins ties.
pub fn derive_rule_table(
    priorities: &[PriorityTable],
    dist: &DistanceMatrix,
    params: &ScoringParams,
) -> Result<RuleTable> {
    let sites = dist.len();
    let labels = priorities.first().map_or(0, |p| p.labels());
    let mut dest = Vec::with_capacity(priorities.len() * sites * labels);
    for table in priorities {
        for s in 0..sites {
            for l in 0..labels {
                let mut best = 0;
                let mut best_k = f64::INFINITY;
                for j in 0..sites {
                    let k = score_destination(table.get(l, j), dist.get(s, j), params)?;
                    if k < best_k {
                        best = j;
                        best_k = k;
                    }
                }
                dest.push(best);
            }
        }
    }
    Ok(RuleTable::from_dest(priorities.len(), sites, labels, dest))
}

/// Case-insensitive name -> index lookup for classes/sites/labels.
struct NameIndex {
    by_name: HashMap<String, usize>,
    kind: NameKind,
}

#[derive(Clone, Copy)]
enum NameKind {
    Class,
    Site,
    Label,
}

impl NameIndex {
    fn new(names: &[String], kind: NameKind) -> Self {
        NameIndex {
            by_name: names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.to_ascii_lowercase(), i))
                .collect(),
            kind,
        }
    }

    fn get(&self, name: &str) -> Result<usize> {
        self.by_name
            .get(&name.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| match self.kind {
                NameKind::Class => Error::UnknownClass(name.to_string()),
                NameKind::Site => Error::UnknownSite(name.to_string()),
                NameKind::Label => Error::UnknownLabel(name.to_string()),
            })
    }
}

/// Non-empty, non-comment lines split on commas, with 1-based line numbers.
fn data_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        Some((i + 1, line.split(',').map(str::trim).collect()))
    })
}
