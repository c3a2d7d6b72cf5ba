//! Published subgroup and pathology tables, used as report-rendering
//! fixtures.

use serde::{Deserialize, Serialize};

use super::report::{Axis, Estimate, MetricsRow, MetricsTable};

pub const PUBLISHED_TABLES_JSON: &str = include_str!("../../fixtures/published_tables.json");

/// Percentages as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedSubgroupRow {
    pub group: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedPathologyRow {
    pub pathology: String,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedDistributionRow {
    pub group: String,
    pub total: u64,
    pub training: u64,
    pub trial: u64,
    pub deployment: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedTables {
    pub age_distribution: Vec<PublishedDistributionRow>,
    pub manufacturer_distribution: Vec<PublishedDistributionRow>,
    pub gender_distribution: Vec<PublishedDistributionRow>,
    pub age_performance: Vec<PublishedSubgroupRow>,
    pub gender_performance: Vec<PublishedSubgroupRow>,
    pub pathology_performance: Vec<PublishedPathologyRow>,
}

fn pct(v: f64) -> Option<Estimate> {
    Some(Estimate::point(v / 100.0))
}

fn subgroup_table(axis: Axis, rows: &[PublishedSubgroupRow]) -> MetricsTable {
    MetricsTable {
        axis,
        rows: rows
            .iter()
            .map(|r| MetricsRow {
                accuracy: pct(r.accuracy),
                precision: pct(r.precision),
                recall: pct(r.recall),
                sensitivity: pct(r.sensitivity),
                specificity: pct(r.specificity),
                ..MetricsRow::empty(&r.group)
            })
            .collect(),
    }
}

impl PublishedTables {
    pub fn embedded() -> PublishedTables {
        serde_json::from_str(PUBLISHED_TABLES_JSON).expect("embedded fixture is valid")
    }

    pub fn age_table(&self) -> MetricsTable {
        subgroup_table(Axis::Age, &self.age_performance)
    }

    pub fn gender_table(&self) -> MetricsTable {
        subgroup_table(Axis::Gender, &self.gender_performance)
    }

    pub fn pathology_table(&self) -> MetricsTable {
        MetricsTable {
            axis: Axis::Pathology,
            rows: self
                .pathology_performance
                .iter()
                .map(|r| MetricsRow {
                    precision: pct(r.precision),
                    recall: pct(r.recall),
                    sensitivity: pct(r.recall),
                    roc_auc: Some(r.auc),
                    ..MetricsRow::empty(&r.pathology)
                })
                .collect(),
        }
    }
}
