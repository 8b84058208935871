//! Turns scored firm-periods into market-basket transactions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Item, MiningError};
use crate::scoring::{RatioVector, ZScoreResult};

pub const ZONE_FEATURE: &str = "Z_ZONE";
pub const RATIO_FEATURES: [&str; 5] = ["X1", "X2", "X3", "X4", "X5"];

/// Everything discretization needs to know about one firm-period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmFeatures {
    pub key: String,
    pub ratios: RatioVector,
    pub zscore: ZScoreResult,
    /// Optional further continuous features such as `ASSET_GROWTH`.
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub key: String,
    pub items: BTreeSet<Item>,
}

impl Transaction {
    pub fn item_vec(&self) -> Vec<Item> {
        self.items.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionSet {
    pub transactions: Vec<Transaction>,
}

impl TransactionSet {
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn item_lists(&self) -> Vec<Vec<Item>> {
        self.transactions
            .iter()
            .map(Transaction::item_vec)
            .collect()
    }

    pub fn subset<'a>(&self, keys: impl IntoIterator<Item = &'a str>) -> TransactionSet {
        let wanted: BTreeSet<&str> = keys.into_iter().collect();
        TransactionSet {
            transactions: self
                .transactions
                .iter()
                .filter(|t| wanted.contains(t.key.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// `key,items` with items as `feature=level` joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "items"]).expect("in-memory write");
        for t in &self.transactions {
            let items: Vec<String> = t.items.iter().map(Item::to_string).collect();
            w.write_record([t.key.as_str(), items.join(";").as_str()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Level names for `n` bins, lowest first.
pub fn bin_labels(n: usize) -> Vec<String> {
    match n {
        0 => Vec::new(),
        1 => vec!["ALL".into()],
        2 => vec!["LOW".into(), "HIGH".into()],
        3 => vec!["LOW".into(), "MED".into(), "HIGH".into()],
        _ => std::iter::once("LOW".to_string())
            .chain((2..n).map(|i| format!("Q{i}")))
            .chain(std::iter::once("HIGH".to_string()))
            .collect(),
    }
}

/// Upper-inclusive edges of equal-frequency bins over `values`. Repeated
/// edges collapse, so fewer than `bins - 1` edges may come back.
pub fn quantile_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let max = sorted[n - 1];
    let mut edges: Vec<f64> = (1..bins)
        .map(|b| sorted[(b * n).div_ceil(bins) - 1])
        .filter(|e| *e < max)
        .collect();
    edges.dedup();
    edges
}

/// Bin index for `value`; a value equal to an edge falls in the lower bin.
pub fn bin_index(edges: &[f64], value: f64) -> usize {
    edges.iter().filter(|e| value > **e).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub transactions: TransactionSet,
    /// feature -> bin edges computed on the corpus
    pub edges: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Discretization {
    /// Item for a value of `feature` under the corpus bins.
    pub fn item_for(&self, feature: &str, value: f64) -> Option<Item> {
        let edges = self.edges.get(feature)?;
        let labels = bin_labels(edges.len() + 1);
        Some(Item::new(feature, &labels[bin_index(edges, value)]))
    }
}

/// Maps each firm-period to one transaction: X1..X5 and any extra features
/// become equal-frequency bins over the corpus, the Z zone becomes
/// `Z_ZONE=<zone>`. Features with too few distinct values get fewer bins
/// and a warning.
pub fn discretize(firms: &[FirmFeatures], bins: usize) -> Result<Discretization, MiningError> {
    if bins < 2 {
        return Err(MiningError::Config(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let mut columns: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (idx, firm) in firms.iter().enumerate() {
        for (name, v) in RATIO_FEATURES.iter().zip(firm.ratios.to_array()) {
            columns.entry(name.to_string()).or_default().push((idx, v));
        }
        for (name, v) in &firm.extra {
            if v.is_finite() {
                columns.entry(name.clone()).or_default().push((idx, *v));
            } else {
                warnings.push(format!("{}: non-finite {name} skipped", firm.key));
            }
        }
    }

    let mut item_sets: Vec<BTreeSet<Item>> = firms
        .iter()
        .map(|f| BTreeSet::from([Item::new(ZONE_FEATURE, f.zscore.zone.label())]))
        .collect();
    let mut edges_by_feature = BTreeMap::new();
    for (name, column) in columns {
        let values: Vec<f64> = column.iter().map(|(_, v)| *v).collect();
        let edges = quantile_edges(&values, bins);
        let effective = edges.len() + 1;
        if effective < bins {
            warnings.push(format!(
                "{name}: only {effective} of {bins} bins are distinguishable"
            ));
        }
        let labels = bin_labels(effective);
        for (idx, v) in column {
            item_sets[idx].insert(Item::new(&name, &labels[bin_index(&edges, v)]));
        }
        edges_by_feature.insert(name, edges);
    }

    let transactions = firms
        .iter()
        .zip(item_sets)
        .map(|(f, items)| Transaction {
            key: f.key.clone(),
            items,
        })
        .collect();
    Ok(Discretization {
        transactions: TransactionSet { transactions },
        edges: edges_by_feature,
        warnings,
    })
}
