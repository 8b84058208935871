//! Two-step knowledge discovery: firm-periods are clustered on their
//! standardized ratios, then Apriori runs over discretized features, once on
//! the whole corpus and once inside every cluster.

pub mod apriori;
pub mod cluster;
pub mod discretize;
pub mod rules;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use apriori::{apriori, apriori_gen, ItemSet};
pub use cluster::{cluster, kmeans, ClusterModel, KMeansFit};
pub use discretize::{discretize, Discretization, FirmFeatures, Transaction, TransactionSet};
pub use rules::{generate_rules, AssociationRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

/// A discretized condition, e.g. `X1=LOW` or `Z_ZONE=DISTRESS`. Ordered by
/// feature, then level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub feature: String,
    pub level: String,
}

impl Item {
    pub fn new(feature: &str, level: &str) -> Self {
        Item {
            feature: feature.to_string(),
            level: level.to_string(),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.feature, self.level)
    }
}

impl FromStr for Item {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (feature, level) = s
            .split_once('=')
            .ok_or_else(|| format!("item {s:?} is not feature=level"))?;
        Ok(Item::new(feature, level))
    }
}

impl Serialize for Item {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Item {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Minimum support as an absolute transaction count or a fraction of the
/// transactions being mined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSupport {
    Count(u64),
    Fraction(f64),
}

impl MinSupport {
    /// Absolute count for `n` transactions: fractions round up, and the
    /// result is never below 1.
    pub fn resolve(self, n: usize) -> u64 {
        match self {
            MinSupport::Count(c) => c.max(1),
            // the epsilon keeps e.g. 0.3 * 10 from rounding up to 4
            MinSupport::Fraction(f) => ((f * n as f64 - 1e-9).ceil().max(1.0)) as u64,
        }
    }

    fn validate(self) -> Result<(), MiningError> {
        match self {
            MinSupport::Count(0) => Err(MiningError::Config("min_support must be > 0".into())),
            MinSupport::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(MiningError::Config(format!(
                "fractional min_support must be in (0, 1], got {f}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MinSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSupport::Count(c) => write!(f, "{c}"),
            MinSupport::Fraction(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for MinSupport {
    type Err = String;

    /// Integers are counts (`3`), anything else a fraction (`0.25`, `1.0`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(c) = s.parse::<u64>() {
            return Ok(MinSupport::Count(c));
        }
        s.parse::<f64>()
            .map(MinSupport::Fraction)
            .map_err(|_| format!("min support {s:?} is neither a count nor a fraction"))
    }
}

impl Serialize for MinSupport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MinSupport::Count(c) => s.serialize_u64(*c),
            MinSupport::Fraction(f) => s.serialize_f64(*f),
        }
    }
}

impl<'de> Deserialize<'de> for MinSupport {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(c) => Ok(MinSupport::Count(c)),
                None => Ok(MinSupport::Fraction(n.as_f64().unwrap_or(f64::NAN))),
            },
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "min_support must be a number, found {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    pub min_support: MinSupport,
    pub min_confidence: f64,
    pub bins: usize,
    pub k_clusters: usize,
    pub seed: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_support: MinSupport::Fraction(0.2),
            min_confidence: 0.6,
            bins: 3,
            k_clusters: 2,
            seed: 42,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<(), MiningError> {
        self.min_support.validate()?;
        if !(self.min_confidence > 0.0 && self.min_confidence <= 1.0) {
            return Err(MiningError::Config(format!(
                "min_confidence must be in (0, 1], got {}",
                self.min_confidence
            )));
        }
        if self.bins < 2 {
            return Err(MiningError::Config("bins must be >= 2".into()));
        }
        if self.k_clusters < 1 {
            return Err(MiningError::Config("k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Global,
    Cluster(usize),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => f.write_str("global"),
            Scope::Cluster(i) => write!(f, "cluster:{i}"),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "global" {
            return Ok(Scope::Global);
        }
        raw.strip_prefix("cluster:")
            .and_then(|i| i.parse().ok())
            .map(Scope::Cluster)
            .ok_or_else(|| serde::de::Error::custom(format!("bad scope {raw:?}")))
    }
}

/// Frequent itemsets and rules mined over one set of transactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopedRules {
    pub scope: Scope,
    pub transaction_count: usize,
    pub min_support_count: u64,
    pub frequent: Vec<ItemSet>,
    pub rules: Vec<AssociationRule>,
}

/// One line of the rules report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub scope: Scope,
    pub antecedent: Vec<Item>,
    pub consequent: Vec<Item>,
    pub support: f64,
    pub confidence: f64,
    pub support_count: u64,
}

impl RuleRecord {
    pub fn new(scope: Scope, rule: &AssociationRule) -> Self {
        RuleRecord {
            scope,
            antecedent: rule.antecedent.items.clone(),
            consequent: rule.consequent.items.clone(),
            support: rule.support,
            confidence: rule.confidence,
            support_count: rule.support_count,
        }
    }
}

impl ScopedRules {
    pub fn records(&self) -> impl Iterator<Item = RuleRecord> + '_ {
        self.rules.iter().map(|r| RuleRecord::new(self.scope, r))
    }
}

pub fn mine_transactions(
    scope: Scope,
    tx: &TransactionSet,
    config: &MiningConfig,
) -> Result<ScopedRules, MiningError> {
    let lists = tx.item_lists();
    let min_support_count = config.min_support.resolve(lists.len());
    let frequent = apriori(&lists, min_support_count);
    let rules = generate_rules(&frequent, config.min_confidence, lists.len() as u64)?;
    Ok(ScopedRules {
        scope,
        transaction_count: lists.len(),
        min_support_count,
        frequent,
        rules,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningOutcome {
    pub clusters: ClusterModel,
    pub discretization: Discretization,
    pub global: ScopedRules,
    /// Indexed by cluster.
    pub per_cluster: Vec<ScopedRules>,
}

impl MiningOutcome {
    /// Global rules first, then each cluster in index order.
    pub fn records(&self) -> Vec<RuleRecord> {
        std::iter::once(&self.global)
            .chain(&self.per_cluster)
            .flat_map(ScopedRules::records)
            .collect()
    }
}

/// Clusters the firms, discretizes the whole corpus once, then mines rules
/// globally and inside each cluster with the same configuration.
pub fn mine(firms: &[FirmFeatures], config: &MiningConfig) -> Result<MiningOutcome, MiningError> {
    config.validate()?;
    let keyed: Vec<(String, crate::scoring::RatioVector)> =
        firms.iter().map(|f| (f.key.clone(), f.ratios)).collect();
    let clusters = cluster(&keyed, config.k_clusters, config.seed)?;
    let discretization = discretize(firms, config.bins)?;
    let all = &discretization.transactions;
    let global = mine_transactions(Scope::Global, all, config)?;
    let mut per_cluster = Vec::with_capacity(clusters.k());
    for c in 0..clusters.k() {
        let members = clusters
            .assignments
            .iter()
            .filter(|(_, l)| **l == c)
            .map(|(k, _)| k.as_str());
        per_cluster.push(mine_transactions(
            Scope::Cluster(c),
            &all.subset(members),
            config,
        )?);
    }
    Ok(MiningOutcome {
        clusters,
        discretization,
        global,
        per_cluster,
    })
}
