use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::apriori::ItemSet;
use super::MiningError;

/// `antecedent -> consequent`, with support as a fraction of all
/// transactions and confidence `support(A ∪ C) / support(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule<T = super::Item> {
    pub antecedent: ItemSet<T>,
    pub consequent: ItemSet<T>,
    pub support: f64,
    pub confidence: f64,
    /// Transactions containing antecedent and consequent together.
    pub support_count: u64,
}

impl<T: Ord> AssociationRule<T> {
    /// True when every antecedent item occurs in `items` (sorted).
    pub fn antecedent_matches(&self, items: &[T]) -> bool {
        self.antecedent
            .items
            .iter()
            .all(|i| items.binary_search(i).is_ok())
    }
}

fn rule_order<T: Ord>(a: &AssociationRule<T>, b: &AssociationRule<T>) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(b.support.total_cmp(&a.support))
        .then_with(|| a.antecedent.items.cmp(&b.antecedent.items))
        .then_with(|| a.consequent.items.cmp(&b.consequent.items))
}

/// Every rule `A -> F \ A` for frequent `F` with `|F| >= 2` and non-empty
/// proper `A ⊂ F` whose confidence reaches `min_confidence`. Sorted by
/// confidence, then support (both descending), then items.
///
/// `frequent` must be closed under subsets, as [`super::apriori`] output is.
pub fn generate_rules<T: Ord + Clone>(
    frequent: &[ItemSet<T>],
    min_confidence: f64,
    tx_count: u64,
) -> Result<Vec<AssociationRule<T>>, MiningError> {
    if tx_count == 0 {
        return if frequent.is_empty() {
            Ok(Vec::new())
        } else {
            Err(MiningError::InternalConsistency(
                "frequent itemsets over zero transactions".into(),
            ))
        };
    }
    let support: BTreeMap<&[T], u64> = frequent
        .iter()
        .map(|s| (s.items.as_slice(), s.support_count))
        .collect();
    let lookup = |items: &[T]| -> Result<u64, MiningError> {
        match support.get(items) {
            Some(&c) if c > 0 => Ok(c),
            _ => Err(MiningError::InternalConsistency(format!(
                "subset of size {} of a frequent itemset has no support",
                items.len()
            ))),
        }
    };

    let mut rules = Vec::new();
    for full in frequent.iter().filter(|s| s.len() >= 2) {
        let n = full.len();
        if n >= 64 {
            return Err(MiningError::ContractViolation(format!(
                "itemset of size {n} is too large for rule enumeration"
            )));
        }
        for mask in 1u64..(1u64 << n) - 1 {
            let (mut ante, mut cons) = (Vec::new(), Vec::new());
            for (bit, item) in full.items.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    ante.push(item.clone());
                } else {
                    cons.push(item.clone());
                }
            }
            let ante_count = lookup(&ante)?;
            let confidence = full.support_count as f64 / ante_count as f64;
            if confidence >= min_confidence {
                let cons_count = lookup(&cons)?;
                rules.push(AssociationRule {
                    antecedent: ItemSet {
                        items: ante,
                        support_count: ante_count,
                    },
                    consequent: ItemSet {
                        items: cons,
                        support_count: cons_count,
                    },
                    support: full.support_count as f64 / tx_count as f64,
                    confidence,
                    support_count: full.support_count,
                });
            }
        }
    }
    rules.sort_by(rule_order);
    Ok(rules)
}
