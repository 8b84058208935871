//! Level-wise frequent itemset mining.
//!
//! Items are interned to dense ids in their natural order, so every
//! candidate is a sorted `Vec<u32>` and the lexicographic order of ids
//! matches the order of the original items. Support is counted with a
//! prefix index over the sorted candidate list instead of a hash tree.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MiningError;

/// A non-empty, strictly sorted set of items with its support count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemSet<T = super::Item> {
    pub items: Vec<T>,
    pub support_count: u64,
}

impl<T: Ord> ItemSet<T> {
    pub fn new(mut items: Vec<T>, support_count: u64) -> Self {
        items.sort();
        items.dedup();
        ItemSet {
            items,
            support_count,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn is_strictly_sorted(&self) -> bool {
        self.items.windows(2).all(|w| w[0] < w[1])
    }
}

/// Candidate generation: joins `(k-1)`-itemsets that agree on their first
/// `k-2` items, then drops every candidate with a `(k-1)`-subset missing
/// from `prev`. Output is sorted and duplicate-free with zeroed counts.
pub fn apriori_gen<T: Ord + Clone>(
    prev: &[ItemSet<T>],
    k: usize,
) -> Result<Vec<ItemSet<T>>, MiningError> {
    if k < 2 {
        return Err(MiningError::ContractViolation(format!(
            "apriori_gen needs k >= 2, got {k}"
        )));
    }
    for set in prev {
        if set.len() != k - 1 || !set.is_strictly_sorted() {
            return Err(MiningError::ContractViolation(format!(
                "apriori_gen for k = {k} expects sorted itemsets of size {}, found one of size {}",
                k - 1,
                set.len()
            )));
        }
    }
    let mut sorted: Vec<&[T]> = prev.iter().map(|s| s.items.as_slice()).collect();
    sorted.sort();
    sorted.dedup();
    let known: BTreeSet<&[T]> = sorted.iter().copied().collect();

    let mut out = Vec::new();
    let mut group_start = 0;
    while group_start < sorted.len() {
        let prefix = &sorted[group_start][..k - 2];
        let group_end = group_start
            + sorted[group_start..]
                .iter()
                .take_while(|s| &s[..k - 2] == prefix)
                .count();
        for i in group_start..group_end {
            for j in i + 1..group_end {
                let mut cand = sorted[i].to_vec();
                cand.push(sorted[j][k - 2].clone());
                if all_subsets_known(&cand, &known) {
                    out.push(ItemSet {
                        items: cand,
                        support_count: 0,
                    });
                }
            }
        }
        group_start = group_end;
    }
    Ok(out)
}

fn all_subsets_known<T: Ord + Clone>(cand: &[T], known: &BTreeSet<&[T]>) -> bool {
    // the two generating sets (dropping either of the last two items) are known
    let n = cand.len();
    let mut buf = Vec::with_capacity(n - 1);
    (0..n.saturating_sub(2)).all(|skip| {
        buf.clear();
        buf.extend(cand[..skip].iter().cloned());
        buf.extend(cand[skip + 1..].iter().cloned());
        known.contains(buf.as_slice())
    })
}

/// Adds one to every candidate contained in `tx`. `cands[lo..hi]` share
/// their first `depth` items.
fn count_into(
    cands: &[ItemSet<u32>],
    counts: &mut [u64],
    lo: usize,
    hi: usize,
    depth: usize,
    tx: &[u32],
    start: usize,
) {
    let k = cands[lo].items.len();
    if depth == k {
        for c in &mut counts[lo..hi] {
            *c += 1;
        }
        return;
    }
    let needed = k - depth;
    let mut lo = lo;
    for p in start..tx.len() {
        if tx.len() - p < needed || lo >= hi {
            break;
        }
        let item = tx[p];
        let range = &cands[lo..hi];
        let first = lo + range.partition_point(|c| c.items[depth] < item);
        let last = lo + range.partition_point(|c| c.items[depth] <= item);
        if first < last {
            count_into(cands, counts, first, last, depth + 1, tx, p + 1);
        }
        // later transaction items are larger, so smaller candidates are done
        lo = last;
    }
}

/// Interned transactions: each one sorted and duplicate-free.
struct Encoded<T> {
    vocabulary: Vec<T>,
    transactions: Vec<Vec<u32>>,
}

fn encode<T: Ord + Clone, S: AsRef<[T]>>(transactions: &[S]) -> Encoded<T> {
    let vocabulary: Vec<T> = transactions
        .iter()
        .flat_map(|t| t.as_ref().iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let transactions = transactions
        .iter()
        .map(|t| {
            let mut ids: Vec<u32> = t
                .as_ref()
                .iter()
                .map(|i| vocabulary.binary_search(i).expect("interned") as u32)
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    Encoded {
        vocabulary,
        transactions,
    }
}

/// All itemsets with `support_count >= min_support`, ordered by size and
/// then lexicographically. A `min_support` of 0 is treated as 1.
pub fn apriori<T: Ord + Clone, S: AsRef<[T]>>(
    transactions: &[S],
    min_support: u64,
) -> Vec<ItemSet<T>> {
    let min_support = min_support.max(1);
    let enc = encode(transactions);

    let mut singles = vec![0u64; enc.vocabulary.len()];
    for tx in &enc.transactions {
        for &id in tx {
            singles[id as usize] += 1;
        }
    }
    let mut level: Vec<ItemSet<u32>> = singles
        .iter()
        .enumerate()
        .filter(|(_, c)| **c >= min_support)
        .map(|(id, c)| ItemSet {
            items: vec![id as u32],
            support_count: *c,
        })
        .collect();

    let mut all = Vec::new();
    let mut k = 2;
    while !level.is_empty() {
        let mut candidates = apriori_gen(&level, k).expect("levels are uniform and sorted");
        all.append(&mut level);
        if candidates.is_empty() {
            break;
        }
        let mut counts = vec![0u64; candidates.len()];
        for tx in &enc.transactions {
            if tx.len() >= k {
                count_into(&candidates, &mut counts, 0, candidates.len(), 0, tx, 0);
            }
        }
        for (c, n) in candidates.iter_mut().zip(counts) {
            c.support_count = n;
        }
        level = candidates
            .into_iter()
            .filter(|c| c.support_count >= min_support)
            .collect();
        k += 1;
    }

    all.into_iter()
        .map(|s| ItemSet {
            items: s
                .items
                .iter()
                .map(|&id| enc.vocabulary[id as usize].clone())
                .collect(),
            support_count: s.support_count,
        })
        .collect()
}
