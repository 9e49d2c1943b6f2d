//! Coreference evaluation metrics over abstract partitions: MUC, B³,
//! CEAF-e, and their arithmetic mean (the CoNLL F1).
//!
//! Both arguments must partition the same universe of items; singleton
//! handling is decided upstream by the caller. Degenerate denominators
//! follow the reference-scorer convention: a precision or recall whose
//! denominator is zero is 0, except that two empty partitions compare as a
//! perfect match.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::max_total_weight;

/// Precision, recall, and their harmonic mean, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    fn perfect() -> Self {
        Self {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        }
    }
}

/// All three metrics plus their average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub muc: Prf,
    pub b_cubed: Prf,
    pub ceaf_e: Prf,
    pub conll_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("gold and predicted partitions cover different item sets: {details}")]
    UniverseMismatch { details: String },
    #[error("an item appears in more than one {side} cluster")]
    DuplicateItem { side: &'static str },
    #[error("empty cluster in the {side} partition")]
    EmptyCluster { side: &'static str },
}

struct Instance {
    /// item -> (gold cluster, predicted cluster), dense ids
    assignments: Vec<(usize, usize)>,
    gold_sizes: Vec<usize>,
    pred_sizes: Vec<usize>,
}

fn build_instance<T: Eq + Hash>(
    gold: &[Vec<T>],
    predicted: &[Vec<T>],
) -> Result<Instance, ScoreError> {
    let mut gold_of: HashMap<&T, usize> = HashMap::new();
    for (idx, cluster) in gold.iter().enumerate() {
        if cluster.is_empty() {
            return Err(ScoreError::EmptyCluster { side: "gold" });
        }
        for item in cluster {
            if gold_of.insert(item, idx).is_some() {
                return Err(ScoreError::DuplicateItem { side: "gold" });
            }
        }
    }
    let mut pred_of: HashMap<&T, usize> = HashMap::new();
    for (idx, cluster) in predicted.iter().enumerate() {
        if cluster.is_empty() {
            return Err(ScoreError::EmptyCluster { side: "predicted" });
        }
        for item in cluster {
            if pred_of.insert(item, idx).is_some() {
                return Err(ScoreError::DuplicateItem { side: "predicted" });
            }
        }
    }
    if gold_of.len() != pred_of.len() {
        return Err(ScoreError::UniverseMismatch {
            details: format!(
                "{} gold items vs {} predicted items",
                gold_of.len(),
                pred_of.len()
            ),
        });
    }
    let mut assignments = Vec::with_capacity(gold_of.len());
    for (item, &g) in &gold_of {
        match pred_of.get(item) {
            Some(&p) => assignments.push((g, p)),
            None => {
                return Err(ScoreError::UniverseMismatch {
                    details: "an item occurs only on the gold side".to_string(),
                })
            }
        }
    }
    Ok(Instance {
        assignments,
        gold_sizes: gold.iter().map(Vec::len).collect(),
        pred_sizes: predicted.iter().map(Vec::len).collect(),
    })
}

fn muc_inner(inst: &Instance) -> Prf {
    if inst.gold_sizes.is_empty() && inst.pred_sizes.is_empty() {
        return Prf::perfect();
    }
    // distinct counterpart clusters per cluster
    let mut gold_partitions: Vec<std::collections::HashSet<usize>> =
        vec![std::collections::HashSet::new(); inst.gold_sizes.len()];
    let mut pred_partitions: Vec<std::collections::HashSet<usize>> =
        vec![std::collections::HashSet::new(); inst.pred_sizes.len()];
    for &(g, p) in &inst.assignments {
        gold_partitions[g].insert(p);
        pred_partitions[p].insert(g);
    }
    let mut recall_num = 0.0;
    let mut recall_den = 0.0;
    for (size, parts) in inst.gold_sizes.iter().zip(&gold_partitions) {
        if *size > 1 {
            recall_num += (*size - parts.len()) as f64;
            recall_den += (*size - 1) as f64;
        }
    }
    let mut prec_num = 0.0;
    let mut prec_den = 0.0;
    for (size, parts) in inst.pred_sizes.iter().zip(&pred_partitions) {
        if *size > 1 {
            prec_num += (*size - parts.len()) as f64;
            prec_den += (*size - 1) as f64;
        }
    }
    let recall = if recall_den > 0.0 {
        recall_num / recall_den
    } else {
        0.0
    };
    let precision = if prec_den > 0.0 {
        prec_num / prec_den
    } else {
        0.0
    };
    Prf::new(precision, recall)
}

// BTreeMap keeps the floating-point accumulation order fixed, so repeated
// runs produce bit-identical scores
fn overlap_counts(inst: &Instance) -> BTreeMap<(usize, usize), usize> {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(g, p) in &inst.assignments {
        *counts.entry((g, p)).or_insert(0) += 1;
    }
    counts
}

fn b_cubed_inner(inst: &Instance) -> Prf {
    let n = inst.assignments.len();
    if n == 0 {
        return Prf::perfect();
    }
    let mut recall_sum = 0.0;
    let mut precision_sum = 0.0;
    for ((g, p), count) in overlap_counts(inst) {
        let sq = (count * count) as f64;
        recall_sum += sq / inst.gold_sizes[g] as f64;
        precision_sum += sq / inst.pred_sizes[p] as f64;
    }
    Prf::new(precision_sum / n as f64, recall_sum / n as f64)
}

fn ceaf_e_inner(inst: &Instance) -> Prf {
    let g_count = inst.gold_sizes.len();
    let p_count = inst.pred_sizes.len();
    if g_count == 0 && p_count == 0 {
        return Prf::perfect();
    }
    if g_count == 0 || p_count == 0 {
        return Prf::new(0.0, 0.0);
    }

    // phi4 similarity on every overlapping pair
    let counts = overlap_counts(inst);
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((g, p), count) in counts {
        let phi = 2.0 * count as f64 / (inst.gold_sizes[g] + inst.pred_sizes[p]) as f64;
        edges.insert((g, p), phi);
    }

    // The bipartite overlap graph decomposes the assignment problem:
    // non-overlapping pairs have similarity 0, so the optimum is the sum of
    // per-component optima. Components stay small in practice, keeping the
    // exact Hungarian solve cheap on corpus-sized inputs.
    let mut parent: Vec<usize> = (0..g_count + p_count).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for &(g, p) in edges.keys() {
        let a = find(&mut parent, g);
        let b = find(&mut parent, g_count + p);
        if a != b {
            parent[a] = b;
        }
    }
    let mut components: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for g in 0..g_count {
        let root = find(&mut parent, g);
        components.entry(root).or_default().0.push(g);
    }
    for p in 0..p_count {
        let root = find(&mut parent, g_count + p);
        components.entry(root).or_default().1.push(p);
    }

    let mut total = 0.0;
    for (golds, preds) in components.values() {
        if golds.is_empty() || preds.is_empty() {
            continue;
        }
        if golds.len() == 1 && preds.len() == 1 {
            total += edges.get(&(golds[0], preds[0])).copied().unwrap_or(0.0);
            continue;
        }
        let weights: Vec<Vec<f64>> = golds
            .iter()
            .map(|&g| {
                preds
                    .iter()
                    .map(|&p| edges.get(&(g, p)).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        total += max_total_weight(&weights);
    }

    Prf::new(total / p_count as f64, total / g_count as f64)
}

/// Link-based metric: recall counts, per gold chain, how many of its
/// mentions stay together under the predicted partition; precision swaps
/// the roles. Size-1 chains contribute nothing.
pub fn muc<T: Eq + Hash>(gold: &[Vec<T>], predicted: &[Vec<T>]) -> Result<Prf, ScoreError> {
    Ok(muc_inner(&build_instance(gold, predicted)?))
}

/// Mention-based metric: per-mention overlap ratios averaged over the
/// universe.
pub fn b_cubed<T: Eq + Hash>(gold: &[Vec<T>], predicted: &[Vec<T>]) -> Result<Prf, ScoreError> {
    Ok(b_cubed_inner(&build_instance(gold, predicted)?))
}

/// Entity-based metric: total phi4 similarity under the optimal one-to-one
/// chain alignment, solved exactly.
pub fn ceaf_e<T: Eq + Hash>(gold: &[Vec<T>], predicted: &[Vec<T>]) -> Result<Prf, ScoreError> {
    Ok(ceaf_e_inner(&build_instance(gold, predicted)?))
}

/// Arithmetic mean of the MUC, B³, and CEAF-e F1 values.
pub fn conll_f1<T: Eq + Hash>(gold: &[Vec<T>], predicted: &[Vec<T>]) -> Result<f64, ScoreError> {
    Ok(score_report(gold, predicted)?.conll_f1)
}

/// Computes all three metrics (validating the universe once) and their mean.
pub fn score_report<T: Eq + Hash>(
    gold: &[Vec<T>],
    predicted: &[Vec<T>],
) -> Result<ScoreReport, ScoreError> {
    let inst = build_instance(gold, predicted)?;
    let muc = muc_inner(&inst);
    let b_cubed = b_cubed_inner(&inst);
    let ceaf_e = ceaf_e_inner(&inst);
    let conll_f1 = (muc.f1 + b_cubed.f1 + ceaf_e.f1) / 3.0;
    Ok(ScoreReport {
        muc,
        b_cubed,
        ceaf_e,
        conll_f1,
    })
}
