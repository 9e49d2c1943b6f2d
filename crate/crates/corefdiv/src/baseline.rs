//! Same-head-lemma clustering baseline over gold mentions.
//!
//! Within each unit at the chosen level (document, subtopic, topic, or the
//! whole corpus), all mentions sharing a normalized head lemma form one
//! predicted cluster. Mention detection is not performed: the gold mentions
//! are the clustering universe, so predictions can be scored against the
//! gold chains with exact span matching.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Document, Mention, ModelError, NormalizationPolicy};
use crate::ingest::filter_singletons;
use crate::scoring::{score_report, Prf, ScoreError, ScoreReport};

/// Granularity at which mentions may be clustered together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Document,
    Subtopic,
    Topic,
    Corpus,
}

impl Level {
    fn unit_of(&self, doc: &Document) -> String {
        match self {
            Level::Document => doc.document_id.clone(),
            Level::Subtopic => format!("{}/{}", doc.topic_id, doc.subtopic_id),
            Level::Topic => doc.topic_id.clone(),
            Level::Corpus => String::new(),
        }
    }
}

/// How per-unit scores are pooled into one report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Pool every unit's chains into one scoring instance (default).
    #[default]
    Micro,
    /// Score each unit separately and average precision/recall over units.
    Macro,
}

/// A predicted partition of the corpus's mention ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringResult {
    /// Disjoint, non-empty clusters covering every mention, deterministically
    /// ordered by (unit, kind, head lemma).
    pub clusters: Vec<Vec<String>>,
    pub level: Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineOptions {
    pub level: Level,
    pub split_by_kind: bool,
    pub exclude_singletons: bool,
    pub aggregation: Aggregation,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            level: Level::Subtopic,
            split_by_kind: false,
            exclude_singletons: true,
            aggregation: Aggregation::Micro,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("cannot score an empty corpus unit-by-unit")]
    NoUnits,
}

fn mention_unit(corpus: &Corpus, mention: &Mention, level: Level) -> Result<String, ModelError> {
    let doc =
        corpus
            .document(&mention.document_id)
            .ok_or_else(|| ModelError::DanglingDocument {
                mention_id: mention.mention_id.clone(),
                document_id: mention.document_id.clone(),
            })?;
    Ok(level.unit_of(doc))
}

/// Clusters gold mentions by normalized head lemma within each unit.
pub fn lemma_baseline(
    corpus: &Corpus,
    level: Level,
    policy: &NormalizationPolicy,
) -> Result<ClusteringResult, ModelError> {
    lemma_baseline_with(corpus, level, policy, false)
}

/// Like [`lemma_baseline`], optionally keeping entity and event mentions in
/// separate clusters even when they share a head lemma.
pub fn lemma_baseline_with(
    corpus: &Corpus,
    level: Level,
    policy: &NormalizationPolicy,
    split_by_kind: bool,
) -> Result<ClusteringResult, ModelError> {
    let mut clusters: BTreeMap<(String, String, String), Vec<String>> = BTreeMap::new();
    for mention in corpus.mentions() {
        let unit = mention_unit(corpus, mention, level)?;
        let lemma = corpus.head_lemma(mention, policy)?;
        let kind = if split_by_kind {
            mention.kind.to_string()
        } else {
            String::new()
        };
        clusters
            .entry((unit, kind, lemma))
            .or_default()
            .push(mention.mention_id.clone());
    }
    Ok(ClusteringResult {
        clusters: clusters.into_values().collect(),
        level,
    })
}

fn gold_partition(corpus: &Corpus) -> Vec<Vec<String>> {
    corpus
        .chains()
        .iter()
        .map(|c| c.mention_ids.clone())
        .collect()
}

/// Runs the baseline and scores it against the gold chains. With
/// `exclude_singletons`, gold singleton chains (and their mentions) are
/// dropped before clustering, matching the starred figures convention.
pub fn score_baseline(
    corpus: &Corpus,
    options: BaselineOptions,
    policy: &NormalizationPolicy,
) -> Result<ScoreReport, BaselineError> {
    Ok(run_baseline(corpus, options, policy)?.1)
}

/// [`score_baseline`] that also hands back the scored clustering, so callers
/// can serialize exactly what was evaluated.
pub fn run_baseline(
    corpus: &Corpus,
    options: BaselineOptions,
    policy: &NormalizationPolicy,
) -> Result<(ClusteringResult, ScoreReport), BaselineError> {
    let filtered;
    let working = if options.exclude_singletons {
        filtered = filter_singletons(corpus);
        &filtered
    } else {
        corpus
    };
    let clustering = lemma_baseline_with(working, options.level, policy, options.split_by_kind)?;
    let report = match options.aggregation {
        Aggregation::Micro => score_report(&gold_partition(working), &clustering.clusters)?,
        Aggregation::Macro => macro_score(working, &clustering, options.level)?,
    };
    Ok((clustering, report))
}

fn macro_score(
    corpus: &Corpus,
    clustering: &ClusteringResult,
    level: Level,
) -> Result<ScoreReport, BaselineError> {
    // restrict both partitions to each unit's mention set
    let mut gold_by_unit: BTreeMap<String, BTreeMap<&str, Vec<String>>> = BTreeMap::new();
    for chain in corpus.chains() {
        for id in &chain.mention_ids {
            let mention = corpus.require_mention(id)?;
            let unit = mention_unit(corpus, mention, level)?;
            gold_by_unit
                .entry(unit)
                .or_default()
                .entry(chain.chain_id.as_str())
                .or_default()
                .push(id.clone());
        }
    }
    let mut pred_by_unit: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for cluster in &clustering.clusters {
        let first = corpus.require_mention(&cluster[0])?;
        let unit = mention_unit(corpus, first, level)?;
        pred_by_unit.entry(unit).or_default().push(cluster.clone());
    }

    let mut sums = [[0.0_f64; 2]; 3]; // [metric][precision, recall]
    let mut units = 0usize;
    for (unit, gold_clusters) in &gold_by_unit {
        let gold: Vec<Vec<String>> = gold_clusters.values().cloned().collect();
        let pred = pred_by_unit.get(unit).cloned().unwrap_or_default();
        let report = score_report(&gold, &pred)?;
        for (slot, prf) in [report.muc, report.b_cubed, report.ceaf_e]
            .iter()
            .enumerate()
        {
            sums[slot][0] += prf.precision;
            sums[slot][1] += prf.recall;
        }
        units += 1;
    }
    if units == 0 {
        return Err(BaselineError::NoUnits);
    }
    let n = units as f64;
    let muc = Prf::new(sums[0][0] / n, sums[0][1] / n);
    let b_cubed = Prf::new(sums[1][0] / n, sums[1][1] / n);
    let ceaf_e = Prf::new(sums[2][0] / n, sums[2][1] / n);
    Ok(ScoreReport {
        muc,
        b_cubed,
        ceaf_e,
        conll_f1: (muc.f1 + b_cubed.f1 + ceaf_e.f1) / 3.0,
    })
}
