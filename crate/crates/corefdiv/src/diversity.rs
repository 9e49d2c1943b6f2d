//! Phrasing diversity (PD), unique head lemmas, and dataset summaries.
//!
//! For a chain c, mentions are grouped by normalized head key into head
//! groups. With U_h the set of distinct normalized surfaces under head h,
//! A_h the number of mentions under h, and M_c the chain size:
//!
//! ```text
//! PD_c = (sum_h |U_h| / |A_h|) * (sum_h |U_h|) / |M_c|
//! ```
//!
//! The dataset-level PD is the chain-size-weighted average of PD_c. A chain
//! whose surfaces are pairwise distinct reaches PD_c = |H_c| exactly;
//! repeating an existing phrase strictly lowers PD_c.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Chain, Corpus, ModelError, NormalizationPolicy};

/// All mentions of one chain that share a normalized head key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadGroup {
    /// Normalized head lemma (or surface, under a surface-grouping policy).
    pub head: String,
    /// Distinct normalized surfaces of the group (U_h).
    pub unique_phrases: BTreeSet<String>,
    /// Number of mentions in the group (A_h).
    pub total_count: usize,
}

/// Per-chain diversity figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiversity {
    pub chain_id: String,
    pub size: usize,
    pub unique_head_lemmas: usize,
    pub pd: f64,
}

/// Dataset-level counts and (optionally singleton-filtered) averages.
/// Absent averages mean the relevant chain set was empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub topics: usize,
    pub subtopics: usize,
    pub articles: usize,
    pub mentions: usize,
    pub chains: usize,
    pub singletons: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_chain_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_unique_lemmas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd_weighted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_baseline_conll_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiversityError {
    #[error("cannot aggregate over an empty chain collection")]
    EmptyChainSet,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Partitions a chain's mentions by normalized head key, sorted by head.
pub fn head_groups(
    chain: &Chain,
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<Vec<HeadGroup>, ModelError> {
    let mut groups: BTreeMap<String, (BTreeSet<String>, usize)> = BTreeMap::new();
    for id in &chain.mention_ids {
        let mention = corpus.require_mention(id)?;
        let head = corpus.head_group_key(mention, policy)?;
        let phrase = policy.surface_key(&corpus.mention_surface(mention)?);
        let entry = groups.entry(head).or_default();
        entry.0.insert(phrase);
        entry.1 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(head, (unique_phrases, total_count))| HeadGroup {
            head,
            unique_phrases,
            total_count,
        })
        .collect())
}

fn pd_of_groups(groups: &[HeadGroup], chain_size: usize) -> f64 {
    let ratio_sum: f64 = groups
        .iter()
        .map(|g| g.unique_phrases.len() as f64 / g.total_count as f64)
        .sum();
    let unique_sum: usize = groups.iter().map(|g| g.unique_phrases.len()).sum();
    ratio_sum * unique_sum as f64 / chain_size as f64
}

/// Phrasing diversity of a single non-empty chain.
pub fn pd_chain(
    chain: &Chain,
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<f64, ModelError> {
    let groups = head_groups(chain, corpus, policy)?;
    Ok(pd_of_groups(&groups, chain.len()))
}

/// Number of distinct normalized head keys in a chain (|H_c|).
pub fn unique_head_lemmas(
    chain: &Chain,
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<usize, ModelError> {
    Ok(head_groups(chain, corpus, policy)?.len())
}

pub fn chain_diversity(
    chain: &Chain,
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<ChainDiversity, ModelError> {
    let groups = head_groups(chain, corpus, policy)?;
    Ok(ChainDiversity {
        chain_id: chain.chain_id.clone(),
        size: chain.len(),
        unique_head_lemmas: groups.len(),
        pd: pd_of_groups(&groups, chain.len()),
    })
}

/// Per-chain diversity for every chain of the corpus, in corpus order.
/// Chains are independent, so the work fans out across the thread pool.
pub fn chain_diversities(
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<Vec<ChainDiversity>, ModelError> {
    corpus
        .chains()
        .par_iter()
        .map(|c| chain_diversity(c, corpus, policy))
        .collect()
}

/// Chain-size-weighted average of PD_c over the given chains.
pub fn pd_dataset<'a>(
    chains: impl IntoIterator<Item = &'a Chain>,
    corpus: &Corpus,
    policy: &NormalizationPolicy,
) -> Result<f64, DiversityError> {
    let mut weighted = 0.0;
    let mut total = 0usize;
    for chain in chains {
        weighted += chain.len() as f64 * pd_chain(chain, corpus, policy)?;
        total += chain.len();
    }
    if total == 0 {
        return Err(DiversityError::EmptyChainSet);
    }
    Ok(weighted / total as f64)
}

/// Counts over the full corpus plus averages over the (optionally
/// singleton-filtered) chain set. `avg_*` are unweighted over chains;
/// `pd_weighted` is mention-weighted.
pub fn summarize(
    corpus: &Corpus,
    exclude_singletons: bool,
    policy: &NormalizationPolicy,
) -> Result<DatasetSummary, ModelError> {
    let topics: BTreeSet<&str> = corpus
        .documents()
        .iter()
        .map(|d| d.topic_id.as_str())
        .collect();
    let subtopics: BTreeSet<(&str, &str)> = corpus
        .documents()
        .iter()
        .map(|d| (d.topic_id.as_str(), d.subtopic_id.as_str()))
        .collect();
    let singletons = corpus.chains().iter().filter(|c| c.is_singleton()).count();

    let metric_chains: Vec<&Chain> = corpus
        .chains()
        .iter()
        .filter(|c| !exclude_singletons || c.len() > 1)
        .collect();

    let diversities: Vec<ChainDiversity> = metric_chains
        .par_iter()
        .map(|c| chain_diversity(c, corpus, policy))
        .collect::<Result<_, _>>()?;

    let (avg_chain_size, avg_unique_lemmas, pd_weighted) = if diversities.is_empty() {
        (None, None, None)
    } else {
        let n = diversities.len() as f64;
        let sizes: usize = diversities.iter().map(|d| d.size).sum();
        let uniques: usize = diversities.iter().map(|d| d.unique_head_lemmas).sum();
        let weighted: f64 = diversities.iter().map(|d| d.size as f64 * d.pd).sum();
        (
            Some(sizes as f64 / n),
            Some(uniques as f64 / n),
            Some(weighted / sizes as f64),
        )
    };

    Ok(DatasetSummary {
        topics: topics.len(),
        subtopics: subtopics.len(),
        articles: corpus.documents().len(),
        mentions: corpus.mentions().len(),
        chains: corpus.chains().len(),
        singletons,
        avg_chain_size,
        avg_unique_lemmas,
        pd_weighted,
        lemma_baseline_conll_f1: None,
    })
}
