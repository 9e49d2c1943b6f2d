//! Immutable in-memory corpus model shared by every other module.
//!
//! A [`Corpus`] bundles the document/sentence/token hierarchy with the
//! annotated coreference chains and their mentions. It is assembled once
//! (usually via [`crate::ingest`]) and never mutated afterwards, so all
//! reads are safe to share across threads.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open token interval `[start, end)` within a single sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    /// Number of tokens covered; `end - start` for well-formed spans.
    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A single token of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Normal form of the token; ingest falls back to the lowercased surface
    /// when the input carries no lemma.
    pub lemma: String,
    pub pos: Option<String>,
}

impl Token {
    pub fn new(surface: impl Into<String>, lemma: impl Into<String>, pos: Option<&str>) -> Self {
        Self {
            surface: surface.into(),
            lemma: lemma.into(),
            pos: pos.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Entity,
    Event,
    Other,
}

impl fmt::Display for MentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MentionKind::Entity => "entity",
            MentionKind::Event => "event",
            MentionKind::Other => "other",
        };
        f.write_str(s)
    }
}

/// A token span with a designated head token, owned by exactly one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub mention_id: String,
    pub document_id: String,
    pub sentence_index: usize,
    pub span: Span,
    /// Token index of the syntactic head, relative to the sentence (not the
    /// span). Must lie inside `span`.
    pub head_index: usize,
    pub chain_id: String,
    pub kind: MentionKind,
}

/// The set of all mentions referring to one entity or event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub chain_id: String,
    pub label: Option<String>,
    pub mention_ids: Vec<String>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.mention_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mention_ids.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.mention_ids.len() == 1
    }
}

/// One article: tokenized sentences plus its place in the topic hierarchy.
///
/// Corpora without a subtopic level map `subtopic_id = topic_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub document_id: String,
    pub topic_id: String,
    pub subtopic_id: String,
    pub sentences: Vec<Vec<Token>>,
}

/// Key used to group a chain's mentions into head groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadGrouping {
    /// Group by the normalized lemma of the head token (default).
    #[default]
    Lemma,
    /// Group by the normalized surface form of the head token.
    Surface,
}

/// How surfaces and head lemmas are normalized before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationPolicy {
    pub case_insensitive: bool,
    pub whitespace_collapse: bool,
    pub head_grouping: HeadGrouping,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        Self {
            case_insensitive: true,
            whitespace_collapse: true,
            head_grouping: HeadGrouping::Lemma,
        }
    }
}

impl NormalizationPolicy {
    /// Comparison key for a full mention surface.
    pub fn surface_key(&self, surface: &str) -> String {
        let folded = if self.case_insensitive {
            surface.to_lowercase()
        } else {
            surface.to_string()
        };
        if self.whitespace_collapse {
            folded.split_whitespace().collect::<Vec<_>>().join(" ")
        } else {
            folded
        }
    }

    /// Comparison key for a head lemma or head surface (single token).
    pub fn head_key(&self, text: &str) -> String {
        if self.case_insensitive {
            text.to_lowercase()
        } else {
            text.to_string()
        }
    }
}

/// Structural errors raised when a mention does not resolve against its
/// corpus. A corpus that passed validation never produces these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("mention {mention_id}: unknown document {document_id}")]
    DanglingDocument {
        mention_id: String,
        document_id: String,
    },
    #[error(
        "mention {mention_id}: sentence {sentence_index} out of range for document {document_id}"
    )]
    SentenceOutOfRange {
        mention_id: String,
        document_id: String,
        sentence_index: usize,
    },
    #[error(
        "mention {mention_id}: span [{start}, {end}) out of range for a sentence of {len} tokens"
    )]
    SpanOutOfRange {
        mention_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("mention {mention_id}: head index {head_index} outside span [{start}, {end})")]
    HeadOutsideSpan {
        mention_id: String,
        head_index: usize,
        start: usize,
        end: usize,
    },
    #[error("unknown mention id {0}")]
    UnknownMention(String),
}

/// The universe every metric runs over: documents, chains, and mentions,
/// indexed by id. Chains are expected to partition the mention set; use
/// [`crate::ingest::validate`] to check.
#[derive(Clone)]
pub struct Corpus {
    name: String,
    documents: Vec<Document>,
    chains: Vec<Chain>,
    mentions: Vec<Mention>,
    doc_index: HashMap<String, usize>,
    chain_index: HashMap<String, usize>,
    mention_index: HashMap<String, usize>,
}

impl fmt::Debug for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Corpus")
            .field("name", &self.name)
            .field("documents", &self.documents.len())
            .field("chains", &self.chains.len())
            .field("mentions", &self.mentions.len())
            .finish()
    }
}

fn sorted_by_key<T, K: Ord + ?Sized>(items: &[T], key: impl Fn(&T) -> &K) -> Vec<&T> {
    let mut refs: Vec<&T> = items.iter().collect();
    refs.sort_by(|a, b| key(a).cmp(key(b)));
    refs
}

/// Equality is id-keyed: the member collections compare as sets keyed by
/// their ids, so storage order is an implementation detail. Sentences and
/// tokens stay ordered.
impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name
            || self.documents.len() != other.documents.len()
            || self.chains.len() != other.chains.len()
            || self.mentions.len() != other.mentions.len()
        {
            return false;
        }
        let docs = |c: &'_ Corpus| {
            sorted_by_key(&c.documents, |d: &Document| d.document_id.as_str())
                .into_iter()
                .cloned()
                .collect::<Vec<_>>()
        };
        if docs(self) != docs(other) {
            return false;
        }
        let chains = |c: &'_ Corpus| {
            let mut out: Vec<(String, Option<String>, std::collections::BTreeSet<String>)> = c
                .chains
                .iter()
                .map(|ch| {
                    (
                        ch.chain_id.clone(),
                        ch.label.clone(),
                        ch.mention_ids.iter().cloned().collect(),
                    )
                })
                .collect();
            out.sort();
            out
        };
        if chains(self) != chains(other) {
            return false;
        }
        let mentions = |c: &'_ Corpus| {
            sorted_by_key(&c.mentions, |m: &Mention| m.mention_id.as_str())
                .into_iter()
                .cloned()
                .collect::<Vec<_>>()
        };
        mentions(self) == mentions(other)
    }
}

impl Eq for Corpus {}

impl Corpus {
    /// Builds a corpus from its parts without validating cross-references.
    /// On duplicate ids the first occurrence wins in the lookup indexes;
    /// validation reports the duplicates.
    pub fn assemble(
        name: impl Into<String>,
        documents: Vec<Document>,
        chains: Vec<Chain>,
        mentions: Vec<Mention>,
    ) -> Self {
        let mut doc_index = HashMap::with_capacity(documents.len());
        for (i, d) in documents.iter().enumerate() {
            doc_index.entry(d.document_id.clone()).or_insert(i);
        }
        let mut chain_index = HashMap::with_capacity(chains.len());
        for (i, c) in chains.iter().enumerate() {
            chain_index.entry(c.chain_id.clone()).or_insert(i);
        }
        let mut mention_index = HashMap::with_capacity(mentions.len());
        for (i, m) in mentions.iter().enumerate() {
            mention_index.entry(m.mention_id.clone()).or_insert(i);
        }
        Self {
            name: name.into(),
            documents,
            chains,
            mentions,
            doc_index,
            chain_index,
            mention_index,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.doc_index.get(id).map(|&i| &self.documents[i])
    }

    pub fn chain(&self, id: &str) -> Option<&Chain> {
        self.chain_index.get(id).map(|&i| &self.chains[i])
    }

    pub fn mention(&self, id: &str) -> Option<&Mention> {
        self.mention_index.get(id).map(|&i| &self.mentions[i])
    }

    pub fn require_mention(&self, id: &str) -> Result<&Mention, ModelError> {
        self.mention(id)
            .ok_or_else(|| ModelError::UnknownMention(id.to_string()))
    }

    /// Resolves all mentions of a chain, in the chain's own order.
    pub fn chain_mentions(&self, chain: &Chain) -> Result<Vec<&Mention>, ModelError> {
        chain
            .mention_ids
            .iter()
            .map(|id| self.require_mention(id))
            .collect()
    }

    /// The sentence a mention lives in.
    pub fn mention_sentence(&self, mention: &Mention) -> Result<&[Token], ModelError> {
        let doc =
            self.document(&mention.document_id)
                .ok_or_else(|| ModelError::DanglingDocument {
                    mention_id: mention.mention_id.clone(),
                    document_id: mention.document_id.clone(),
                })?;
        doc.sentences
            .get(mention.sentence_index)
            .map(|s| s.as_slice())
            .ok_or_else(|| ModelError::SentenceOutOfRange {
                mention_id: mention.mention_id.clone(),
                document_id: mention.document_id.clone(),
                sentence_index: mention.sentence_index,
            })
    }

    /// The tokens covered by a mention's span.
    pub fn mention_tokens(&self, mention: &Mention) -> Result<&[Token], ModelError> {
        let sentence = self.mention_sentence(mention)?;
        let span = mention.span;
        if span.is_empty() || span.end > sentence.len() {
            return Err(ModelError::SpanOutOfRange {
                mention_id: mention.mention_id.clone(),
                start: span.start,
                end: span.end,
                len: sentence.len(),
            });
        }
        Ok(&sentence[span.start..span.end])
    }

    pub fn head_token(&self, mention: &Mention) -> Result<&Token, ModelError> {
        let tokens = self.mention_tokens(mention)?;
        if !mention.span.contains(mention.head_index) {
            return Err(ModelError::HeadOutsideSpan {
                mention_id: mention.mention_id.clone(),
                head_index: mention.head_index,
                start: mention.span.start,
                end: mention.span.end,
            });
        }
        Ok(&tokens[mention.head_index - mention.span.start])
    }

    /// Span tokens joined by single spaces, original casing preserved.
    pub fn mention_surface(&self, mention: &Mention) -> Result<String, ModelError> {
        let tokens = self.mention_tokens(mention)?;
        Ok(tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" "))
    }

    /// The lemma of the head token under the given normalization policy.
    pub fn head_lemma(
        &self,
        mention: &Mention,
        policy: &NormalizationPolicy,
    ) -> Result<String, ModelError> {
        Ok(policy.head_key(&self.head_token(mention)?.lemma))
    }

    /// The key used to group a chain's mentions into head groups; either the
    /// head lemma or the head surface, depending on the policy.
    pub fn head_group_key(
        &self,
        mention: &Mention,
        policy: &NormalizationPolicy,
    ) -> Result<String, ModelError> {
        match policy.head_grouping {
            HeadGrouping::Lemma => self.head_lemma(mention, policy),
            HeadGrouping::Surface => Ok(policy.head_key(&self.head_token(mention)?.surface)),
        }
    }
}
