//! Loading, validating, filtering, and serializing corpora.
//!
//! The canonical JSON layout is the source-of-truth format:
//!
//! ```json
//! {
//!   "name": "...",
//!   "documents": [
//!     {"id": "...", "topic": "...", "subtopic": "...",
//!      "sentences": [[{"surface": "...", "lemma": "...", "pos": "..."}]]}
//!   ],
//!   "chains": [
//!     {"id": "...", "label": "...",
//!      "mentions": [{"id": "...", "doc": "...", "sentence": 0,
//!                    "start": 0, "end": 2, "head": 1, "kind": "entity"}]}
//!   ]
//! }
//! ```
//!
//! `lemma`, `pos`, and `label` are optional; a missing lemma falls back to
//! the lowercased surface. The CoNLL-style column format lives in
//! [`crate::conll`] and is reachable through the same [`load_corpus`] entry
//! point.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Chain, Corpus, Document, Mention, MentionKind, Span, Token};

/// Violation codes emitted by [`validate`].
pub mod codes {
    pub const DUPLICATE_DOCUMENT_ID: &str = "duplicate_document_id";
    pub const DUPLICATE_CHAIN_ID: &str = "duplicate_chain_id";
    pub const DUPLICATE_MENTION_ID: &str = "duplicate_mention_id";
    /// Identical (document, sentence, span, chain) annotated twice.
    pub const DUPLICATE_MENTION: &str = "duplicate_mention";
    pub const EMPTY_CHAIN: &str = "empty_chain";
    pub const DANGLING_MENTION_REF: &str = "dangling_mention_ref";
    pub const DANGLING_DOCUMENT: &str = "dangling_document";
    pub const CHAIN_MISMATCH: &str = "chain_mismatch";
    /// A mention belongs to zero or to more than one chain.
    pub const PARTITION_VIOLATION: &str = "partition_violation";
    pub const SENTENCE_OUT_OF_RANGE: &str = "sentence_out_of_range";
    pub const INVALID_SPAN: &str = "invalid_span";
    pub const SPAN_OUT_OF_RANGE: &str = "span_out_of_range";
    pub const HEAD_OUTSIDE_SPAN: &str = "head_outside_span";
    pub const EMPTY_SURFACE: &str = "empty_surface";
    pub const EMPTY_LEMMA: &str = "empty_lemma";
    pub const MISSING_TOPIC: &str = "missing_topic";
    pub const MISSING_SUBTOPIC: &str = "missing_subtopic";
    /// Head supplied by the ingest fallback heuristic, not the input.
    pub const FALLBACK_HEAD: &str = "fallback_head";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    /// Identifier of the offending object (mention, chain, or document id).
    pub location: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn error(&mut self, code: &str, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            location: location.into(),
        });
    }

    pub fn warning(&mut self, code: &str, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
            location: location.into(),
        });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            let tag = match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{tag}[{}] {}: {}", v.code, v.location, v.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    CanonicalJson,
    ConllColumns,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: JSON parse error: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Conll {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("corpus failed validation with {} error(s)\n{report}", report.errors().count())]
    Invalid { report: ValidationReport },
}

impl IngestError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusRec {
    name: String,
    documents: Vec<DocumentRec>,
    chains: Vec<ChainRec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRec {
    id: String,
    topic: String,
    subtopic: String,
    sentences: Vec<Vec<TokenRec>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRec {
    surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainRec {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    mentions: Vec<MentionRec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MentionRec {
    id: String,
    doc: String,
    sentence: usize,
    start: usize,
    end: usize,
    /// Omitted heads are filled by the fallback heuristic: last span token
    /// with a noun/verb POS tag, else the last span token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head: Option<usize>,
    kind: MentionKind,
}

fn fallback_head(doc_index: &std::collections::HashMap<&str, &Document>, m: &MentionRec) -> usize {
    let last = m.end.saturating_sub(1).max(m.start);
    let tokens = doc_index
        .get(m.doc.as_str())
        .and_then(|d| d.sentences.get(m.sentence));
    let Some(tokens) = tokens else { return last };
    if m.start >= m.end || m.end > tokens.len() {
        return last;
    }
    tokens[m.start..m.end]
        .iter()
        .rposition(|t| {
            t.pos
                .as_deref()
                .is_some_and(|p| p.starts_with('N') || p.starts_with('V'))
        })
        .map(|offset| m.start + offset)
        .unwrap_or(last)
}

fn corpus_from_rec(rec: CorpusRec, report: &mut ValidationReport) -> Corpus {
    let documents: Vec<Document> = rec
        .documents
        .into_iter()
        .map(|d| Document {
            document_id: d.id,
            topic_id: d.topic,
            subtopic_id: d.subtopic,
            sentences: d
                .sentences
                .into_iter()
                .map(|s| {
                    s.into_iter()
                        .map(|t| {
                            let lemma = match t.lemma {
                                Some(l) => l,
                                None => t.surface.to_lowercase(),
                            };
                            Token {
                                surface: t.surface,
                                lemma,
                                pos: t.pos,
                            }
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    let doc_index: std::collections::HashMap<&str, &Document> = documents
        .iter()
        .map(|d| (d.document_id.as_str(), d))
        .collect();
    let mut chains = Vec::with_capacity(rec.chains.len());
    let mut mentions = Vec::new();
    for c in rec.chains {
        let mut mention_ids = Vec::with_capacity(c.mentions.len());
        for m in c.mentions {
            let head_index = match m.head {
                Some(h) => h,
                None => {
                    let h = fallback_head(&doc_index, &m);
                    report.warning(
                        codes::FALLBACK_HEAD,
                        &m.id,
                        format!("no head given; falling back to token {h}"),
                    );
                    h
                }
            };
            mention_ids.push(m.id.clone());
            mentions.push(Mention {
                mention_id: m.id,
                document_id: m.doc,
                sentence_index: m.sentence,
                span: Span::new(m.start, m.end),
                head_index,
                chain_id: c.id.clone(),
                kind: m.kind,
            });
        }
        chains.push(Chain {
            chain_id: c.id,
            label: c.label,
            mention_ids,
        });
    }
    Corpus::assemble(rec.name, documents, chains, mentions)
}

fn corpus_to_rec(corpus: &Corpus) -> CorpusRec {
    CorpusRec {
        name: corpus.name().to_string(),
        documents: corpus
            .documents()
            .iter()
            .map(|d| DocumentRec {
                id: d.document_id.clone(),
                topic: d.topic_id.clone(),
                subtopic: d.subtopic_id.clone(),
                sentences: d
                    .sentences
                    .iter()
                    .map(|s| {
                        s.iter()
                            .map(|t| TokenRec {
                                surface: t.surface.clone(),
                                lemma: Some(t.lemma.clone()),
                                pos: t.pos.clone(),
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
        chains: corpus
            .chains()
            .iter()
            .map(|c| ChainRec {
                id: c.chain_id.clone(),
                label: c.label.clone(),
                mentions: c
                    .mention_ids
                    .iter()
                    .filter_map(|id| corpus.mention(id))
                    .map(|m| MentionRec {
                        id: m.mention_id.clone(),
                        doc: m.document_id.clone(),
                        sentence: m.sentence_index,
                        start: m.span.start,
                        end: m.span.end,
                        head: Some(m.head_index),
                        kind: m.kind,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parses the canonical JSON format from a string, without validating
/// cross-references. `origin` is only used in error messages. The report
/// carries a warning for every mention whose head came from the fallback
/// heuristic.
pub fn parse_canonical_json(
    text: &str,
    origin: &Path,
) -> Result<(Corpus, ValidationReport), IngestError> {
    let rec: CorpusRec = serde_json::from_str(text).map_err(|e| IngestError::Json {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut report = ValidationReport::new();
    let corpus = corpus_from_rec(rec, &mut report);
    Ok((corpus, report))
}

/// Serializes a validated corpus to the canonical JSON format.
pub fn corpus_to_json_string(corpus: &Corpus) -> String {
    let mut s = serde_json::to_string_pretty(&corpus_to_rec(corpus)).expect("corpus serializes");
    s.push('\n');
    s
}

pub fn save_canonical_json(corpus: &Corpus, path: &Path) -> Result<(), IngestError> {
    fs::write(path, corpus_to_json_string(corpus)).map_err(|e| IngestError::io(path, e))
}

/// Loads and fully validates a corpus; validation warnings are discarded.
/// Use [`load_corpus_with_report`] to inspect them.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, IngestError> {
    load_corpus_with_report(path, format).map(|(corpus, _)| corpus)
}

/// Loads a corpus and returns the warnings collected on the way. A corpus
/// with any error-severity violation is never returned.
pub fn load_corpus_with_report(
    path: &Path,
    format: CorpusFormat,
) -> Result<(Corpus, ValidationReport), IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let (corpus, mut report) = match format {
        CorpusFormat::CanonicalJson => parse_canonical_json(&text, path)?,
        CorpusFormat::ConllColumns => {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "conll".to_string());
            crate::conll::parse_conll_str(&text, &name, path)?
        }
    };
    report.merge(validate(&corpus));
    if report.has_errors() {
        return Err(IngestError::Invalid { report });
    }
    Ok((corpus, report))
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks every structural invariant of the model and reports all findings.
/// Never fails; callers decide what to do with error-severity violations.
pub fn validate(corpus: &Corpus) -> ValidationReport {
    use std::collections::{HashMap, HashSet};

    let mut report = ValidationReport::new();

    let mut doc_ids = HashSet::new();
    for doc in corpus.documents() {
        if !doc_ids.insert(doc.document_id.as_str()) {
            report.error(
                codes::DUPLICATE_DOCUMENT_ID,
                &doc.document_id,
                "document id occurs more than once",
            );
        }
        if doc.topic_id.is_empty() {
            report.warning(
                codes::MISSING_TOPIC,
                &doc.document_id,
                "document has no topic id",
            );
        }
        if doc.subtopic_id.is_empty() {
            report.warning(
                codes::MISSING_SUBTOPIC,
                &doc.document_id,
                "document has no subtopic id",
            );
        }
        for (s_idx, sentence) in doc.sentences.iter().enumerate() {
            for (t_idx, token) in sentence.iter().enumerate() {
                let loc = format!("{}/s{}/t{}", doc.document_id, s_idx, t_idx);
                if token.surface.is_empty() {
                    report.error(codes::EMPTY_SURFACE, &loc, "token has an empty surface");
                }
                if token.lemma.is_empty() {
                    report.error(codes::EMPTY_LEMMA, &loc, "token has an empty lemma");
                }
            }
        }
    }

    let mut mention_ids = HashSet::new();
    for m in corpus.mentions() {
        if !mention_ids.insert(m.mention_id.as_str()) {
            report.error(
                codes::DUPLICATE_MENTION_ID,
                &m.mention_id,
                "mention id occurs more than once",
            );
        }
    }

    let mut chain_ids = HashSet::new();
    // mention id -> number of chains referencing it
    let mut coverage: HashMap<&str, usize> = HashMap::new();
    for chain in corpus.chains() {
        if !chain_ids.insert(chain.chain_id.as_str()) {
            report.error(
                codes::DUPLICATE_CHAIN_ID,
                &chain.chain_id,
                "chain id occurs more than once",
            );
        }
        if chain.is_empty() {
            report.error(codes::EMPTY_CHAIN, &chain.chain_id, "chain has no mentions");
        }
        for id in &chain.mention_ids {
            *coverage.entry(id.as_str()).or_insert(0) += 1;
            match corpus.mention(id) {
                None => report.error(
                    codes::DANGLING_MENTION_REF,
                    &chain.chain_id,
                    format!("chain references unknown mention {id}"),
                ),
                Some(m) => {
                    if m.chain_id != chain.chain_id {
                        report.error(
                            codes::CHAIN_MISMATCH,
                            id,
                            format!(
                                "mention declares chain {} but is listed under chain {}",
                                m.chain_id, chain.chain_id
                            ),
                        );
                    }
                }
            }
        }
    }

    for m in corpus.mentions() {
        match coverage.get(m.mention_id.as_str()).copied().unwrap_or(0) {
            0 => report.error(
                codes::PARTITION_VIOLATION,
                &m.mention_id,
                "mention is not covered by any chain",
            ),
            1 => {}
            n => report.error(
                codes::PARTITION_VIOLATION,
                &m.mention_id,
                format!("mention is covered by {n} chains"),
            ),
        }
    }

    let mut seen_spans = HashSet::new();
    for m in corpus.mentions() {
        let doc = match corpus.document(&m.document_id) {
            Some(d) => d,
            None => {
                report.error(
                    codes::DANGLING_DOCUMENT,
                    &m.mention_id,
                    format!("mention references unknown document {}", m.document_id),
                );
                continue;
            }
        };
        let sentence = match doc.sentences.get(m.sentence_index) {
            Some(s) => s,
            None => {
                report.error(
                    codes::SENTENCE_OUT_OF_RANGE,
                    &m.mention_id,
                    format!(
                        "sentence {} out of range for document {} ({} sentences)",
                        m.sentence_index,
                        m.document_id,
                        doc.sentences.len()
                    ),
                );
                continue;
            }
        };
        if m.span.is_empty() {
            report.error(
                codes::INVALID_SPAN,
                &m.mention_id,
                format!("span {} is empty or reversed", m.span),
            );
            continue;
        }
        if m.span.end > sentence.len() {
            report.error(
                codes::SPAN_OUT_OF_RANGE,
                &m.mention_id,
                format!("span {} exceeds sentence length {}", m.span, sentence.len()),
            );
            continue;
        }
        if !m.span.contains(m.head_index) {
            report.error(
                codes::HEAD_OUTSIDE_SPAN,
                &m.mention_id,
                format!("head index {} outside span {}", m.head_index, m.span),
            );
        }
        if !seen_spans.insert((
            m.document_id.as_str(),
            m.sentence_index,
            m.span,
            m.chain_id.as_str(),
        )) {
            report.error(
                codes::DUPLICATE_MENTION,
                &m.mention_id,
                "identical (document, span, chain) annotated more than once",
            );
        }
    }

    report
}

// ---------------------------------------------------------------------------
// Singleton filtering
// ---------------------------------------------------------------------------

/// Returns a corpus with every size-1 chain removed along with its mention.
/// Documents and all other content are untouched.
pub fn filter_singletons(corpus: &Corpus) -> Corpus {
    use std::collections::HashSet;

    let kept: HashSet<&str> = corpus
        .chains()
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.chain_id.as_str())
        .collect();
    let chains: Vec<Chain> = corpus
        .chains()
        .iter()
        .filter(|c| kept.contains(c.chain_id.as_str()))
        .cloned()
        .collect();
    let mentions: Vec<Mention> = corpus
        .mentions()
        .iter()
        .filter(|m| kept.contains(m.chain_id.as_str()))
        .cloned()
        .collect();
    Corpus::assemble(corpus.name(), corpus.documents().to_vec(), chains, mentions)
}
