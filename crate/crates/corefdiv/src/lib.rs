//! Lexical-diversity analytics and evaluation for cross-document
//! coreference (CDCR) corpora.
//!
//! The toolkit quantifies how much the wording varies inside annotated
//! coreference chains and how hard a corpus is for a trivial resolver:
//!
//! - [`diversity`] — the phrasing diversity metric (PD), unique head lemma
//!   counts, chain sizes, and dataset summaries;
//! - [`baseline`] — the same-head-lemma clustering baseline at document,
//!   subtopic, topic, or corpus granularity;
//! - [`scoring`] — MUC, B³, and CEAF-e with the CoNLL F1 average;
//! - [`span_expand`] — normalization of minimum-span mentions to maximal
//!   NP/VP constituents from bracketed parses;
//! - [`ingest`] / [`conll`] — canonical JSON and CoNLL-style column I/O,
//!   validation, and singleton filtering;
//! - [`corpus`] — the immutable data model underneath all of the above.

pub mod baseline;
pub mod conll;
pub mod corpus;
pub mod diversity;
pub mod ingest;
pub mod scoring;
pub mod span_expand;

mod assignment;

#[cfg(test)]
pub(crate) mod test_support;

pub use corpus::{
    Chain, Corpus, Document, HeadGrouping, Mention, MentionKind, ModelError, NormalizationPolicy,
    Span, Token,
};
pub use ingest::{
    filter_singletons, load_corpus, load_corpus_with_report, validate, CorpusFormat, IngestError,
    Severity, ValidationReport, Violation,
};
