//! Normalizes minimum-span mentions to maximum-span phrases by widening each
//! mention to the outermost NP-like or VP-like constituent containing its
//! head token.
//!
//! Parses arrive as bracketed trees, one per line, in sidecar files named
//! `<document-id>.trees` (line i belongs to sentence i; blank lines mean "no
//! parse"). Functional tags and indices on constituent labels (`NP-SBJ=2`)
//! are ignored when matching targets.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, Mention, ModelError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Internal {
        label: String,
        children: Vec<Node>,
        span: Span,
    },
    Leaf {
        word: String,
        index: usize,
    },
}

impl Node {
    fn span(&self) -> Span {
        match self {
            Node::Internal { span, .. } => *span,
            Node::Leaf { index, .. } => Span::new(*index, *index + 1),
        }
    }
}

/// A constituency tree whose leaves align one-to-one with sentence tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    root: Node,
    leaf_count: usize,
}

impl ParseTree {
    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// All internal constituents as (label, span), preorder.
    pub fn constituents(&self) -> Vec<(&str, Span)> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a Node, out: &mut Vec<(&'a str, Span)>) {
            if let Node::Internal {
                label,
                children,
                span,
            } = node
            {
                out.push((label.as_str(), *span));
                for child in children {
                    walk(child, out);
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    /// Checks that the leaves cover exactly `tokens` sentence tokens.
    pub fn align(&self, tokens: usize) -> Result<(), ExpandError> {
        if self.leaf_count == tokens {
            Ok(())
        } else {
            Err(ExpandError::LeafCountMismatch {
                leaves: self.leaf_count,
                tokens,
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("tree has {leaves} leaves but the sentence has {tokens} tokens")]
    LeafCountMismatch { leaves: usize, tokens: usize },
    #[error("document {document_id}, sentence {sentence_index}: tree has {leaves} leaves but the sentence has {tokens} tokens")]
    SentenceMisaligned {
        document_id: String,
        sentence_index: usize,
        leaves: usize,
        tokens: usize,
    },
    #[error("head index {head_index} outside the tree's {leaves} leaves")]
    HeadOutsideTree { head_index: usize, leaves: usize },
    #[error("missing parses for documents with mentions: {}", document_ids.join(", "))]
    MissingParses { document_ids: Vec<String> },
    #[error("document {document_id}: no parse for sentence {sentence_index}")]
    MissingSentenceParse {
        document_id: String,
        sentence_index: usize,
    },
    #[error("document {document_id}: parse file has {trees} trees but the document has {sentences} sentences")]
    TreeCountMismatch {
        document_id: String,
        trees: usize,
        sentences: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Bracketed tree parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    next_leaf: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
            next_leaf: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> ExpandError {
        ExpandError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn atom(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'(' || b == b')' || b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    fn node(&mut self) -> Result<Node, ExpandError> {
        debug_assert_eq!(self.peek(), Some(b'('));
        self.pos += 1;
        self.skip_ws();
        // an empty label is legal: PTB wraps the root as "( (S ...))"
        let label = if self.peek() == Some(b'(') {
            String::new()
        } else {
            self.atom()
        };
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                Some(b'(') => children.push(self.node()?),
                Some(_) => {
                    let word = self.atom();
                    let index = self.next_leaf;
                    self.next_leaf += 1;
                    children.push(Node::Leaf { word, index });
                }
                None => return Err(self.err("unbalanced brackets: expected ')'")),
            }
        }
        if children.is_empty() {
            return Err(self.err(format!("constituent ({label} ...) has no children")));
        }
        let span = Span::new(
            children.first().unwrap().span().start,
            children.last().unwrap().span().end,
        );
        Ok(Node::Internal {
            label,
            children,
            span,
        })
    }
}

/// Parses one bracketed constituency tree. Leaves are numbered left to
/// right; alignment against a sentence is checked separately.
pub fn parse_bracketed(text: &str) -> Result<ParseTree, ExpandError> {
    let mut parser = Parser::new(text);
    parser.skip_ws();
    if parser.peek() != Some(b'(') {
        return Err(parser.err("expected '(' at start of tree"));
    }
    let root = parser.node()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("trailing input after tree"));
    }
    if parser.next_leaf == 0 {
        return Err(parser.err("tree has no leaves"));
    }
    Ok(ParseTree {
        root,
        leaf_count: parser.next_leaf,
    })
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

/// Constituent labels treated as expandable phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandTargets {
    pub nominal: Vec<String>,
    pub verbal: Vec<String>,
}

impl Default for ExpandTargets {
    fn default() -> Self {
        Self {
            nominal: vec!["NP".into(), "NML".into(), "NX".into()],
            verbal: vec!["VP".into()],
        }
    }
}

fn base_label(label: &str) -> &str {
    label.split(['-', '=']).next().unwrap_or(label)
}

/// Outermost constituent with a target label containing the head leaf.
fn outermost_target(root: &Node, head: usize, targets: &[String]) -> Option<Span> {
    let mut node = root;
    loop {
        match node {
            Node::Leaf { .. } => return None,
            Node::Internal {
                label,
                children,
                span,
            } => {
                if !span.contains(head) {
                    return None;
                }
                if targets.iter().any(|t| t == base_label(label)) {
                    return Some(*span);
                }
                node = children.iter().find(|c| c.span().contains(head))?;
            }
        }
    }
}

fn expanded_span(
    tree: &ParseTree,
    head_index: usize,
    head_pos: Option<&str>,
    targets: &ExpandTargets,
) -> Result<Option<Span>, ExpandError> {
    if head_index >= tree.leaf_count {
        return Err(ExpandError::HeadOutsideTree {
            head_index,
            leaves: tree.leaf_count,
        });
    }
    let tag_sets: Vec<&[String]> = match head_pos {
        Some(pos) if pos.starts_with('V') => vec![&targets.verbal],
        Some(pos) if pos.starts_with('N') => vec![&targets.nominal],
        _ => vec![&targets.nominal, &targets.verbal],
    };
    for tags in tag_sets {
        if let Some(span) = outermost_target(&tree.root, head_index, tags) {
            return Ok(Some(span));
        }
    }
    Ok(None)
}

/// Widens a mention to the largest target constituent containing its head.
/// The head, chain, and kind are preserved; with no target constituent the
/// mention is returned unchanged. `head_pos` selects between nominal and
/// verbal targets when available.
pub fn expand_mention(
    mention: &Mention,
    tree: &ParseTree,
    head_pos: Option<&str>,
    targets: &ExpandTargets,
) -> Result<Mention, ExpandError> {
    let mut out = mention.clone();
    if let Some(span) = expanded_span(tree, mention.head_index, head_pos, targets)? {
        out.span = span;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionOutcome {
    Applied,
    AlreadyMaximal,
    NoTargetConstituent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpansionRecord {
    pub mention_id: String,
    pub document_id: String,
    pub sentence_index: usize,
    pub old_span: Span,
    pub new_span: Span,
    pub outcome: ExpansionOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExpansionLog {
    pub records: Vec<ExpansionRecord>,
}

impl ExpansionLog {
    pub fn changed(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.outcome == ExpansionOutcome::Applied)
            .count()
    }
}

/// Per-sentence parses for a set of documents.
pub type ParseForest = HashMap<String, Vec<Option<ParseTree>>>;

/// Expands every mention of the corpus against the supplied parses. Chain
/// structure and mention counts are untouched; only spans change. Documents
/// that contain mentions must have aligned parses.
pub fn expand_corpus(
    corpus: &Corpus,
    parses: &ParseForest,
    targets: &ExpandTargets,
) -> Result<(Corpus, ExpansionLog), ExpandError> {
    let mut missing: Vec<String> = corpus
        .mentions()
        .iter()
        .map(|m| m.document_id.as_str())
        .filter(|id| !parses.contains_key(*id))
        .map(str::to_string)
        .collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        return Err(ExpandError::MissingParses {
            document_ids: missing,
        });
    }

    let results: Vec<(Mention, ExpansionRecord)> = corpus
        .mentions()
        .par_iter()
        .map(
            |mention| -> Result<(Mention, ExpansionRecord), ExpandError> {
                let sentence = corpus.mention_sentence(mention)?;
                let tree = parses[&mention.document_id]
                    .get(mention.sentence_index)
                    .and_then(Option::as_ref)
                    .ok_or_else(|| ExpandError::MissingSentenceParse {
                        document_id: mention.document_id.clone(),
                        sentence_index: mention.sentence_index,
                    })?;
                if tree.leaf_count != sentence.len() {
                    return Err(ExpandError::SentenceMisaligned {
                        document_id: mention.document_id.clone(),
                        sentence_index: mention.sentence_index,
                        leaves: tree.leaf_count,
                        tokens: sentence.len(),
                    });
                }
                let head_pos = corpus.head_token(mention)?.pos.clone();
                let new_span =
                    expanded_span(tree, mention.head_index, head_pos.as_deref(), targets)?;
                let (span, outcome) = match new_span {
                    None => (mention.span, ExpansionOutcome::NoTargetConstituent),
                    Some(s) if s == mention.span => (s, ExpansionOutcome::AlreadyMaximal),
                    Some(s) => (s, ExpansionOutcome::Applied),
                };
                let mut expanded = mention.clone();
                expanded.span = span;
                let record = ExpansionRecord {
                    mention_id: mention.mention_id.clone(),
                    document_id: mention.document_id.clone(),
                    sentence_index: mention.sentence_index,
                    old_span: mention.span,
                    new_span: span,
                    outcome,
                };
                Ok((expanded, record))
            },
        )
        .collect::<Result<_, _>>()?;

    let (mentions, mut records): (Vec<Mention>, Vec<ExpansionRecord>) = results.into_iter().unzip();
    records.sort_by(|a, b| {
        (
            &a.document_id,
            a.sentence_index,
            a.old_span.start,
            &a.mention_id,
        )
            .cmp(&(
                &b.document_id,
                b.sentence_index,
                b.old_span.start,
                &b.mention_id,
            ))
    });
    let expanded = Corpus::assemble(
        corpus.name(),
        corpus.documents().to_vec(),
        corpus.chains().to_vec(),
        mentions,
    );
    Ok((expanded, ExpansionLog { records }))
}

/// Reads `<document-id>.trees` sidecar files for every document of the
/// corpus. Missing files are tolerated here; [`expand_corpus`] raises an
/// error only for documents that actually contain mentions.
pub fn load_parses_dir(dir: &Path, corpus: &Corpus) -> Result<ParseForest, ExpandError> {
    let mut forest = ParseForest::new();
    for doc in corpus.documents() {
        let path = dir.join(format!("{}.trees", doc.document_id));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(ExpandError::Io { path, source: e }),
        };
        let mut trees: Vec<Option<ParseTree>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                trees.push(None);
            } else {
                trees.push(Some(parse_bracketed(line)?));
            }
        }
        if trees.len() > doc.sentences.len() {
            return Err(ExpandError::TreeCountMismatch {
                document_id: doc.document_id.clone(),
                trees: trees.len(),
                sentences: doc.sentences.len(),
            });
        }
        trees.resize(doc.sentences.len(), None);
        forest.insert(doc.document_id.clone(), trees);
    }
    Ok(forest)
}
