//! CoNLL-style column format with coreference brackets in the final column.
//!
//! One block per unit:
//!
//! ```text
//! #begin document (<unit-id>); part 000
//! <unit-id>  0  <token-index>  <surface>  <coref>
//! ...
//! #end document
//! ```
//!
//! Sentences are separated by blank lines. The coreference cell uses the
//! bracket convention: `(3` opens chain 3, `3)` closes it, `(3)` marks a
//! single-token mention, `-` marks none, and multiple entries are joined
//! with `|`. Columns between the token index, surface, and final column are
//! ignored on read. Empty sentences are not representable.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{Chain, Corpus, Document, Mention, MentionKind, Span, Token};
use crate::ingest::{codes, IngestError, ValidationReport};

/// Unit a CoNLL block stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Document,
    Subtopic,
    Topic,
}

impl Grouping {
    pub fn unit_of(&self, doc: &Document) -> String {
        match self {
            Grouping::Document => doc.document_id.clone(),
            Grouping::Subtopic => format!("{}/{}", doc.topic_id, doc.subtopic_id),
            Grouping::Topic => doc.topic_id.clone(),
        }
    }
}

fn sanitize_surface(surface: &str) -> String {
    if surface.chars().any(char::is_whitespace) {
        surface
            .chars()
            .map(|c| if c.is_whitespace() { '_' } else { c })
            .collect()
    } else {
        surface.to_string()
    }
}

fn coref_cell(spans: Option<&Vec<(Span, usize)>>, t: usize) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Some(spans) = spans {
        let mut begins: Vec<(Span, usize)> = spans
            .iter()
            .filter(|(s, _)| s.start == t && s.len() > 1)
            .cloned()
            .collect();
        // longer spans open first so same-chain nesting closes innermost-first
        begins.sort_by(|a, b| b.0.end.cmp(&a.0.end).then(a.1.cmp(&b.1)));
        let mut singles: Vec<usize> = spans
            .iter()
            .filter(|(s, _)| s.start == t && s.len() == 1)
            .map(|(_, id)| *id)
            .collect();
        singles.sort_unstable();
        let mut ends: Vec<(Span, usize)> = spans
            .iter()
            .filter(|(s, _)| s.end == t + 1 && s.len() > 1)
            .cloned()
            .collect();
        ends.sort_by(|a, b| b.0.start.cmp(&a.0.start).then(a.1.cmp(&b.1)));
        for (_, id) in &begins {
            parts.push(format!("({id}"));
        }
        for id in &singles {
            parts.push(format!("({id})"));
        }
        for (_, id) in &ends {
            parts.push(format!("{id})"));
        }
    }
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join("|")
    }
}

fn render(
    corpus: &Corpus,
    grouping: Grouping,
    clusters: &[(usize, &[String])], // (bracket id, mention ids)
) -> String {
    // (document, sentence) -> [(span, bracket id)]
    let mut spans_by_loc: HashMap<(&str, usize), Vec<(Span, usize)>> = HashMap::new();
    for (bracket, cluster) in clusters {
        for id in *cluster {
            if let Some(m) = corpus.mention(id) {
                spans_by_loc
                    .entry((m.document_id.as_str(), m.sentence_index))
                    .or_default()
                    .push((m.span, *bracket));
            }
        }
    }

    let mut units: std::collections::BTreeMap<String, Vec<&Document>> =
        std::collections::BTreeMap::new();
    for doc in corpus.documents() {
        units.entry(grouping.unit_of(doc)).or_default().push(doc);
    }
    for docs in units.values_mut() {
        docs.sort_by(|a, b| a.document_id.cmp(&b.document_id));
    }

    let mut out = String::new();
    for (unit, docs) in &units {
        writeln!(out, "#begin document ({unit}); part 000").unwrap();
        for doc in docs {
            for (s_idx, sentence) in doc.sentences.iter().enumerate() {
                let spans = spans_by_loc.get(&(doc.document_id.as_str(), s_idx));
                for (t_idx, token) in sentence.iter().enumerate() {
                    let cell = coref_cell(spans, t_idx);
                    writeln!(
                        out,
                        "{unit}\t0\t{t_idx}\t{}\t{cell}",
                        sanitize_surface(&token.surface)
                    )
                    .unwrap();
                }
                out.push('\n');
            }
        }
        writeln!(out, "#end document").unwrap();
    }
    out
}

/// Renders the corpus with an explicit clustering (cluster index -> mention
/// ids). Bracket ids in the file are the 1-based positions in `partition`.
pub fn conll_string_with_partition(
    corpus: &Corpus,
    grouping: Grouping,
    partition: &[Vec<String>],
) -> String {
    let clusters: Vec<(usize, &[String])> = partition
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.as_slice()))
        .collect();
    render(corpus, grouping, &clusters)
}

/// Renders the gold chains of a corpus as a CoNLL key. Chain ids are kept
/// verbatim as bracket ids when they all parse as distinct integers;
/// otherwise brackets are numbered by chain position, 1-based.
pub fn conll_key_string(corpus: &Corpus, grouping: Grouping) -> String {
    let numeric: Option<Vec<usize>> = corpus
        .chains()
        .iter()
        .map(|c| c.chain_id.parse::<usize>().ok())
        .collect();
    let ids: Vec<usize> = match numeric {
        Some(ids) if ids.len() == ids.iter().collect::<std::collections::HashSet<_>>().len() => ids,
        _ => (1..=corpus.chains().len()).collect(),
    };
    let clusters: Vec<(usize, &[String])> = corpus
        .chains()
        .iter()
        .zip(ids)
        .map(|(c, id)| (id, c.mention_ids.as_slice()))
        .collect();
    render(corpus, grouping, &clusters)
}

/// Writes the gold chains of a validated corpus as a CoNLL key file, one
/// block per unit at the chosen grouping, deterministically ordered.
pub fn write_conll_key(corpus: &Corpus, grouping: Grouping, out: &Path) -> Result<(), IngestError> {
    fs::write(out, conll_key_string(corpus, grouping)).map_err(|e| IngestError::io(out, e))
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

struct BlockState {
    unit: String,
    begun_at: usize,
    sentences: Vec<Vec<Token>>,
    current: Vec<Token>,
    // chain token -> stack of (start index) open in the current sentence
    open: HashMap<String, Vec<usize>>,
    mentions: Vec<(String, usize, Span)>, // (chain token, sentence, span)
}

fn parse_begin_line(line: &str) -> Option<String> {
    let rest = line.strip_prefix("#begin document (")?;
    if let Some(i) = rest.rfind("); part") {
        Some(rest[..i].to_string())
    } else {
        rest.strip_suffix(')').map(str::to_string)
    }
}

/// Parses the column format from a string. `name` becomes the corpus name;
/// `origin` is only used in error messages. The returned report carries a
/// `fallback_head` warning per mention since the format has no head column.
pub fn parse_conll_str(
    text: &str,
    name: &str,
    origin: &Path,
) -> Result<(Corpus, ValidationReport), IngestError> {
    let err = |line: usize, message: String| IngestError::Conll {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut documents: Vec<Document> = Vec::new();
    // chain token -> position in `chains`; merged across blocks
    let mut chain_pos: HashMap<String, usize> = HashMap::new();
    let mut chains: Vec<Chain> = Vec::new();
    let mut mentions: Vec<Mention> = Vec::new();
    let mut report = ValidationReport::new();
    let mut block: Option<BlockState> = None;

    fn flush_sentence(state: &mut BlockState, line_no: usize) -> Result<(), (usize, String)> {
        if let Some((chain, _)) = state.open.iter().find(|(_, stack)| !stack.is_empty()) {
            return Err((
                line_no,
                format!("unclosed mention bracket for chain {chain} at sentence end"),
            ));
        }
        state.open.clear();
        if !state.current.is_empty() {
            state.sentences.push(std::mem::take(&mut state.current));
        }
        Ok(())
    }

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if let Some(state) = block.as_mut() {
            if line.trim().is_empty() {
                flush_sentence(state, line_no).map_err(|(l, m)| err(l, m))?;
                continue;
            }
            if line.starts_with("#end document") {
                flush_sentence(state, line_no).map_err(|(l, m)| err(l, m))?;
                let state = block.take().unwrap();
                let doc_id = state.unit.clone();
                for (chain_token, sentence, span) in state.mentions {
                    let mention_id = format!(
                        "{}/s{}/{}-{}/c{}",
                        doc_id, sentence, span.start, span.end, chain_token
                    );
                    let pos = *chain_pos.entry(chain_token.clone()).or_insert_with(|| {
                        chains.push(Chain {
                            chain_id: chain_token.clone(),
                            label: None,
                            mention_ids: Vec::new(),
                        });
                        chains.len() - 1
                    });
                    chains[pos].mention_ids.push(mention_id.clone());
                    report.warning(
                        codes::FALLBACK_HEAD,
                        &mention_id,
                        "head set to the last token of the span (no head column in this format)",
                    );
                    mentions.push(Mention {
                        mention_id,
                        document_id: doc_id.clone(),
                        sentence_index: sentence,
                        span,
                        head_index: span.end - 1,
                        chain_id: chain_token.clone(),
                        kind: MentionKind::Other,
                    });
                }
                documents.push(Document {
                    document_id: doc_id.clone(),
                    topic_id: doc_id.clone(),
                    subtopic_id: doc_id,
                    sentences: state.sentences,
                });
                continue;
            }
            if line.starts_with("#begin document") {
                return Err(err(line_no, "nested #begin document".to_string()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 5 {
                return Err(err(
                    line_no,
                    format!("expected at least 5 columns, found {}", fields.len()),
                ));
            }
            if fields[0] != state.unit {
                return Err(err(
                    line_no,
                    format!(
                        "unit id {} does not match block unit {}",
                        fields[0], state.unit
                    ),
                ));
            }
            let tok_idx: usize = fields[2]
                .parse()
                .map_err(|_| err(line_no, format!("bad token index {:?}", fields[2])))?;
            if tok_idx != state.current.len() {
                return Err(err(
                    line_no,
                    format!(
                        "token index {} does not match position {} in sentence",
                        tok_idx,
                        state.current.len()
                    ),
                ));
            }
            let surface = fields[3].to_string();
            let coref = *fields.last().unwrap();
            let t = state.current.len();
            state.current.push(Token {
                lemma: surface.to_lowercase(),
                surface,
                pos: None,
            });
            if coref != "-" {
                for part in coref.split('|') {
                    if part.is_empty() {
                        return Err(err(line_no, "empty coreference bracket".to_string()));
                    }
                    let opens = part.starts_with('(');
                    let closes = part.ends_with(')');
                    let token = part
                        .trim_start_matches('(')
                        .trim_end_matches(')')
                        .to_string();
                    if token.is_empty() || token.contains(['(', ')']) {
                        return Err(err(line_no, format!("bad coreference bracket {part:?}")));
                    }
                    match (opens, closes) {
                        (true, true) => {
                            let sentence = state.sentences.len();
                            state.mentions.push((token, sentence, Span::new(t, t + 1)));
                        }
                        (true, false) => {
                            state.open.entry(token).or_default().push(t);
                        }
                        (false, true) => {
                            let start =
                                state
                                    .open
                                    .get_mut(&token)
                                    .and_then(Vec::pop)
                                    .ok_or_else(|| {
                                        err(
                                            line_no,
                                            format!(
                                                "closing bracket for chain {token} with no opening"
                                            ),
                                        )
                                    })?;
                            let sentence = state.sentences.len();
                            state
                                .mentions
                                .push((token, sentence, Span::new(start, t + 1)));
                        }
                        (false, false) => {
                            return Err(err(line_no, format!("bad coreference bracket {part:?}")));
                        }
                    }
                }
            }
        } else {
            if line.trim().is_empty() || line.starts_with('#') && !line.starts_with("#begin") {
                continue;
            }
            if line.starts_with("#begin") {
                let unit = parse_begin_line(line)
                    .ok_or_else(|| err(line_no, format!("malformed #begin line {line:?}")))?;
                block = Some(BlockState {
                    unit,
                    begun_at: line_no,
                    sentences: Vec::new(),
                    current: Vec::new(),
                    open: HashMap::new(),
                    mentions: Vec::new(),
                });
                continue;
            }
            return Err(err(
                line_no,
                format!("unexpected line outside a block: {line:?}"),
            ));
        }
    }
    if let Some(state) = &block {
        return Err(err(
            state.begun_at,
            format!("block {} is never terminated by #end document", state.unit),
        ));
    }

    Ok((Corpus::assemble(name, documents, chains, mentions), report))
}
