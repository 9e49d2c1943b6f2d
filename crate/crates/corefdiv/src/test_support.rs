//! Builders for the corpora used across unit tests.

use crate::corpus::{Chain, Corpus, Document, Mention, MentionKind, Span, Token};

pub fn tok(surface: &str, lemma: &str, pos: &str) -> Token {
    Token::new(surface, lemma, Some(pos))
}

/// One document per chain, one sentence per mention, each sentence holding
/// exactly the mention's tokens.
pub struct ChainSpec {
    pub chain_id: &'static str,
    pub label: Option<&'static str>,
    /// (tokens, head index within the sentence)
    pub phrases: Vec<(Vec<Token>, usize)>,
    pub kind: MentionKind,
}

pub fn corpus_from_chains(
    name: &str,
    topic: &str,
    subtopic: &str,
    specs: Vec<ChainSpec>,
) -> Corpus {
    let mut documents = Vec::new();
    let mut chains = Vec::new();
    let mut mentions = Vec::new();
    for spec in specs {
        let doc_id = format!("doc_{}", spec.chain_id);
        let mut sentences = Vec::new();
        let mut mention_ids = Vec::new();
        for (s_idx, (tokens, head)) in spec.phrases.into_iter().enumerate() {
            let mention_id = format!("{}m{}", spec.chain_id, s_idx + 1);
            mentions.push(Mention {
                mention_id: mention_id.clone(),
                document_id: doc_id.clone(),
                sentence_index: s_idx,
                span: Span::new(0, tokens.len()),
                head_index: head,
                chain_id: spec.chain_id.to_string(),
                kind: spec.kind,
            });
            mention_ids.push(mention_id);
            sentences.push(tokens);
        }
        documents.push(Document {
            document_id: doc_id,
            topic_id: topic.to_string(),
            subtopic_id: subtopic.to_string(),
            sentences,
        });
        chains.push(Chain {
            chain_id: spec.chain_id.to_string(),
            label: spec.label.map(str::to_string),
            mention_ids,
        });
    }
    Corpus::assemble(name, documents, chains, mentions)
}

/// The two worked-example chains: five Trump-headed phrases plus "the
/// president", and three immigrant-headed plus three caravan-headed phrases.
pub fn worked_example() -> Corpus {
    let chain1 = ChainSpec {
        chain_id: "c1",
        label: Some("Donald Trump"),
        kind: MentionKind::Entity,
        phrases: vec![
            (
                vec![tok("Donald", "donald", "NNP"), tok("Trump", "trump", "NNP")],
                1,
            ),
            (
                vec![tok("Donald", "donald", "NNP"), tok("Trump", "trump", "NNP")],
                1,
            ),
            (
                vec![tok("Donald", "donald", "NNP"), tok("Trump", "trump", "NNP")],
                1,
            ),
            (
                vec![tok("the", "the", "DT"), tok("president", "president", "NN")],
                1,
            ),
            (
                vec![
                    tok("President", "president", "NNP"),
                    tok("Donald", "donald", "NNP"),
                    tok("Trump", "trump", "NNP"),
                ],
                2,
            ),
            (
                vec![tok("Mr.", "mr.", "NNP"), tok("Trump", "trump", "NNP")],
                1,
            ),
        ],
    };
    let chain2 = ChainSpec {
        chain_id: "c2",
        label: Some("migrant caravan"),
        kind: MentionKind::Entity,
        phrases: vec![
            (
                vec![
                    tok("undocumented", "undocumented", "JJ"),
                    tok("immigrants", "immigrant", "NNS"),
                ],
                1,
            ),
            (
                vec![
                    tok("immigrants", "immigrant", "NNS"),
                    tok("seeking", "seek", "VBG"),
                    tok("hope", "hope", "NN"),
                ],
                0,
            ),
            (
                vec![
                    tok("unauthorized", "unauthorized", "JJ"),
                    tok("immigrants", "immigrant", "NNS"),
                ],
                1,
            ),
            (
                vec![
                    tok("migrant", "migrant", "JJ"),
                    tok("caravan", "caravan", "NN"),
                ],
                1,
            ),
            (
                vec![
                    tok("a", "a", "DT"),
                    tok("caravan", "caravan", "NN"),
                    tok("of", "of", "IN"),
                    tok("Central", "central", "JJ"),
                    tok("American", "american", "JJ"),
                    tok("migrants", "migrant", "NNS"),
                ],
                1,
            ),
            (
                vec![
                    tok("a", "a", "DT"),
                    tok("caravan", "caravan", "NN"),
                    tok("of", "of", "IN"),
                    tok("hundreds", "hundred", "NNS"),
                    tok("of", "of", "IN"),
                    tok("migrants", "migrant", "NNS"),
                ],
                1,
            ),
        ],
    };
    corpus_from_chains("worked_example", "t1", "t1s1", vec![chain1, chain2])
}

/// A corpus holding exactly one single-token mention.
pub fn single_mention_corpus(surface: &str, lemma: &str, pos: Option<&str>) -> Corpus {
    let doc = Document {
        document_id: "d1".into(),
        topic_id: "t1".into(),
        subtopic_id: "t1".into(),
        sentences: vec![vec![Token::new(surface, lemma, pos)]],
    };
    let mention = Mention {
        mention_id: "m1".into(),
        document_id: "d1".into(),
        sentence_index: 0,
        span: Span::new(0, 1),
        head_index: 0,
        chain_id: "ch1".into(),
        kind: MentionKind::Entity,
    };
    let chain = Chain {
        chain_id: "ch1".into(),
        label: None,
        mention_ids: vec!["m1".into()],
    };
    Corpus::assemble("single", vec![doc], vec![chain], vec![mention])
}

#[cfg(test)]
mod fixture {
    /// Regenerates tests/fixtures/worked_example.json from the builder above.
    /// Run with: cargo test -p corefdiv regenerate_worked_example -- --include-ignored
    #[test]
    #[ignore = "writes the checked-in fixture"]
    fn regenerate_worked_example_fixture() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
        std::fs::create_dir_all(&dir).unwrap();
        let json = crate::ingest::corpus_to_json_string(&super::worked_example());
        std::fs::write(dir.join("worked_example.json"), json).unwrap();
    }
}
