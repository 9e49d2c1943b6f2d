//! Shared helpers for the CLI and acceptance tests: binary invocation and a
//! deterministic synthetic corpus generator.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use corefdiv::corpus::{Chain, Corpus, Document, Mention, MentionKind, Span, Token};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corefdiv"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn corefdiv")
}

#[allow(dead_code)]
pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[allow(dead_code)]
pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub fn worked_example_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../corefdiv/tests/fixtures/worked_example.json")
        .canonicalize()
        .expect("worked_example fixture exists")
}

/// Deterministic corpus: `topics * 2` subtopics, `docs_per_subtopic`
/// documents each, `mentions_per_doc` two-token mentions per document (one
/// sentence per mention). Within a subtopic the first `singleton_chains`
/// chains hold one mention; the rest of the mentions spread over
/// `multi_chains` chains.
pub struct SyntheticSpec {
    pub seed: u64,
    pub topics: usize,
    pub docs_per_subtopic: usize,
    pub mentions_per_doc: usize,
    pub singleton_chains: usize,
    pub multi_chains: usize,
}

impl SyntheticSpec {
    #[allow(dead_code)]
    pub fn big() -> Self {
        // 50 topics x 2 subtopics x 10 docs = 1000 documents,
        // 20 mentions each = 20000 mentions
        Self {
            seed: 42,
            topics: 50,
            docs_per_subtopic: 10,
            mentions_per_doc: 20,
            singleton_chains: 10,
            multi_chains: 30,
        }
    }

    #[allow(dead_code)]
    pub fn small() -> Self {
        Self {
            seed: 7,
            topics: 2,
            docs_per_subtopic: 3,
            mentions_per_doc: 5,
            singleton_chains: 2,
            multi_chains: 4,
        }
    }
}

pub fn synthetic_corpus(spec: &SyntheticSpec) -> Corpus {
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let mut documents = Vec::new();
    let mut chains: Vec<Chain> = Vec::new();
    let mut mentions = Vec::new();

    for t in 0..spec.topics {
        for s in 0..2 {
            let subtopic = format!("t{t:02}s{s}");
            let chain_base = chains.len();
            for k in 0..(spec.singleton_chains + spec.multi_chains) {
                chains.push(Chain {
                    chain_id: format!("{subtopic}_ch{k:02}"),
                    label: None,
                    mention_ids: Vec::new(),
                });
            }
            let mut assigned_singletons = 0;
            for d in 0..spec.docs_per_subtopic {
                let doc_id = format!("{subtopic}_d{d:02}");
                let mut sentences = Vec::new();
                for m in 0..spec.mentions_per_doc {
                    let modifier = rng.gen_range(0..40u32);
                    let head = rng.gen_range(0..60u32);
                    sentences.push(vec![
                        Token::new(
                            format!("mod{modifier}"),
                            format!("mod{modifier}"),
                            Some("JJ"),
                        ),
                        Token::new(format!("noun{head}"), format!("noun{head}"), Some("NN")),
                    ]);
                    let chain_offset = if assigned_singletons < spec.singleton_chains {
                        assigned_singletons += 1;
                        assigned_singletons - 1
                    } else {
                        spec.singleton_chains + rng.gen_range(0..spec.multi_chains)
                    };
                    let chain_idx = chain_base + chain_offset;
                    let mention_id = format!("{doc_id}_m{m:02}");
                    chains[chain_idx].mention_ids.push(mention_id.clone());
                    mentions.push(Mention {
                        mention_id,
                        document_id: doc_id.clone(),
                        sentence_index: m,
                        span: Span::new(0, 2),
                        head_index: 1,
                        chain_id: chains[chain_idx].chain_id.clone(),
                        kind: if rng.gen_bool(0.3) {
                            MentionKind::Event
                        } else {
                            MentionKind::Entity
                        },
                    });
                }
                documents.push(Document {
                    document_id: doc_id,
                    topic_id: format!("t{t:02}"),
                    subtopic_id: subtopic.clone(),
                    sentences,
                });
            }
        }
    }
    // a chain may end up empty if the subtopic had fewer mentions than
    // singleton slots; drop those to keep the corpus valid
    let chains: Vec<Chain> = chains.into_iter().filter(|c| !c.is_empty()).collect();
    Corpus::assemble("synthetic", documents, chains, mentions)
}
