//! End-to-end checks of the command line surface: exit codes, file outputs,
//! and determinism.

mod common;

use std::fs;
use std::path::Path;

use common::{bin, run, stdout_of, synthetic_corpus, worked_example_fixture, SyntheticSpec};
use corefdiv::diversity::DatasetSummary;
use corefdiv::ingest::save_canonical_json;

fn fixture_str() -> String {
    worked_example_fixture().display().to_string()
}

#[test]
fn validate_accepts_the_fixture() {
    let out = run(&["validate", "--input", &fixture_str()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_of(&out).contains("ok: worked_example"));
}

#[test]
fn validate_rejects_structural_errors_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = fs::read_to_string(worked_example_fixture())
        .unwrap()
        .replace("\"end\": 2", "\"end\": 9");
    let path = dir.path().join("bad.json");
    fs::write(&path, bad).unwrap();
    let out = run(&["validate", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("span_out_of_range"), "stderr: {err}");
}

#[test]
fn validate_missing_file_is_exit_1() {
    let out = run(&["validate", "--input", "no/such/corpus.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_level_is_a_usage_error() {
    let out = run(&["baseline", "--input", &fixture_str(), "--level", "galaxy"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convert_round_trips_through_conll() {
    let dir = tempfile::tempdir().unwrap();
    let conll = dir.path().join("k.conll");
    let back = dir.path().join("back.json");
    let out = run(&[
        "convert",
        "--input",
        &fixture_str(),
        "--to",
        "conll",
        "--output",
        conll.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&conll).unwrap();
    assert!(text.starts_with("#begin document (doc_c1); part 000"));
    let out = run(&[
        "convert",
        "--input",
        conll.to_str().unwrap(),
        "--format",
        "conll",
        "--to",
        "json",
        "--output",
        back.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let reloaded = corefdiv::load_corpus(&back, corefdiv::CorpusFormat::CanonicalJson).unwrap();
    assert_eq!(reloaded.mentions().len(), 12);
    assert_eq!(reloaded.chains().len(), 2);
}

#[test]
fn stats_prints_the_table_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("summary.json");
    let out = run(&[
        "stats",
        "--input",
        &fixture_str(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = stdout_of(&out);
    assert!(table.contains("dataset: worked_example"));
    assert!(table.contains("# mentions"));
    assert!(table.contains("12"));
    assert!(table.contains("phrasing diversity (PD)"));
    assert!(table.contains("1.5")); // 23/15 at one decimal
    let summary: DatasetSummary =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary.mentions, 12);
    assert_eq!(summary.chains, 2);
    assert!((summary.pd_weighted.unwrap() - 23.0 / 15.0).abs() < 1e-9);
}

#[test]
fn stats_with_baseline_adds_the_f1_row() {
    let out = run(&[
        "stats",
        "--input",
        &fixture_str(),
        "--with-baseline",
        "subtopic",
        "--exclude-singletons",
    ]);
    assert!(out.status.success());
    let table = stdout_of(&out);
    assert!(
        table.contains("F1_CoNLL (lemma baseline)*"),
        "table: {table}"
    );
    assert!(table.contains("average chain size*"));
}

#[test]
fn diversity_emits_per_chain_rows_at_four_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("chains.csv");
    let out = run(&[
        "diversity",
        "--input",
        &fixture_str(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "chain_id,size,unique_lemmas,pd");
    assert!(lines.contains(&"c1,6,2,1.0667"));
    assert!(lines.contains(&"c2,6,2,2.0000"));
}

#[test]
fn baseline_writes_response_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let response = dir.path().join("resp.conll");
    let scores = dir.path().join("scores.json");
    let out = run(&[
        "baseline",
        "--input",
        &fixture_str(),
        "--level",
        "corpus",
        "--response",
        response.to_str().unwrap(),
        "--json",
        scores.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&scores).unwrap()).unwrap();
    let conll = value["conll_f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&conll));
    // worked_example at corpus level: trump(5)+president(1) vs gold c1, and the
    // immigrant/caravan split of c2
    let muc_r = value["muc"]["recall"].as_f64().unwrap();
    assert!((muc_r - 0.8).abs() < 1e-9, "muc recall {muc_r}");
    assert!(fs::read_to_string(&response)
        .unwrap()
        .contains("#begin document"));
}

#[test]
fn score_command_agrees_with_itself_on_gold_vs_gold() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("key.conll");
    run(&[
        "convert",
        "--input",
        &fixture_str(),
        "--to",
        "conll",
        "--output",
        key.to_str().unwrap(),
    ]);
    let json = dir.path().join("scores.json");
    let out = run(&[
        "score",
        "--key",
        key.to_str().unwrap(),
        "--response",
        key.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(value["conll_f1"].as_f64().unwrap(), 1.0);
    assert_eq!(value["muc"]["f1"].as_f64().unwrap(), 1.0);
}

#[test]
fn score_command_rejects_mismatched_universes() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("key.conll");
    run(&[
        "convert",
        "--input",
        &fixture_str(),
        "--to",
        "conll",
        "--output",
        key.to_str().unwrap(),
    ]);
    // drop one mention's brackets to shrink the response universe
    let text = fs::read_to_string(&key)
        .unwrap()
        .replacen("\t(2\n", "\t-\n", 1)
        .replacen("\t2)\n", "\t-\n", 1);
    let response = dir.path().join("resp.conll");
    fs::write(&response, text).unwrap();
    let out = run(&[
        "score",
        "--key",
        key.to_str().unwrap(),
        "--response",
        response.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expand_widens_spans_using_sidecar_parses() {
    let dir = tempfile::tempdir().unwrap();
    // single-mention corpus, head "Trump" at token 2, minimal span
    let corpus_json = r#"{
        "name": "mini",
        "documents": [
            {"id": "d1", "topic": "t", "subtopic": "s",
             "sentences": [[{"surface": "President"}, {"surface": "Donald"}, {"surface": "Trump", "pos": "NNP"}]]}
        ],
        "chains": [
            {"id": "c", "mentions": [
                {"id": "m", "doc": "d1", "sentence": 0, "start": 2, "end": 3, "head": 2, "kind": "entity"}
            ]}
        ]
    }"#;
    let input = dir.path().join("mini.json");
    fs::write(&input, corpus_json).unwrap();
    let parses = dir.path().join("parses");
    fs::create_dir(&parses).unwrap();
    fs::write(
        parses.join("d1.trees"),
        "(S (NP (NNP President) (NNP Donald) (NNP Trump)))\n",
    )
    .unwrap();
    let output = dir.path().join("expanded.json");
    let log = dir.path().join("log.csv");
    let out = run(&[
        "expand",
        "--input",
        input.to_str().unwrap(),
        "--parses",
        parses.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let expanded = corefdiv::load_corpus(&output, corefdiv::CorpusFormat::CanonicalJson).unwrap();
    let m = &expanded.mentions()[0];
    assert_eq!((m.span.start, m.span.end), (0, 3));
    assert_eq!(m.head_index, 2);
    let log_text = fs::read_to_string(&log).unwrap();
    assert!(
        log_text.contains("m,d1,0,2,3,0,3,applied"),
        "log: {log_text}"
    );
}

#[test]
fn plotdata_carries_dataset_labels_and_respects_singleton_filter() {
    let dir = tempfile::tempdir().unwrap();
    // second dataset: worked_example plus a singleton chain, renamed
    let mut corpus = corefdiv::load_corpus(
        &worked_example_fixture(),
        corefdiv::CorpusFormat::CanonicalJson,
    )
    .unwrap();
    let mut documents = corpus.documents().to_vec();
    documents[0]
        .sentences
        .push(vec![corefdiv::Token::new("solo", "solo", None)]);
    let mut chains = corpus.chains().to_vec();
    let mut mentions = corpus.mentions().to_vec();
    mentions.push(corefdiv::Mention {
        mention_id: "lone".into(),
        document_id: documents[0].document_id.clone(),
        sentence_index: documents[0].sentences.len() - 1,
        span: corefdiv::Span::new(0, 1),
        head_index: 0,
        chain_id: "lonely".into(),
        kind: corefdiv::MentionKind::Entity,
    });
    chains.push(corefdiv::Chain {
        chain_id: "lonely".into(),
        label: None,
        mention_ids: vec!["lone".into()],
    });
    corpus = corefdiv::Corpus::assemble("other", documents, chains, mentions);
    let second = dir.path().join("other.json");
    save_canonical_json(&corpus, &second).unwrap();

    let output = dir.path().join("plot.csv");
    let out = run(&[
        "plotdata",
        "--input",
        &fixture_str(),
        "--input",
        second.to_str().unwrap(),
        "--exclude-singletons",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&output).unwrap();
    assert!(text.lines().any(|l| l.starts_with("worked_example,")));
    assert!(text.lines().any(|l| l.starts_with("other,")));
    assert!(!text.contains("lonely"), "singleton chain leaked: {text}");
    // Figure 2a rows: (chain, size, y) with both y columns by default
    assert!(text.lines().next().unwrap() == "dataset,chain_id,size,unique_lemmas,pd");
    assert!(text.contains("worked_example,c1,6,2,1.0667"));
    assert!(text.contains("worked_example,c2,6,2,2.0000"));
}

#[test]
fn pipeline_requires_parses_when_expansion_is_on() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "pipeline",
        "--input",
        &fixture_str(),
        "--expand",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parses"), "stderr: {err}");
    // no partial outputs
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn pipeline_writes_a_deterministic_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synth.json");
    save_canonical_json(&synthetic_corpus(&SyntheticSpec::small()), &input).unwrap();
    let out_dir = dir.path().join("bundle");
    let args = [
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--level",
        "subtopic",
        "--exclude-singletons",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ];
    let out = run(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let files = [
        "summary.json",
        "chains.csv",
        "response.conll",
        "scores.json",
        "manifest.json",
    ];
    let mut first = Vec::new();
    for f in files {
        first.push(fs::read(out_dir.join(f)).unwrap());
    }
    // rerun into the same directory: byte-identical outputs
    let out = run(&args);
    assert!(out.status.success());
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(
            &fs::read(out_dir.join(f)).unwrap(),
            bytes,
            "file {f} changed"
        );
    }
    // summary embeds the baseline F1
    let summary: DatasetSummary =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary.lemma_baseline_conll_f1.is_some());
}

#[test]
fn stats_on_an_empty_corpus_reports_zero_counts_and_absent_averages() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.json");
    fs::write(
        &input,
        r#"{"name": "empty", "documents": [], "chains": []}"#,
    )
    .unwrap();
    let json = dir.path().join("summary.json");
    let out = run(&[
        "stats",
        "--input",
        input.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: DatasetSummary =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary.mentions, 0);
    assert_eq!(summary.chains, 0);
    assert_eq!(summary.avg_chain_size, None);
    assert_eq!(summary.pd_weighted, None);
    // absent averages render as "-"
    assert!(stdout_of(&out).contains('-'));
}

#[test]
fn pipeline_on_the_worked_example_reproduces_the_diversity_values() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bundle");
    let out = run(&[
        "pipeline",
        "--input",
        &fixture_str(),
        "--level",
        "corpus",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let chains = fs::read_to_string(out_dir.join("chains.csv")).unwrap();
    assert!(
        chains.lines().any(|l| l == "c1,6,2,1.0667"),
        "chains: {chains}"
    );
    assert!(chains.lines().any(|l| l == "c2,6,2,2.0000"));
}

#[test]
fn pipeline_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synth.json");
    save_canonical_json(&synthetic_corpus(&SyntheticSpec::small()), &input).unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        format!(
            r#"{{"input": "{}", "level": "topic", "exclude_singletons": true}}"#,
            input.display()
        ),
    )
    .unwrap();

    let hash_of = |out_name: &str, extra: &[&str]| -> String {
        let out_dir = dir.path().join(out_name);
        let mut args = vec![
            "pipeline".to_string(),
            "--config".into(),
            config.display().to_string(),
            "--out-dir".into(),
            out_dir.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        let out = bin().args(&args).output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap())
                .unwrap();
        manifest["config_hash"].as_str().unwrap().to_string()
    };

    let from_config = hash_of("c1", &[]);
    let overridden = hash_of("c2", &["--level", "subtopic"]);
    assert_ne!(from_config, overridden, "the flag must override the file");
    let overridden_again = hash_of("c3", &["--level", "subtopic"]);
    assert_eq!(overridden, overridden_again);
    let same_as_config = hash_of("c4", &["--level", "topic"]);
    assert_eq!(from_config, same_as_config);
}

#[test]
fn thread_cap_does_not_change_the_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synth.json");
    save_canonical_json(&synthetic_corpus(&SyntheticSpec::small()), &input).unwrap();
    let run_with = |threads: Option<&str>, out_name: &str| -> Vec<u8> {
        let out_dir = dir.path().join(out_name);
        let mut cmd = bin();
        cmd.args([
            "pipeline",
            "--input",
            input.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        if let Some(t) = threads {
            cmd.env("COREFDIV_THREADS", t);
        }
        let out = cmd.output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        fs::read(out_dir.join("summary.json")).unwrap()
    };
    let default = run_with(None, "b_default");
    let single = run_with(Some("1"), "b_single");
    let quad = run_with(Some("4"), "b_quad");
    assert_eq!(default, single);
    assert_eq!(default, quad);
}

#[test]
fn manifest_hash_tracks_config_and_input_changes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synth.json");
    save_canonical_json(&synthetic_corpus(&SyntheticSpec::small()), &input).unwrap();

    let manifest_for = |out_name: &str, level: &str, input_path: &Path| -> serde_json::Value {
        let out_dir = dir.path().join(out_name);
        let out = bin()
            .args([
                "pipeline",
                "--input",
                input_path.to_str().unwrap(),
                "--level",
                level,
                "--out-dir",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap()
    };

    let base = manifest_for("b1", "subtopic", &input);
    let rerun = manifest_for("b2", "subtopic", &input);
    assert_eq!(
        base, rerun,
        "identical runs must produce identical manifests"
    );

    let other_level = manifest_for("b3", "topic", &input);
    assert_ne!(
        base["config_hash"], other_level["config_hash"],
        "config change must change the hash"
    );

    let touched = dir.path().join("synth2.json");
    let mut bytes = fs::read(&input).unwrap();
    bytes.push(b'\n');
    fs::write(&touched, bytes).unwrap();
    let other_input = manifest_for("b4", "subtopic", &touched);
    assert_ne!(
        base["inputs"][0]["sha256"], other_input["inputs"][0]["sha256"],
        "input byte change must change the digest"
    );
}

#[test]
fn pipeline_with_expansion_emits_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_json = r#"{
        "name": "mini",
        "documents": [
            {"id": "d1", "topic": "t", "subtopic": "s",
             "sentences": [[{"surface": "President"}, {"surface": "Donald"}, {"surface": "Trump", "pos": "NNP"}],
                            [{"surface": "Trump", "pos": "NNP"}]]}
        ],
        "chains": [
            {"id": "c", "mentions": [
                {"id": "m1", "doc": "d1", "sentence": 0, "start": 2, "end": 3, "head": 2, "kind": "entity"},
                {"id": "m2", "doc": "d1", "sentence": 1, "start": 0, "end": 1, "head": 0, "kind": "entity"}
            ]}
        ]
    }"#;
    let input = dir.path().join("mini.json");
    fs::write(&input, corpus_json).unwrap();
    let parses = dir.path().join("parses");
    fs::create_dir(&parses).unwrap();
    fs::write(
        parses.join("d1.trees"),
        "(S (NP (NNP President) (NNP Donald) (NNP Trump)))\n(NP (NNP Trump))\n",
    )
    .unwrap();
    let out_dir = dir.path().join("bundle");
    let out = run(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--expand",
        "--parses",
        parses.to_str().unwrap(),
        "--level",
        "document",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "summary.json",
        "chains.csv",
        "response.conll",
        "scores.json",
        "expansion_log.csv",
        "summary_original.json",
        "chains_original.csv",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    // the expanded variant has two distinct phrases, the original only one
    let expanded: DatasetSummary =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let original: DatasetSummary =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary_original.json")).unwrap())
            .unwrap();
    assert!(expanded.pd_weighted.unwrap() > original.pd_weighted.unwrap());
    // manifest lists the parse file as an input
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}
