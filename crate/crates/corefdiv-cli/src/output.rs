//! File emission helpers: atomic writes, CSV/JSON rendering, and the
//! human-readable summary table.

use std::fs;
use std::path::Path;
use std::process;

use corefdiv::diversity::{ChainDiversity, DatasetSummary};
use corefdiv::scoring::ScoreReport;
use corefdiv::span_expand::{ExpansionLog, ExpansionOutcome};

use crate::commands::CliError;

/// Writes through a sibling temp file and an atomic rename, so a failed run
/// never leaves a partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp.{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// ScoreReport JSON with every value at 4 decimal places.
pub fn score_report_json(report: &ScoreReport) -> String {
    let prf = |p: &corefdiv::scoring::Prf| {
        serde_json::json!({
            "precision": round4(p.precision),
            "recall": round4(p.recall),
            "f1": round4(p.f1),
        })
    };
    let value = serde_json::json!({
        "muc": prf(&report.muc),
        "b_cubed": prf(&report.b_cubed),
        "ceaf_e": prf(&report.ceaf_e),
        "conll_f1": round4(report.conll_f1),
    });
    pretty_json(&value)
}

pub fn diversity_csv(chains: &[ChainDiversity]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["chain_id", "size", "unique_lemmas", "pd"])
        .expect("in-memory csv write");
    for c in chains {
        w.write_record([
            c.chain_id.as_str(),
            &c.size.to_string(),
            &c.unique_head_lemmas.to_string(),
            &format!("{:.4}", c.pd),
        ])
        .expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotColumns {
    Pd,
    UniqueLemmas,
    All,
}

pub fn plotdata_csv(rows: &[(String, ChainDiversity)], columns: PlotColumns) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = match columns {
        PlotColumns::Pd => vec!["dataset", "chain_id", "size", "pd"],
        PlotColumns::UniqueLemmas => vec!["dataset", "chain_id", "size", "unique_lemmas"],
        PlotColumns::All => vec!["dataset", "chain_id", "size", "unique_lemmas", "pd"],
    };
    w.write_record(&header).expect("in-memory csv write");
    for (dataset, c) in rows {
        let mut record = vec![dataset.clone(), c.chain_id.clone(), c.size.to_string()];
        match columns {
            PlotColumns::Pd => record.push(format!("{:.4}", c.pd)),
            PlotColumns::UniqueLemmas => record.push(c.unique_head_lemmas.to_string()),
            PlotColumns::All => {
                record.push(c.unique_head_lemmas.to_string());
                record.push(format!("{:.4}", c.pd));
            }
        }
        w.write_record(&record).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn expansion_log_csv(log: &ExpansionLog) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "mention_id",
        "document_id",
        "sentence",
        "old_start",
        "old_end",
        "new_start",
        "new_end",
        "outcome",
    ])
    .expect("in-memory csv write");
    for r in &log.records {
        let outcome = match r.outcome {
            ExpansionOutcome::Applied => "applied",
            ExpansionOutcome::AlreadyMaximal => "already_maximal",
            ExpansionOutcome::NoTargetConstituent => "no_target_constituent",
        };
        w.write_record([
            r.mention_id.as_str(),
            r.document_id.as_str(),
            &r.sentence_index.to_string(),
            &r.old_span.start.to_string(),
            &r.old_span.end.to_string(),
            &r.new_span.start.to_string(),
            &r.new_span.end.to_string(),
            outcome,
        ])
        .expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

fn fmt_avg(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.1}"),
        None => "-".to_string(),
    }
}

/// Table mirroring the usual dataset-comparison layout; starred rows are
/// averages over the singleton-filtered chains, rounded to one decimal.
pub fn summary_table(name: &str, summary: &DatasetSummary, starred: bool) -> String {
    let star = if starred { "*" } else { "" };
    let mut rows: Vec<(String, String)> = vec![
        ("# topics".into(), summary.topics.to_string()),
        ("# subtopics".into(), summary.subtopics.to_string()),
        ("# articles".into(), summary.articles.to_string()),
        ("# mentions".into(), summary.mentions.to_string()),
        ("# chains".into(), summary.chains.to_string()),
        ("# singletons".into(), summary.singletons.to_string()),
        (
            format!("average chain size{star}"),
            fmt_avg(summary.avg_chain_size),
        ),
        (
            format!("average # unique lemmas{star}"),
            fmt_avg(summary.avg_unique_lemmas),
        ),
        (
            format!("phrasing diversity (PD){star}"),
            fmt_avg(summary.pd_weighted),
        ),
    ];
    if let Some(f1) = summary.lemma_baseline_conll_f1 {
        rows.push((
            format!("F1_CoNLL (lemma baseline){star}"),
            format!("{:.1}", f1 * 100.0),
        ));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = format!("dataset: {name}\n");
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}
