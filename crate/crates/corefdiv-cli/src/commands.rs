//! Subcommand implementations and the error-to-exit-code mapping.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use corefdiv::baseline::{
    run_baseline, Aggregation, BaselineError, BaselineOptions, ClusteringResult, Level,
};
use corefdiv::conll::{conll_key_string, conll_string_with_partition, Grouping};
use corefdiv::corpus::{Corpus, HeadGrouping, NormalizationPolicy};
use corefdiv::diversity::{chain_diversities, summarize, ChainDiversity, DiversityError};
use corefdiv::ingest::{
    corpus_to_json_string, load_corpus_with_report, CorpusFormat, IngestError, ValidationReport,
};
use corefdiv::scoring::{score_report, ScoreError, ScoreReport};
use corefdiv::span_expand::{
    expand_corpus, load_parses_dir, ExpandError, ExpandTargets, ExpansionLog,
};
use corefdiv::ModelError;

use crate::manifest::{self, InputDigest};
use crate::output::{
    diversity_csv, expansion_log_csv, plotdata_csv, pretty_json, score_report_json, summary_table,
    write_atomic, PlotColumns,
};

/// Exit code 1 for I/O failures, 2 for validation/usage failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ExpandError> for CliError {
    fn from(e: ExpandError) -> Self {
        match e {
            ExpandError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<DiversityError> for CliError {
    fn from(e: DiversityError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Shared argument types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    /// Infer from the file extension (.conll -> conll, otherwise json).
    #[default]
    Auto,
    Json,
    Conll,
}

impl FormatArg {
    fn resolve(self, path: &Path) -> CorpusFormat {
        match self {
            FormatArg::Json => CorpusFormat::CanonicalJson,
            FormatArg::Conll => CorpusFormat::ConllColumns,
            FormatArg::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some("conll") => CorpusFormat::ConllColumns,
                _ => CorpusFormat::CanonicalJson,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Document,
    #[default]
    Subtopic,
    Topic,
    Corpus,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Document => Level::Document,
            LevelArg::Subtopic => Level::Subtopic,
            LevelArg::Topic => Level::Topic,
            LevelArg::Corpus => Level::Corpus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationArg {
    #[default]
    Micro,
    Macro,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Self {
        match a {
            AggregationArg::Micro => Aggregation::Micro,
            AggregationArg::Macro => Aggregation::Macro,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKeyArg {
    #[default]
    Lemma,
    Surface,
}

impl From<HeadKeyArg> for HeadGrouping {
    fn from(h: HeadKeyArg) -> Self {
        match h {
            HeadKeyArg::Lemma => HeadGrouping::Lemma,
            HeadKeyArg::Surface => HeadGrouping::Surface,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupingArg {
    Document,
    Subtopic,
    Topic,
}

impl From<GroupingArg> for Grouping {
    fn from(g: GroupingArg) -> Self {
        match g {
            GroupingArg::Document => Grouping::Document,
            GroupingArg::Subtopic => Grouping::Subtopic,
            GroupingArg::Topic => Grouping::Topic,
        }
    }
}

/// Normalization flags shared by the analysis subcommands.
#[derive(Debug, Clone, Copy, Args)]
pub struct PolicyArgs {
    /// Compare surfaces and lemmas case-sensitively.
    #[arg(long)]
    pub case_sensitive: bool,
    /// Do not collapse whitespace runs when comparing surfaces.
    #[arg(long)]
    pub keep_whitespace: bool,
    /// Group chain mentions by head lemma or by head surface form.
    #[arg(long, value_enum, default_value_t = HeadKeyArg::Lemma)]
    pub head_key: HeadKeyArg,
}

impl PolicyArgs {
    pub fn to_policy(self) -> NormalizationPolicy {
        NormalizationPolicy {
            case_insensitive: !self.case_sensitive,
            whitespace_collapse: !self.keep_whitespace,
            head_grouping: self.head_key.into(),
        }
    }
}

fn load(path: &Path, format: FormatArg) -> Result<(Corpus, ValidationReport), CliError> {
    Ok(load_corpus_with_report(path, format.resolve(path))?)
}

fn print_warnings(report: &ValidationReport) {
    let count = report.warnings().count();
    if count > 0 {
        eprintln!("{count} warning(s):");
        for w in report.warnings().take(20) {
            eprintln!("  [{}] {}: {}", w.code, w.location, w.message);
        }
        if count > 20 {
            eprintln!("  ... and {} more", count - 20);
        }
    }
}

// ---------------------------------------------------------------------------
// validate / convert
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Corpus file to check.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    println!(
        "ok: {} ({} documents, {} chains, {} mentions)",
        corpus.name(),
        corpus.documents().len(),
        corpus.chains().len(),
        corpus.mentions().len()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Target format.
    #[arg(long, value_enum)]
    pub to: FormatArg,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Unit per CoNLL block when converting to the column format.
    #[arg(long, value_enum, default_value_t = GroupingArg::Document)]
    pub grouping: GroupingArg,
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    let bytes = match args.to {
        FormatArg::Conll => conll_key_string(&corpus, args.grouping.into()).into_bytes(),
        _ => corpus_to_json_string(&corpus).into_bytes(),
    };
    write_atomic(&args.output, &bytes)?;
    println!("wrote {}", args.output.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// stats / diversity / plotdata
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Compute the starred averages over non-singleton chains only.
    #[arg(long)]
    pub exclude_singletons: bool,
    /// Also run the head-lemma baseline at this level and report its CoNLL F1.
    #[arg(long, value_enum)]
    pub with_baseline: Option<LevelArg>,
    /// Write the summary as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

pub fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    let policy = args.policy.to_policy();
    let mut summary = summarize(&corpus, args.exclude_singletons, &policy)?;
    if let Some(level) = args.with_baseline {
        let options = BaselineOptions {
            level: level.into(),
            split_by_kind: false,
            exclude_singletons: args.exclude_singletons,
            aggregation: Aggregation::Micro,
        };
        let (_, scores) = run_baseline(&corpus, options, &policy)?;
        summary.lemma_baseline_conll_f1 = Some(scores.conll_f1);
    }
    if let Some(path) = &args.json {
        write_atomic(path, pretty_json(&summary).as_bytes())?;
    }
    print!(
        "{}",
        summary_table(corpus.name(), &summary, args.exclude_singletons)
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Drop singleton chains before reporting.
    #[arg(long)]
    pub exclude_singletons: bool,
    /// Per-chain CSV output path.
    #[arg(long)]
    pub csv: PathBuf,
    /// Optional summary JSON output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

fn diversity_rows(
    corpus: &Corpus,
    exclude_singletons: bool,
    policy: &NormalizationPolicy,
) -> Result<Vec<ChainDiversity>, CliError> {
    let all = chain_diversities(corpus, policy)?;
    Ok(all
        .into_iter()
        .filter(|d| !exclude_singletons || d.size > 1)
        .collect())
}

pub fn cmd_diversity(args: &DiversityArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    let policy = args.policy.to_policy();
    let rows = diversity_rows(&corpus, args.exclude_singletons, &policy)?;
    write_atomic(&args.csv, &diversity_csv(&rows))?;
    if let Some(path) = &args.json {
        let summary = summarize(&corpus, args.exclude_singletons, &policy)?;
        write_atomic(path, pretty_json(&summary).as_bytes())?;
    }
    println!("wrote {} chain rows to {}", rows.len(), args.csv.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum PlotY {
    Pd,
    UniqueLemmas,
    /// Both unique_lemmas and pd columns (covers size-vs-PD, size-vs-lemmas,
    /// and lemmas-vs-PD pairings in one file).
    #[default]
    All,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    /// One or more corpus files; rows carry each corpus's name.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    #[arg(long)]
    pub exclude_singletons: bool,
    #[arg(long, value_enum, default_value_t = PlotY::All)]
    pub y: PlotY,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

pub fn cmd_plotdata(args: &PlotdataArgs) -> Result<(), CliError> {
    let policy = args.policy.to_policy();
    let mut rows: Vec<(String, ChainDiversity)> = Vec::new();
    for path in &args.input {
        let (corpus, report) = load(path, args.format)?;
        print_warnings(&report);
        for d in diversity_rows(&corpus, args.exclude_singletons, &policy)? {
            rows.push((corpus.name().to_string(), d));
        }
    }
    let columns = match args.y {
        PlotY::Pd => PlotColumns::Pd,
        PlotY::UniqueLemmas => PlotColumns::UniqueLemmas,
        PlotY::All => PlotColumns::All,
    };
    write_atomic(&args.output, &plotdata_csv(&rows, columns))?;
    println!("wrote {} rows to {}", rows.len(), args.output.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// baseline / score
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Clustering granularity.
    #[arg(long, value_enum, default_value_t = LevelArg::Subtopic)]
    pub level: LevelArg,
    /// Drop gold singleton chains before clustering and scoring.
    #[arg(long)]
    pub exclude_singletons: bool,
    /// Never merge entity and event mentions, even on a shared head lemma.
    #[arg(long)]
    pub split_by_kind: bool,
    #[arg(long, value_enum, default_value_t = AggregationArg::Micro)]
    pub aggregate: AggregationArg,
    /// Write the predicted clustering as a CoNLL response file.
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// Write the ScoreReport as JSON (4 decimal places).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

fn response_conll(corpus: &Corpus, clustering: &ClusteringResult, exclude: bool) -> String {
    let working;
    let scored = if exclude {
        working = corefdiv::filter_singletons(corpus);
        &working
    } else {
        corpus
    };
    conll_string_with_partition(scored, Grouping::Document, &clustering.clusters)
}

fn print_scores(report: &ScoreReport) {
    let line = |name: &str, p: &corefdiv::scoring::Prf| {
        println!(
            "{name:<7} P={:.4}  R={:.4}  F1={:.4}",
            p.precision, p.recall, p.f1
        );
    };
    line("muc", &report.muc);
    line("b_cubed", &report.b_cubed);
    line("ceaf_e", &report.ceaf_e);
    println!("conll_f1 {:.4}", report.conll_f1);
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    let policy = args.policy.to_policy();
    let options = BaselineOptions {
        level: args.level.into(),
        split_by_kind: args.split_by_kind,
        exclude_singletons: args.exclude_singletons,
        aggregation: args.aggregate.into(),
    };
    let (clustering, scores) = run_baseline(&corpus, options, &policy)?;
    if let Some(path) = &args.response {
        let text = response_conll(&corpus, &clustering, args.exclude_singletons);
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = &args.json {
        write_atomic(path, score_report_json(&scores).as_bytes())?;
    }
    print_scores(&scores);
    Ok(())
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Gold chains in the CoNLL column format.
    #[arg(long)]
    pub key: PathBuf,
    /// Predicted clusters in the CoNLL column format.
    #[arg(long)]
    pub response: PathBuf,
    /// Write the ScoreReport as JSON (4 decimal places).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

type UniverseKey = (String, usize, usize, usize);

fn partition_of(corpus: &Corpus) -> Vec<Vec<UniverseKey>> {
    corpus
        .chains()
        .iter()
        .map(|c| {
            c.mention_ids
                .iter()
                .filter_map(|id| corpus.mention(id))
                .map(|m| {
                    (
                        m.document_id.clone(),
                        m.sentence_index,
                        m.span.start,
                        m.span.end,
                    )
                })
                .collect()
        })
        .collect()
}

pub fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let (key, _) = load(&args.key, FormatArg::Conll)?;
    let (response, _) = load(&args.response, FormatArg::Conll)?;
    let gold = partition_of(&key);
    let predicted = partition_of(&response);
    let report = score_report(&gold, &predicted)?;
    if let Some(path) = &args.json {
        write_atomic(path, score_report_json(&report).as_bytes())?;
    }
    print_scores(&report);
    Ok(())
}

// ---------------------------------------------------------------------------
// expand
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    /// Directory of `<document-id>.trees` files, one bracketed tree per line.
    #[arg(long)]
    pub parses: PathBuf,
    /// Expanded corpus output (canonical JSON).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Optional per-mention expansion log (CSV).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

pub fn cmd_expand(args: &ExpandArgs) -> Result<(), CliError> {
    let (corpus, report) = load(&args.input, args.format)?;
    print_warnings(&report);
    let forest = load_parses_dir(&args.parses, &corpus)?;
    let (expanded, log) = expand_corpus(&corpus, &forest, &ExpandTargets::default())?;
    write_atomic(&args.output, corpus_to_json_string(&expanded).as_bytes())?;
    if let Some(path) = &args.log {
        write_atomic(path, &expansion_log_csv(&log))?;
    }
    println!(
        "expanded {} of {} mentions ({} already maximal)",
        log.changed(),
        log.records.len(),
        log.records
            .iter()
            .filter(|r| r.outcome == corefdiv::span_expand::ExpansionOutcome::AlreadyMaximal)
            .count()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

/// Pipeline configuration; every field can come from `--config FILE` (JSON)
/// with command-line flags winning on conflict.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub format: FormatArg,
    pub level: LevelArg,
    pub exclude_singletons: bool,
    pub split_by_kind: bool,
    pub aggregation: AggregationArg,
    pub expand: bool,
    pub parses: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub case_insensitive: Option<bool>,
    pub whitespace_collapse: Option<bool>,
    pub head_key: HeadKeyArg,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// JSON file with a RunConfig; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exclude_singletons: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub split_by_kind: Option<bool>,
    #[arg(long, value_enum)]
    pub aggregate: Option<AggregationArg>,
    /// Run span expansion before the metrics (requires --parses).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub expand: Option<bool>,
    #[arg(long)]
    pub parses: Option<PathBuf>,
    /// Bundle output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub case_sensitive: bool,
    #[arg(long)]
    pub keep_whitespace: bool,
    #[arg(long, value_enum)]
    pub head_key: Option<HeadKeyArg>,
}

impl PipelineArgs {
    fn effective_config(&self) -> Result<RunConfig, CliError> {
        let mut config: RunConfig = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            config.input = Some(v.clone());
        }
        if let Some(v) = self.format {
            config.format = v;
        }
        if let Some(v) = self.level {
            config.level = v;
        }
        if let Some(v) = self.exclude_singletons {
            config.exclude_singletons = v;
        }
        if let Some(v) = self.split_by_kind {
            config.split_by_kind = v;
        }
        if let Some(v) = self.aggregate {
            config.aggregation = v;
        }
        if let Some(v) = self.expand {
            config.expand = v;
        }
        if let Some(v) = &self.parses {
            config.parses = Some(v.clone());
        }
        if let Some(v) = &self.out_dir {
            config.out_dir = Some(v.clone());
        }
        if self.case_sensitive {
            config.case_insensitive = Some(false);
        }
        if self.keep_whitespace {
            config.whitespace_collapse = Some(false);
        }
        if let Some(v) = self.head_key {
            config.head_key = v;
        }
        Ok(config)
    }
}

/// The computation-affecting part of the configuration; hashed into the
/// manifest. Output locations are deliberately left out.
#[derive(Serialize)]
struct HashedConfig<'a> {
    input: String,
    format: &'a FormatArg,
    level: &'a LevelArg,
    exclude_singletons: bool,
    split_by_kind: bool,
    aggregation: &'a AggregationArg,
    expand: bool,
    parses: Option<String>,
    case_insensitive: bool,
    whitespace_collapse: bool,
    head_key: &'a HeadKeyArg,
}

pub fn cmd_pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let config = args.effective_config()?;
    let input = config
        .input
        .clone()
        .ok_or_else(|| CliError::Invalid("pipeline requires --input (or a config file)".into()))?;
    let out_dir = config.out_dir.clone().ok_or_else(|| {
        CliError::Invalid("pipeline requires --out-dir (or a config file)".into())
    })?;
    if config.expand && config.parses.is_none() {
        return Err(CliError::Invalid(
            "expansion is enabled but no parses directory was given (--parses DIR)".into(),
        ));
    }
    let policy = NormalizationPolicy {
        case_insensitive: config.case_insensitive.unwrap_or(true),
        whitespace_collapse: config.whitespace_collapse.unwrap_or(true),
        head_grouping: config.head_key.into(),
    };

    // stage 1: load + validate
    let (original, report) = load(&input, config.format)?;
    print_warnings(&report);

    // stage 2: optional span expansion
    let mut expansion: Option<ExpansionLog> = None;
    let mut parse_files: Vec<PathBuf> = Vec::new();
    let working = if config.expand {
        let parses_dir = config.parses.as_ref().unwrap();
        let forest = load_parses_dir(parses_dir, &original)?;
        for doc in original.documents() {
            let path = parses_dir.join(format!("{}.trees", doc.document_id));
            if path.is_file() {
                parse_files.push(path);
            }
        }
        parse_files.sort();
        let (expanded, log) = expand_corpus(&original, &forest, &ExpandTargets::default())?;
        expansion = Some(log);
        expanded
    } else {
        original.clone()
    };

    // stage 3: diversity
    let chain_rows = diversity_rows(&working, config.exclude_singletons, &policy)?;
    let mut summary = summarize(&working, config.exclude_singletons, &policy)?;

    // stage 4: baseline + scoring
    let options = BaselineOptions {
        level: config.level.into(),
        split_by_kind: config.split_by_kind,
        exclude_singletons: config.exclude_singletons,
        aggregation: config.aggregation.into(),
    };
    let (clustering, scores) = run_baseline(&working, options, &policy)?;
    summary.lemma_baseline_conll_f1 = Some(scores.conll_f1);
    let response = response_conll(&working, &clustering, config.exclude_singletons);

    // stage 5: manifest
    let hashed = HashedConfig {
        input: input.display().to_string(),
        format: &config.format,
        level: &config.level,
        exclude_singletons: config.exclude_singletons,
        split_by_kind: config.split_by_kind,
        aggregation: &config.aggregation,
        expand: config.expand,
        parses: config.parses.as_ref().map(|p| p.display().to_string()),
        case_insensitive: policy.case_insensitive,
        whitespace_collapse: policy.whitespace_collapse,
        head_key: &config.head_key,
    };
    let mut inputs: Vec<InputDigest> = vec![manifest::digest_file(&input)?];
    for path in &parse_files {
        inputs.push(manifest::digest_file(path)?);
    }
    let manifest = manifest::manifest(manifest::config_hash(&hashed), inputs);

    // everything computed; write the bundle
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_atomic(
        &out_dir.join("summary.json"),
        pretty_json(&summary).as_bytes(),
    )?;
    write_atomic(&out_dir.join("chains.csv"), &diversity_csv(&chain_rows))?;
    write_atomic(&out_dir.join("response.conll"), response.as_bytes())?;
    write_atomic(
        &out_dir.join("scores.json"),
        score_report_json(&scores).as_bytes(),
    )?;
    let mut files = vec![
        "summary.json",
        "chains.csv",
        "response.conll",
        "scores.json",
    ];
    if let Some(log) = &expansion {
        write_atomic(&out_dir.join("expansion_log.csv"), &expansion_log_csv(log))?;
        // metrics on the pre-expansion corpus, labeled by file name
        let original_rows = diversity_rows(&original, config.exclude_singletons, &policy)?;
        let original_summary = summarize(&original, config.exclude_singletons, &policy)?;
        write_atomic(
            &out_dir.join("summary_original.json"),
            pretty_json(&original_summary).as_bytes(),
        )?;
        write_atomic(
            &out_dir.join("chains_original.csv"),
            &diversity_csv(&original_rows),
        )?;
        files.extend([
            "expansion_log.csv",
            "summary_original.json",
            "chains_original.csv",
        ]);
    }
    write_atomic(
        &out_dir.join("manifest.json"),
        pretty_json(&manifest).as_bytes(),
    )?;
    files.push("manifest.json");

    println!("wrote {} files to {}", files.len(), out_dir.display());
    print_scores(&scores);
    Ok(())
}
