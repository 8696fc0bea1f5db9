//! Command-line front end.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::backends::{HeadModel, TrainParams};
use crate::config::{ConfigError, Mode, RunConfig};
use crate::corpus::{IssueDocument, IssueLog, load_corpus};
use crate::eval::{
    self, AnnotatedSentence, ExtractionMode, LabeledDocument, Score, Split, evaluate_corpus, evaluate_extractor,
    gold_rationales, label_documents, read_annotation_set, sentence_examples, summarize_dataset,
};
use crate::features::FeatureMask;
use crate::miner::{self, MinedIssue, render_markdown};
use crate::par;

#[derive(Debug, Parser)]
#[command(name = "rationale-miner", version, about = "Mine design rationales from issue-tracker discussions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Corpus directory (overrides the config).
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Annotation file or directory of `*.jsonl` files.
    #[arg(long, global = true)]
    pub annotations: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 means one per processor.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Remote backend base URL.
    #[arg(long, global = true)]
    pub backend_url: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalise raw issue exports into the corpus directory.
    Ingest {
        /// Directory of raw export files.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the full pipeline and write rationale JSON and markdown.
    Mine(IssueFilter),
    /// Run sentence extraction only.
    Extract(IssueFilter),
    /// Run extraction and pairing; write relation graphs.
    Pair(IssueFilter),
    /// Fit the models of the configured mode from annotations.
    Train(SplitArg),
    /// Mine annotated issues and score them against the annotations.
    Eval(SplitArg),
    /// Hold out one issue per project.
    Split,
    /// Retrain with each feature dimension masked and compare.
    Ablate {
        #[command(flatten)]
        split: SplitArg,
        /// Dimensions to mask; all five when omitted.
        #[arg(long = "dimension")]
        dimensions: Vec<String>,
    },
    /// Per-project label counts of the annotations.
    Stats {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render mined rationale files for downstream use.
    Export {
        /// Directory containing `*.rationales.json` files.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Markdown)]
        format: ExportFormat,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct IssueFilter {
    /// Restrict to these issue keys.
    #[arg(long = "issue")]
    pub issues: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SplitArg {
    /// Split file from `split`; train on its train ids, evaluate on its test ids.
    #[arg(long)]
    pub split: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Markdown,
    Json,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Failed(String),
    /// Some issues failed; their errors were already reported.
    Partial(usize),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_config(g: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &g.corpus {
        cfg.corpus_dir = Some(v.clone());
    }
    if let Some(v) = &g.output {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = g.mode {
        cfg.mode = v;
    }
    if let Some(v) = &g.annotations {
        cfg.annotations = Some(v.clone());
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.workers {
        cfg.workers = v;
    }
    if let Some(v) = &g.backend_url {
        cfg.backend.get_or_insert_with(Default::default).base_url = Some(v.clone());
    }
    cfg.apply_env();
    cfg.validate()?;
    Ok(cfg)
}

/// Parses arguments, runs the command, and maps the outcome to an exit code:
/// 0 success, 1 failure, 2 configuration error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = load_config(&cli.global).and_then(|cfg| par::with_workers(cfg.workers, || dispatch(&cfg, &cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Partial(n)) => {
            eprintln!("{n} issue(s) failed");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cfg: &RunConfig, command: &Command) -> CliResult {
    match command {
        Command::Ingest { input } => ingest(cfg, input),
        Command::Mine(f) => per_issue(cfg, f, Phase::Mine),
        Command::Extract(f) => per_issue(cfg, f, Phase::Extract),
        Command::Pair(f) => per_issue(cfg, f, Phase::Pair),
        Command::Train(s) => train(cfg, s),
        Command::Eval(s) => evaluate(cfg, s),
        Command::Split => split(cfg),
        Command::Ablate { split, dimensions } => ablate(cfg, split, dimensions),
        Command::Stats { format } => stats(cfg, *format),
        Command::Export { input, format, out } => export(input, *format, out.as_deref()),
    }
}

fn write(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn ingest(cfg: &RunConfig, input: &Path) -> CliResult {
    let out = cfg.corpus_dir()?;
    if out.canonicalize().ok().is_some_and(|o| input.canonicalize().ok() == Some(o)) {
        return Err(CliError::Config(ConfigError::Invalid {
            field: "corpus_dir",
            reason: "must differ from the ingest input directory".into(),
        }));
    }
    let issues = load_corpus(input).map_err(fail)?;
    for issue in &issues {
        write(&out.join(format!("{}.json", issue.key)), &issue.to_export_json())?;
    }
    println!("ingested {} issue(s) into {}", issues.len(), out.display());
    Ok(())
}

fn corpus(cfg: &RunConfig, keys: &[String]) -> CliResult<Vec<IssueLog>> {
    let issues = load_corpus(cfg.corpus_dir()?).map_err(fail)?;
    if keys.is_empty() {
        return Ok(issues);
    }
    let missing: Vec<&String> = keys.iter().filter(|k| !issues.iter().any(|i| &i.key == *k)).collect();
    if !missing.is_empty() {
        return Err(fail(format!("issue(s) not in corpus: {missing:?}")));
    }
    Ok(issues.into_iter().filter(|i| keys.contains(&i.key)).collect())
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Mine,
    Extract,
    Pair,
}

#[derive(Serialize)]
struct ScoredSentence<'a> {
    id: &'a str,
    score: f64,
    design_related: bool,
}

fn per_issue(cfg: &RunConfig, filter: &IssueFilter, phase: Phase) -> CliResult {
    let issues = corpus(cfg, &filter.issues)?;
    let miner = cfg.miner().map_err(fail)?;
    let out = &cfg.output_dir;
    let results = par::map(&issues, |issue| -> Result<Vec<(PathBuf, String)>, String> {
        let doc = miner.document(issue);
        let key = doc.key();
        let err = |e: miner::MinerError| e.to_string();
        match phase {
            Phase::Extract => {
                let scored = miner::score_sentences(&doc, &miner.sentences, &miner.extractor).map_err(err)?;
                let rows: Vec<ScoredSentence> = scored
                    .iter()
                    .map(|(id, d)| ScoredSentence { id, score: d.score, design_related: d.design_related })
                    .collect();
                Ok(vec![(out.join(format!("{key}.dsea.json")), to_json(&rows))])
            }
            Phase::Pair => {
                let related = miner::run_dsea(&doc, &miner.sentences, &miner.extractor).map_err(err)?;
                let graph = miner::run_dspa(&related, &doc, &miner.pairs).map_err(err)?;
                Ok(vec![(out.join(format!("{key}.graph.json")), to_json(&graph))])
            }
            Phase::Mine => {
                let mined = miner.mine_document(&doc).map_err(err)?;
                Ok(vec![
                    (out.join(format!("{key}.rationales.json")), mined.to_json()),
                    (out.join(format!("{key}.rationales.md")), mined.to_markdown()),
                ])
            }
        }
    });
    let mut failures = 0;
    for (issue, result) in issues.iter().zip(results) {
        let error_file = out.join(format!("{}.error.txt", issue.key));
        match result {
            Ok(files) => {
                for (path, contents) in files {
                    write(&path, &contents)?;
                }
                if error_file.exists() {
                    let _ = std::fs::remove_file(&error_file);
                }
            }
            Err(msg) => {
                failures += 1;
                eprintln!("{}: {msg}", issue.key);
                write(&error_file, &format!("{msg}\n"))?;
            }
        }
    }
    if failures > 0 { Err(CliError::Partial(failures)) } else { Ok(()) }
}

/// Annotated documents, split into (train, test) by the optional split file.
fn labeled(cfg: &RunConfig, split: &SplitArg) -> CliResult<(Vec<AnnotatedSentence>, Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    let anns = read_annotation_set(cfg.annotations()?).map_err(fail)?;
    eval::validate_annotations(&anns).map_err(fail)?;
    let issues = load_corpus(cfg.corpus_dir()?).map_err(fail)?;
    let docs: Vec<IssueDocument> = issues.iter().map(|i| IssueDocument::build(i, &cfg.clean, &Default::default())).collect();
    let docs = label_documents(docs, &anns).map_err(fail)?;
    match &split.split {
        None => Ok((anns, docs.clone(), docs)),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
            let s: Split = serde_json::from_str(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
            let (train, test): (Vec<_>, Vec<_>) = docs.into_iter().filter(|d| s.train.iter().chain(&s.test).any(|k| k == d.doc.key())).partition(|d| s.train.iter().any(|k| k == d.doc.key()));
            Ok((anns, train, test))
        }
    }
}

fn extraction_mode(cfg: &RunConfig) -> CliResult<ExtractionMode> {
    Ok(match cfg.mode {
        Mode::Baseline => ExtractionMode::Baseline,
        Mode::PromptHead => ExtractionMode::PromptHead { backend: cfg.build_backend().map_err(fail)?, budget: cfg.dsea_budget()? },
    })
}

fn train(cfg: &RunConfig, split: &SplitArg) -> CliResult {
    let (_, train_docs, _) = labeled(cfg, split)?;
    let extractor = cfg.extractor().map_err(fail)?;
    let params = TrainParams::default();
    let out = &cfg.output_dir;
    match cfg.mode {
        Mode::Baseline => {
            let (dsea, dspa) = eval::train_baselines(&train_docs, &extractor, params, cfg.seed).map_err(fail)?;
            write(&out.join("dsea-baseline.json"), &to_json(&dsea))?;
            if let Some(dspa) = dspa {
                write(&out.join("dspa-baseline.json"), &to_json(&dspa))?;
            }
        }
        Mode::PromptHead => {
            let mode = extraction_mode(cfg)?;
            let examples = sentence_examples(&train_docs);
            let classifier =
                eval::train_extractor(&mode, &examples, &extractor, FeatureMask::none(), params, cfg.seed).map_err(fail)?;
            let crate::backends::SentenceClassifier::PromptHead { head, .. } = classifier else {
                unreachable!("prompt-head mode trains a prompt head")
            };
            write(&out.join("dsea-head.json"), &to_json::<HeadModel>(&head))?;
        }
    }
    println!("trained on {} issue(s); models in {}", train_docs.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct FullReport {
    extraction: Score,
    #[serde(flatten)]
    pipeline: eval::EvalReport,
}

fn evaluate(cfg: &RunConfig, split: &SplitArg) -> CliResult {
    let (anns, _, test_docs) = labeled(cfg, split)?;
    let miner = cfg.miner().map_err(fail)?;
    let test_keys: BTreeSet<&str> = test_docs.iter().map(|d| d.doc.key()).collect();
    let mined = par::map(&test_docs, |d| miner.mine_document(&d.doc));
    let mut pred = BTreeMap::new();
    for (d, m) in test_docs.iter().zip(mined) {
        pred.insert(d.doc.key().to_owned(), m.map_err(|e| fail(format!("{}: {e}", d.doc.key())))?.to_rationales());
    }
    let gold: BTreeMap<_, _> = gold_rationales(&anns).into_iter().filter(|(k, _)| test_keys.contains(k.as_str())).collect();
    let pipeline = evaluate_corpus(&pred, &gold);
    let extraction = evaluate_extractor(&miner.sentences, &sentence_examples(&test_docs), &miner.extractor).map_err(fail)?;
    let report = FullReport { extraction, pipeline };
    write(&cfg.output_dir.join("eval-report.json"), &to_json(&report))?;
    print!("{}", pipeline.to_text());
    print!("{}", eval::score_table(&[("extraction", &extraction)]));
    Ok(())
}

fn split(cfg: &RunConfig) -> CliResult {
    let keys: Vec<String> = match (&cfg.corpus_dir, &cfg.annotations) {
        (Some(dir), _) => load_corpus(dir).map_err(fail)?.into_iter().map(|i| i.key).collect(),
        (None, Some(path)) => read_annotation_set(path).map_err(fail)?.into_iter().map(|a| a.issue).collect(),
        (None, None) => {
            return Err(CliError::Config(ConfigError::Missing { field: "corpus_dir", reason: "split needs a corpus or annotations".into() }));
        }
    };
    let split = eval::split_dataset(&eval::group_by_project(&keys), cfg.seed).map_err(fail)?;
    write(&cfg.output_dir.join("split.json"), &to_json(&split))?;
    println!("train {} / test {}: {}", split.train.len(), split.test.len(), split.test.join(", "));
    Ok(())
}

fn ablate(cfg: &RunConfig, split: &SplitArg, dimensions: &[String]) -> CliResult {
    let (_, train_docs, test_docs) = labeled(cfg, split)?;
    let extractor = cfg.extractor().map_err(fail)?;
    let mode = extraction_mode(cfg)?;
    let (train, test) = (sentence_examples(&train_docs), sentence_examples(&test_docs));
    let params = TrainParams::default();
    for d in dimensions {
        d.parse::<crate::features::FeatureDimension>().map_err(|e| {
            CliError::Config(ConfigError::Invalid { field: "dimension", reason: e.to_string() })
        })?;
    }
    let mut report = eval::ablate_all(&mode, &train, &test, &extractor, params, cfg.seed).map_err(fail)?;
    if !dimensions.is_empty() {
        report.ablations.retain(|r| dimensions.iter().any(|d| d.eq_ignore_ascii_case(r.dimension.name())));
    }
    write(&cfg.output_dir.join("ablation.json"), &report.to_json())?;
    print!("{}", report.to_text());
    Ok(())
}

fn stats(cfg: &RunConfig, format: Format) -> CliResult {
    let path = match (&cfg.annotations, &cfg.corpus_dir) {
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => {
            return Err(CliError::Config(ConfigError::Missing { field: "annotations", reason: "stats needs annotations".into() }));
        }
    };
    let summary = summarize_dataset(&read_annotation_set(path).map_err(fail)?);
    match format {
        Format::Text => print!("{}", summary.to_text()),
        Format::Json => print!("{}", to_json(&summary)),
    }
    Ok(())
}

fn export(input: &Path, format: ExportFormat, out: Option<&Path>) -> CliResult {
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(|e| fail(format!("{}: {e}", input.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".rationales.json")))
        .collect();
    files.sort();
    let issues = files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| fail(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<MinedIssue>(&text).map_err(|e| fail(format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rendered = match format {
        ExportFormat::Markdown => render_markdown(&issues),
        ExportFormat::Json => to_json(&issues),
    };
    match out {
        Some(path) => write(path, &rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
