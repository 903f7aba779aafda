//! Command-line front end wiring the disambiguation modules into
//! reproducible runs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
//! Every run is a pure function of its input files, flags, and seed at
//! worker count 1. Relative input paths are also tried against the
//! `NAMEDIS_DATA_DIR` directory when they do not exist locally.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use namedis::corpus::{
    self, AuthorOrNil, NameBlockSet, PaperId, PaperRecord, PaperRef, PaperStore, RndSplit,
    SndEvalBlock,
};
use namedis::embed::{self, EmbedConfig, EmbeddingTable, FieldSet};
use namedis::error::{Error, ErrorClass};
use namedis::eval::{self, Prf};
use namedis::ind;
use namedis::relgraph::{self, RelationSet, WalkConfig};
use namedis::rnd::{
    self, FamilyIdf, FeatureExtractor, FeatureMode, KernelConfig, LogisticScorer, ScorerConfig,
};
use namedis::snd::{self, Modality, SndConfig, SndPipelineConfig};
use namedis::synth::{self, SynthConfig};
use namedis::textnorm::{normalize_name, NameKey, Stoplist};

#[derive(Parser)]
#[command(name = "namedis", version, about = "Academic name disambiguation toolkit")]
struct Cli {
    /// Worker threads for parallel sections (1 keeps every artifact
    /// byte-reproducible; all current outputs are worker-count invariant).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// JSON config file with defaults for any override flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate dataset files and report dangling references.
    LoadCheck(LoadCheckArgs),
    /// Generate a synthetic ground-truth corpus.
    Synth(SynthArgs),
    /// Split a dataset for the clustering or assignment task.
    Split(SplitArgs),
    /// Train token embeddings from a paper store.
    Embed(EmbedArgs),
    /// Cluster name blocks from scratch.
    Snd(SndArgs),
    /// Train the assignment scorer (optionally calibrating the NIL threshold).
    RndTrain(RndTrainArgs),
    /// Assign unassigned papers to candidate authors or NIL.
    RndAssign(RndAssignArgs),
    /// Score author profiles for incorrectly assigned papers.
    Ind(IndArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Sweep field/relation/modality/feature grids and tabulate metrics.
    Ablate(AblateArgs),
}

/// Optional override file; flags win over it, it wins over defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    dim: Option<usize>,
    window: Option<usize>,
    negative: Option<usize>,
    min_count: Option<usize>,
    epochs: Option<usize>,
    learning_rate: Option<f64>,
    db_eps: Option<f64>,
    db_min: Option<usize>,
    post_threshold: Option<f64>,
    modality: Option<String>,
    fields: Option<String>,
    relations: Option<String>,
    walk_length: Option<usize>,
    walks_per_node: Option<usize>,
    covenue_prob: Option<f64>,
    negatives: Option<usize>,
    nil_threshold: Option<f64>,
    feature_mode: Option<String>,
    stoplist: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, Error> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.display().to_string(),
            source: e,
        })
    }
}

#[derive(Args, Clone)]
struct EmbedOverrides {
    /// Embedding dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Context window size.
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per positive pair.
    #[arg(long)]
    negative: Option<usize>,
    /// Minimum token count to enter the vocabulary.
    #[arg(long)]
    min_count: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Initial learning rate (linear decay).
    #[arg(long)]
    learning_rate: Option<f64>,
}

impl EmbedOverrides {
    fn resolve(&self, file: &FileConfig, seed: u64) -> EmbedConfig {
        let d = EmbedConfig::default();
        EmbedConfig {
            dim: self.dim.or(file.dim).unwrap_or(d.dim),
            window: self.window.or(file.window).unwrap_or(d.window),
            negative: self.negative.or(file.negative).unwrap_or(d.negative),
            min_count: self.min_count.or(file.min_count).unwrap_or(d.min_count),
            epochs: self.epochs.or(file.epochs).unwrap_or(d.epochs),
            learning_rate: self
                .learning_rate
                .or(file.learning_rate)
                .unwrap_or(d.learning_rate),
            seed,
        }
    }
}

#[derive(Args, Clone)]
struct PipelineOverrides {
    /// Density radius of the clustering step.
    #[arg(long)]
    db_eps: Option<f64>,
    /// Minimum neighborhood size (point included) for a core point.
    #[arg(long)]
    db_min: Option<usize>,
    /// Post-match acceptance threshold.
    #[arg(long)]
    post_threshold: Option<f64>,
    /// Similarity sources: semantic, relational, or both.
    #[arg(long)]
    modality: Option<String>,
    /// Comma list of embedding fields (title,abstract,keywords,venue,year,coauthors,org).
    #[arg(long)]
    fields: Option<String>,
    /// Comma list of graph relations (coauthor,coorg,covenue).
    #[arg(long)]
    relations: Option<String>,
    /// Nodes per random walk.
    #[arg(long)]
    walk_length: Option<usize>,
    /// Walks started from each non-isolated node.
    #[arg(long)]
    walks_per_node: Option<usize>,
    /// Probability of restricting a step to venue edges.
    #[arg(long)]
    covenue_prob: Option<f64>,
}

impl PipelineOverrides {
    fn resolve(
        &self,
        file: &FileConfig,
        rel_embed: EmbedConfig,
        seed: u64,
    ) -> Result<SndPipelineConfig, Error> {
        let d = SndPipelineConfig::default();
        let modality = match self.modality.as_deref().or(file.modality.as_deref()) {
            Some(m) => Modality::parse(m)?,
            None => d.snd.modality,
        };
        let fields = match self.fields.as_deref().or(file.fields.as_deref()) {
            Some(f) => FieldSet::parse(f)?,
            None => d.fields,
        };
        let relations = match self.relations.as_deref().or(file.relations.as_deref()) {
            Some(r) => RelationSet::parse(r)?,
            None => d.relations,
        };
        Ok(SndPipelineConfig {
            snd: SndConfig {
                db_eps: self.db_eps.or(file.db_eps).unwrap_or(d.snd.db_eps),
                db_min: self.db_min.or(file.db_min).unwrap_or(d.snd.db_min),
                post_threshold: self
                    .post_threshold
                    .or(file.post_threshold)
                    .unwrap_or(d.snd.post_threshold),
                modality,
                ..d.snd
            },
            fields,
            relations,
            walk: WalkConfig {
                walk_length: self.walk_length.or(file.walk_length).unwrap_or(d.walk.walk_length),
                walks_per_node: self
                    .walks_per_node
                    .or(file.walks_per_node)
                    .unwrap_or(d.walk.walks_per_node),
                covenue_prob: self
                    .covenue_prob
                    .or(file.covenue_prob)
                    .unwrap_or(d.walk.covenue_prob),
                seed,
            },
            rel_embed,
        })
    }
}

#[derive(Args)]
struct LoadCheckArgs {
    /// Two-level name → author → papers file.
    #[arg(long)]
    assignments: Option<PathBuf>,
    /// Paper-id → record file.
    #[arg(long)]
    papers: Option<PathBuf>,
    /// One-level profile file with normal_data/outliers.
    #[arg(long)]
    ind: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for assignments.json, papers.json, eval.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    names: usize,
    #[arg(long, default_value_t = 4)]
    authors: usize,
    #[arg(long, default_value_t = 8)]
    papers: usize,
    #[arg(long, default_value_t = 12)]
    vocab: usize,
    #[arg(long, default_value_t = 5)]
    pool: usize,
    /// Probability a paper borrows a token and a coauthor from another author.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SplitArgs {
    /// Which task layout to produce: snd or rnd.
    #[arg(long)]
    task: String,
    #[arg(long)]
    assignments: PathBuf,
    /// Paper store (needed for the time-ordered rnd split).
    #[arg(long)]
    papers: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Train,valid,test ratios for the snd split.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    ratios: String,
    /// Held-out share of each author's latest papers for the rnd split.
    #[arg(long, default_value_t = 0.2)]
    ratio: f64,
    /// Share of each name's authors held out wholly as NIL cases.
    #[arg(long, default_value_t = 0.1)]
    nil_fraction: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    papers: PathBuf,
    /// Output text table.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// One-token-per-line stoplist file (built-in list otherwise).
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[command(flatten)]
    embed: EmbedOverrides,
}

#[derive(Args)]
struct SndArgs {
    /// Flat name → papers evaluation file.
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long)]
    papers: PathBuf,
    /// Pretrained embedding table (text format).
    #[arg(long)]
    embeddings: PathBuf,
    /// Output clusters file: name → list of clusters.
    #[arg(long)]
    out: PathBuf,
    /// Two-level truth file; when given, the macro pairwise F1 is printed.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Dump every generated walk as one space-separated line.
    #[arg(long)]
    dump_walks: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineOverrides,
    #[command(flatten)]
    embed: EmbedOverrides,
}

#[derive(Args)]
struct RndTrainArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    unassigned: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Negative candidates sampled per paper.
    #[arg(long)]
    negatives: Option<usize>,
    /// Feature blocks: full (118) or adhoc (36).
    #[arg(long)]
    feature_mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[arg(long)]
    fields: Option<String>,
    /// Validation triple for NIL-threshold calibration.
    #[arg(long)]
    valid_profiles: Option<PathBuf>,
    #[arg(long)]
    valid_unassigned: Option<PathBuf>,
    #[arg(long)]
    valid_truth: Option<PathBuf>,
    /// Dump the labeled training matrix (feature columns + 0/1 label).
    #[arg(long)]
    dump_features: Option<PathBuf>,
}

#[derive(Args)]
struct RndAssignArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    unassigned: PathBuf,
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Output assignment list.
    #[arg(long)]
    out: PathBuf,
    /// Truth file; when given, the weighted F1 is printed.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Override the model's NIL threshold.
    #[arg(long)]
    nil_threshold: Option<f64>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[arg(long)]
    fields: Option<String>,
}

#[derive(Args)]
struct IndArgs {
    /// One-level profile file with normal_data/outliers.
    #[arg(long)]
    ind: PathBuf,
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also build per-author relational embeddings.
    #[arg(long)]
    relational: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[arg(long)]
    fields: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Which protocol: snd, rnd, or ind.
    #[arg(long)]
    task: String,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Report file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    /// Which task to sweep: snd or rnd.
    #[arg(long)]
    task: String,
    /// Which grid: modality, relations, fields (snd) or features (rnd).
    #[arg(long)]
    grid: String,
    #[arg(long)]
    assignments: PathBuf,
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Held-out ratio for the rnd sweep.
    #[arg(long, default_value_t = 0.2)]
    ratio: f64,
    #[arg(long, default_value_t = 0.1)]
    nil_fraction: f64,
}

fn resolve_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_owned();
    }
    if let Ok(dir) = std::env::var("NAMEDIS_DATA_DIR") {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_owned()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    let text = serde_json::to_string_pretty(value).expect("serializable artifact");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}

fn load_stoplist(path: Option<&Path>, file: &FileConfig) -> Result<Stoplist, Error> {
    match path.or(file.stoplist.as_deref()) {
        Some(p) => Stoplist::from_file(resolve_path(p).to_str().unwrap_or_default()),
        None => Ok(Stoplist::default()),
    }
}

fn seed_of(flag: Option<u64>, file: &FileConfig) -> u64 {
    flag.or(file.seed).unwrap_or(0)
}

fn load_truth_map(path: &Path) -> Result<BTreeMap<PaperRef, AuthorOrNil>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

fn load_unassigned(path: &Path) -> Result<Vec<PaperRef>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

/// Serialized model artifact: the scorer plus its decision threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    scorer: LogisticScorer,
    nil_threshold: f64,
    calibrated: bool,
}

#[derive(Serialize)]
struct SndReportRow {
    name: String,
    papers: usize,
    #[serde(rename = "Pairwise-Precision")]
    precision: f64,
    #[serde(rename = "Pairwise-Recall")]
    recall: f64,
    #[serde(rename = "Pairwise-F1")]
    f1: f64,
}

#[derive(Serialize)]
struct SndReport {
    per_name: Vec<SndReportRow>,
    #[serde(rename = "Macro-Pairwise-Precision")]
    precision: f64,
    #[serde(rename = "Macro-Pairwise-Recall")]
    recall: f64,
    #[serde(rename = "Macro-Pairwise-F1")]
    f1: f64,
}

#[derive(Serialize)]
struct RndReportRow {
    author: String,
    truth_papers: usize,
    weight: f64,
    #[serde(rename = "Precision")]
    precision: f64,
    #[serde(rename = "Recall")]
    recall: f64,
    #[serde(rename = "F1")]
    f1: f64,
}

#[derive(Serialize)]
struct RndReport {
    per_author: Vec<RndReportRow>,
    #[serde(rename = "Weighted-Precision")]
    precision: f64,
    #[serde(rename = "Weighted-Recall")]
    recall: f64,
    #[serde(rename = "Weighted-F1")]
    f1: f64,
}

#[derive(Serialize)]
struct IndReportRow {
    author: String,
    papers: usize,
    outliers: usize,
    auc: f64,
    average_precision: f64,
}

#[derive(Serialize)]
struct IndEvalReport {
    per_author: Vec<IndReportRow>,
    skipped_single_class: Vec<String>,
    #[serde(rename = "Mean-AUC")]
    mean_auc: f64,
    #[serde(rename = "MAP")]
    mean_average_precision: f64,
}

#[derive(Serialize)]
struct AssignmentRow {
    paper_ref: PaperRef,
    author: AuthorOrNil,
    score: f64,
}

fn snd_report(per_name: Vec<(String, usize, Prf)>) -> SndReport {
    let n = per_name.len().max(1) as f64;
    let precision = per_name.iter().map(|(_, _, p)| p.precision).sum::<f64>() / n;
    let recall = per_name.iter().map(|(_, _, p)| p.recall).sum::<f64>() / n;
    let f1 = per_name.iter().map(|(_, _, p)| p.f1).sum::<f64>() / n;
    SndReport {
        per_name: per_name
            .into_iter()
            .map(|(name, papers, p)| SndReportRow {
                name,
                papers,
                precision: p.precision,
                recall: p.recall,
                f1: p.f1,
            })
            .collect(),
        precision,
        recall,
        f1,
    }
}

fn cmd_load_check(args: &LoadCheckArgs) -> Result<(), Error> {
    let mut checked = false;
    let store = match &args.papers {
        Some(path) => {
            let store = corpus::load_papers(&resolve_path(path))?;
            println!("papers: {} records ok", store.len());
            checked = true;
            Some(store)
        }
        None => None,
    };
    if let Some(path) = &args.assignments {
        let mut blocks = corpus::load_assignments(&resolve_path(path))?;
        let authors: usize = blocks.iter().map(|(_, a)| a.len()).sum();
        println!("assignments: {} names, {authors} authors ok", blocks.len());
        if let Some(store) = &store {
            let reports = blocks.drop_dangling(store);
            for line in &reports {
                eprintln!("warning: {line}");
            }
            println!("dangling references: {}", reports.len());
        }
        checked = true;
    }
    if let Some(path) = &args.ind {
        let records = corpus::load_ind(&resolve_path(path))?;
        println!("profiles: {} authors ok", records.len());
        if let Some(store) = &store {
            let mut dangling = 0usize;
            for r in &records {
                for p in r.normal.iter().chain(&r.outliers) {
                    if !store.contains(p) {
                        eprintln!("warning: dangling paper {p} under {}", r.author_id);
                        dangling += 1;
                    }
                }
            }
            println!("dangling references: {dangling}");
        }
        checked = true;
    }
    if !checked {
        return Err(Error::InvalidConfig(
            "nothing to check; pass --assignments, --papers, or --ind".into(),
        ));
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs, file: &FileConfig) -> Result<(), Error> {
    let config = SynthConfig {
        names: args.names,
        authors_per_name: args.authors,
        papers_per_author: args.papers,
        vocab_per_author: args.vocab,
        coauthor_pool_per_author: args.pool,
        cross_noise: args.noise,
        seed: seed_of(args.seed, file),
    };
    let data = synth::generate(&config)?;
    write_json(&args.out.join("assignments.json"), &data.blocks)?;
    write_json(&args.out.join("papers.json"), &data.store)?;
    write_json(&args.out.join("eval.json"), &data.blocks.flatten())?;
    println!(
        "synth: {} names, {} papers -> {}",
        data.blocks.len(),
        data.store.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_ratios(spec: &str) -> Result<(f64, f64, f64), Error> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("bad ratios {spec:?}; expected three numbers")))?;
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "bad ratios {spec:?}; expected train,valid,test"
        )));
    }
    Ok((parts[0], parts[1], parts[2]))
}

fn cmd_split(args: &SplitArgs, file: &FileConfig) -> Result<(), Error> {
    if !matches!(args.task.as_str(), "snd" | "rnd") {
        return Err(Error::InvalidConfig(format!(
            "unknown split task {:?}; expected snd or rnd",
            args.task
        )));
    }
    let ratios = parse_ratios(&args.ratios)?;
    let blocks = corpus::load_assignments(&resolve_path(&args.assignments))?;
    let seed = seed_of(args.seed, file);
    match args.task.as_str() {
        "snd" => {
            let split = corpus::split_snd(&blocks, ratios, seed)?;
            write_json(&args.out.join("train.json"), &split.train)?;
            write_json(&args.out.join("valid.json"), &split.valid.papers)?;
            write_json(&args.out.join("valid_truth.json"), &split.valid.truth)?;
            write_json(&args.out.join("test.json"), &split.test.papers)?;
            write_json(&args.out.join("test_truth.json"), &split.test.truth)?;
            println!(
                "snd split: {} train / {} valid / {} test names -> {}",
                split.train.len(),
                split.valid.truth.len(),
                split.test.truth.len(),
                args.out.display()
            );
        }
        "rnd" => {
            let papers_path = args.papers.as_ref().ok_or_else(|| {
                Error::InvalidConfig("--papers is required for the rnd split".into())
            })?;
            let store = corpus::load_papers(&resolve_path(papers_path))?;
            let (split, warnings) =
                corpus::split_rnd(&blocks, &store, args.ratio, args.nil_fraction, seed)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            write_json(&args.out.join("profiles.json"), &split.profiles)?;
            write_json(&args.out.join("unassigned.json"), &split.unassigned)?;
            write_json(&args.out.join("truth.json"), &split.truth)?;
            let nil = split.truth.values().filter(|t| t.is_nil()).count();
            println!(
                "rnd split: {} unassigned papers ({nil} NIL) -> {}",
                split.unassigned.len(),
                args.out.display()
            );
        }
        _ => unreachable!("task validated above"),
    }
    Ok(())
}

fn cmd_embed(args: &EmbedArgs, file: &FileConfig) -> Result<(), Error> {
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let config = args.embed.resolve(file, seed_of(args.seed, file));
    let sequences = embed::train_sequences(store.iter().map(|(_, p)| p), &stoplist);
    let table = embed::train_skipgram(&sequences, &config)?;
    table.save(&args.out)?;
    println!(
        "embeddings: {} tokens x {} dims -> {}",
        table.len(),
        table.dim(),
        args.out.display()
    );
    Ok(())
}

fn dump_walks(
    path: &Path,
    blocks: &SndEvalBlock,
    store: &PaperStore,
    config: &SndPipelineConfig,
    stoplist: &Stoplist,
) -> Result<(), Error> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path.display().to_string(), e);
    for (name, ids) in blocks.iter() {
        let records: Vec<&PaperRecord> = ids.iter().filter_map(|id| store.get(id)).collect();
        let graph = relgraph::build_graph(&records, name, &config.relations, stoplist)?;
        let corpus = relgraph::random_walks(&graph, &config.walk)?;
        for walk in &corpus.walks {
            writeln!(w, "{}", walk.join(" ")).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

fn clusters_per_name(
    blocks: &SndEvalBlock,
    store: &PaperStore,
    table: &EmbeddingTable,
    config: &SndPipelineConfig,
    stoplist: &Stoplist,
) -> Result<BTreeMap<String, Vec<Vec<PaperId>>>, Error> {
    let mut out = BTreeMap::new();
    for (name, ids) in blocks.iter() {
        let clustering = snd::snd_pipeline(name, ids, store, table, config, stoplist)?;
        out.insert(name.to_string(), clustering.to_clusters());
    }
    Ok(out)
}

fn truth_clusters(truth: &NameBlockSet) -> BTreeMap<String, Vec<Vec<PaperId>>> {
    truth
        .iter()
        .map(|(name, authors)| {
            (
                name.to_string(),
                authors.values().cloned().collect::<Vec<_>>(),
            )
        })
        .collect()
}

fn score_clusters(
    pred: &BTreeMap<String, Vec<Vec<PaperId>>>,
    truth: &BTreeMap<String, Vec<Vec<PaperId>>>,
) -> Result<SndReport, Error> {
    let mut rows = Vec::new();
    for (name, truth_clusters) in truth {
        let Some(pred_clusters) = pred.get(name) else {
            return Err(Error::UniverseMismatch(format!(
                "prediction is missing name {name}"
            )));
        };
        let prf = eval::pairwise_prf(pred_clusters, truth_clusters)?;
        let papers = truth_clusters.iter().map(Vec::len).sum();
        rows.push((name.clone(), papers, prf));
    }
    Ok(snd_report(rows))
}

fn cmd_snd(args: &SndArgs, file: &FileConfig) -> Result<(), Error> {
    let blocks = corpus::load_snd_eval(&resolve_path(&args.blocks))?;
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let table = EmbeddingTable::load(&resolve_path(&args.embeddings))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let seed = seed_of(args.seed, file);
    let rel_embed = args.embed.resolve(file, seed);
    let config = args.pipeline.resolve(file, rel_embed, seed)?;
    if let Some(path) = &args.dump_walks {
        dump_walks(path, &blocks, &store, &config, &stoplist)?;
    }
    let pred = clusters_per_name(&blocks, &store, &table, &config, &stoplist)?;
    write_json(&args.out, &pred)?;
    match &args.truth {
        Some(truth_path) => {
            let truth = corpus::load_assignments(&resolve_path(truth_path))?;
            let report = score_clusters(&pred, &truth_clusters(&truth))?;
            println!("macro-pairwise-f1 {:.4}", report.f1);
        }
        None => {
            let clusters: usize = pred.values().map(Vec::len).sum();
            println!("clusters {} over {} names", clusters, pred.len());
        }
    }
    Ok(())
}

/// Candidate profiles of one name block resolved against the store.
fn resolved_block<'a>(
    block: &BTreeMap<String, Vec<PaperId>>,
    store: &'a PaperStore,
) -> BTreeMap<String, Vec<&'a PaperRecord>> {
    block
        .iter()
        .map(|(a, ps)| (a.clone(), ps.iter().filter_map(|p| store.get(p)).collect()))
        .collect()
}

type BlockRef<'a> = (&'a NameKey, &'a BTreeMap<String, Vec<PaperId>>);

struct RndRun<'a> {
    store: &'a PaperStore,
    profiles: &'a NameBlockSet,
    extractor: FeatureExtractor<'a>,
}

impl<'a> RndRun<'a> {
    fn block_for(&self, r: &PaperRef) -> Result<Option<BlockRef<'a>>, Error> {
        let (record, idx) = self.store.resolve(r)?;
        let name = normalize_name(&record.authors[idx].name)?;
        Ok(rnd::find_block(self.profiles, &name))
    }

    fn idf_for(&self, name: &NameKey, block: &BTreeMap<String, Vec<PaperId>>) -> FamilyIdf {
        let candidates = resolved_block(block, self.store);
        rnd::build_family_idf(&candidates, name, self.extractor.stoplist)
    }

    /// Candidate scores for every unassigned paper, keyed by reference.
    fn score_all(
        &self,
        unassigned: &[PaperRef],
        scorer: &LogisticScorer,
    ) -> Result<BTreeMap<PaperRef, Vec<(String, f64)>>, Error> {
        let mut idf_cache: BTreeMap<String, FamilyIdf> = BTreeMap::new();
        let mut out = BTreeMap::new();
        for r in unassigned {
            let Some((name, block)) = self.block_for(r)? else {
                out.insert(r.clone(), Vec::new());
                continue;
            };
            let idf = idf_cache
                .entry(name.to_string())
                .or_insert_with(|| self.idf_for(name, block));
            let scores = rnd::score_candidates(&self.extractor, r, block, idf, scorer)?;
            out.insert(r.clone(), scores);
        }
        Ok(out)
    }
}

fn build_training_matrix(
    run: &RndRun<'_>,
    split: &RndSplit,
    negatives: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<bool>), Error> {
    let pairs = rnd::build_training_pairs(split, run.store, negatives, seed);
    let mut idf_cache: BTreeMap<String, FamilyIdf> = BTreeMap::new();
    let mut features = Vec::with_capacity(pairs.len());
    let mut labels = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let Some((name, block)) = run.block_for(&pair.target)? else {
            continue;
        };
        let idf = idf_cache
            .entry(name.to_string())
            .or_insert_with(|| run.idf_for(name, block));
        let profile = run.extractor.profile_papers(&block[&pair.candidate]);
        if profile.is_empty() {
            continue;
        }
        let f = run
            .extractor
            .pair_features(&pair.target, &pair.candidate, &profile, idf)?;
        features.push(f);
        labels.push(pair.label);
    }
    Ok((features, labels))
}

fn cmd_rnd_train(args: &RndTrainArgs, file: &FileConfig) -> Result<(), Error> {
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let profiles = corpus::load_assignments(&resolve_path(&args.profiles))?;
    let unassigned = load_unassigned(&resolve_path(&args.unassigned))?;
    let truth = load_truth_map(&resolve_path(&args.truth))?;
    let table = EmbeddingTable::load(&resolve_path(&args.embeddings))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let seed = seed_of(args.seed, file);
    let negatives = args
        .negatives
        .or(file.negatives)
        .unwrap_or(rnd::RndConfig::default().negatives_per_positive);
    let mode = match args.feature_mode.as_deref().or(file.feature_mode.as_deref()) {
        Some(m) => FeatureMode::parse(m)?,
        None => FeatureMode::Full,
    };
    let fields = match args.fields.as_deref().or(file.fields.as_deref()) {
        Some(f) => FieldSet::parse(f)?,
        None => FieldSet::default(),
    };
    let split = RndSplit {
        profiles,
        unassigned,
        truth,
    };
    let run = RndRun {
        store: &store,
        profiles: &split.profiles,
        extractor: FeatureExtractor {
            store: &store,
            table: &table,
            fields,
            kernel: KernelConfig::default(),
            mode,
            stoplist: &stoplist,
        },
    };
    let (features, labels) = build_training_matrix(&run, &split, negatives, seed)?;
    if let Some(path) = &args.dump_features {
        rnd::dump_feature_matrix(&features, &labels, path)?;
    }
    let scorer = rnd::train_scorer(&features, &labels, mode, &ScorerConfig::default())?;

    let mut model = ModelFile {
        scorer,
        nil_threshold: rnd::RndConfig::default().nil_threshold,
        calibrated: false,
    };
    if let (Some(vp), Some(vu), Some(vt)) = (
        &args.valid_profiles,
        &args.valid_unassigned,
        &args.valid_truth,
    ) {
        let vprofiles = corpus::load_assignments(&resolve_path(vp))?;
        let vunassigned = load_unassigned(&resolve_path(vu))?;
        let vtruth = load_truth_map(&resolve_path(vt))?;
        let vrun = RndRun {
            store: &store,
            profiles: &vprofiles,
            extractor: FeatureExtractor {
                store: &store,
                table: &table,
                fields,
                kernel: KernelConfig::default(),
                mode,
                stoplist: &stoplist,
            },
        };
        let scored = vrun.score_all(&vunassigned, &model.scorer)?;
        let calibration = rnd::calibrate_nil_threshold(&scored, &vtruth);
        if calibration.defaulted {
            eprintln!("warning: validation split has no NIL cases; keeping threshold 0.5");
        }
        model.nil_threshold = calibration.threshold;
        model.calibrated = !calibration.defaulted;
    }
    write_json(&args.out, &model)?;
    println!(
        "scorer: {} pairs, {} features, nil-threshold {:.2}{}",
        features.len(),
        mode.width(),
        model.nil_threshold,
        if model.calibrated { " (calibrated)" } else { "" }
    );
    Ok(())
}

fn cmd_rnd_assign(args: &RndAssignArgs, file: &FileConfig) -> Result<(), Error> {
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let profiles = corpus::load_assignments(&resolve_path(&args.profiles))?;
    let unassigned = load_unassigned(&resolve_path(&args.unassigned))?;
    let table = EmbeddingTable::load(&resolve_path(&args.embeddings))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let model_text = std::fs::read_to_string(resolve_path(&args.model))
        .map_err(|e| Error::io(args.model.display().to_string(), e))?;
    let model: ModelFile = serde_json::from_str(&model_text).map_err(|e| Error::Json {
        path: args.model.display().to_string(),
        source: e,
    })?;
    let threshold = args
        .nil_threshold
        .or(file.nil_threshold)
        .unwrap_or(model.nil_threshold);
    let fields = match args.fields.as_deref().or(file.fields.as_deref()) {
        Some(f) => FieldSet::parse(f)?,
        None => FieldSet::default(),
    };
    if profiles.is_empty() {
        eprintln!("warning: empty candidate profiles; every paper maps to NIL");
    }
    let run = RndRun {
        store: &store,
        profiles: &profiles,
        extractor: FeatureExtractor {
            store: &store,
            table: &table,
            fields,
            kernel: KernelConfig::default(),
            mode: model.scorer.mode,
            stoplist: &stoplist,
        },
    };
    let scored = run.score_all(&unassigned, &model.scorer)?;
    let mut rows = Vec::with_capacity(unassigned.len());
    let mut assignments = BTreeMap::new();
    for r in &unassigned {
        let (author, score) = rnd::assign_from_scores(&scored[r], threshold);
        assignments.insert(r.clone(), author.clone());
        rows.push(AssignmentRow {
            paper_ref: r.clone(),
            author,
            score,
        });
    }
    write_json(&args.out, &rows)?;
    match &args.truth {
        Some(truth_path) => {
            let truth = load_truth_map(&resolve_path(truth_path))?;
            let report = eval::weighted_prf(&assignments, &truth)?;
            println!("weighted-f1 {:.4}", report.aggregate.f1);
        }
        None => {
            let nil = rows.iter().filter(|r| r.author.is_nil()).count();
            println!("assigned {} papers ({nil} NIL)", rows.len());
        }
    }
    Ok(())
}

fn cmd_ind(args: &IndArgs, file: &FileConfig) -> Result<(), Error> {
    let records = corpus::load_ind(&resolve_path(&args.ind))?;
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let table = EmbeddingTable::load(&resolve_path(&args.embeddings))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let seed = seed_of(args.seed, file);
    let fields = match args.fields.as_deref().or(file.fields.as_deref()) {
        Some(f) => FieldSet::parse(f)?,
        None => FieldSet::default(),
    };
    let mut report: BTreeMap<String, Vec<serde_json::Value>> = BTreeMap::new();
    let mut aucs = Vec::new();
    let mut aps = Vec::new();
    for record in &records {
        let rel_table = if args.relational {
            build_profile_relational_table(record, &store, &stoplist, seed)?
        } else {
            None
        };
        let scores =
            ind::ind_scores(record, &store, &table, rel_table.as_ref(), &fields, &stoplist)?;
        let rows: Vec<serde_json::Value> = scores
            .scores
            .iter()
            .map(|(paper, score)| serde_json::json!({ "paper_id": paper, "score": score }))
            .collect();
        report.insert(record.author_id.clone(), rows);
        if !record.outliers.is_empty() {
            let (s, l): (Vec<f64>, Vec<bool>) = scores
                .scores
                .iter()
                .map(|(paper, score)| (*score, record.outliers.contains(paper)))
                .unzip();
            aucs.push(eval::auc(&s, &l)?);
            aps.push(eval::average_precision(&s, &l)?);
        }
    }
    write_json(&args.out, &report)?;
    if aucs.is_empty() {
        println!("scored {} authors (no outlier labels to evaluate)", records.len());
    } else {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!("mean-auc {:.4} map {:.4}", mean(&aucs), mean(&aps));
    }
    Ok(())
}

/// Per-author relational table: a graph over the profile's papers (papers
/// without the author's name stay isolated), walks, then id embeddings.
fn build_profile_relational_table(
    record: &corpus::IndAuthorRecord,
    store: &PaperStore,
    stoplist: &Stoplist,
    seed: u64,
) -> Result<Option<EmbeddingTable>, Error> {
    let Ok(name) = normalize_name(&record.name) else {
        return Ok(None);
    };
    let papers: Vec<&PaperRecord> = record
        .normal
        .iter()
        .chain(&record.outliers)
        .filter_map(|id| store.get(id))
        .filter(|p| p.author_index_for(&name).is_some())
        .collect();
    if papers.len() < 2 {
        return Ok(None);
    }
    let graph = relgraph::build_graph(&papers, &name, &RelationSet::default(), stoplist)?;
    let walks = relgraph::random_walks(&graph, &WalkConfig { seed, ..WalkConfig::default() })?;
    match relgraph::relational_embeddings(&walks, &EmbedConfig { seed, ..EmbedConfig::default() }) {
        Ok(table) => Ok(Some(table)),
        Err(Error::EmptyWalkCorpus) => Ok(None),
        Err(e) => Err(e),
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Error> {
    match args.task.as_str() {
        "snd" => {
            let text = std::fs::read_to_string(resolve_path(&args.pred))
                .map_err(|e| Error::io(args.pred.display().to_string(), e))?;
            let pred: BTreeMap<String, Vec<Vec<PaperId>>> =
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: args.pred.display().to_string(),
                    source: e,
                })?;
            let truth = corpus::load_assignments(&resolve_path(&args.truth))?;
            let report = score_clusters(&pred, &truth_clusters(&truth))?;
            write_json(&args.out, &report)?;
            println!(
                "pairwise precision {:.4} recall {:.4} f1 {:.4}",
                report.precision, report.recall, report.f1
            );
        }
        "rnd" => {
            let text = std::fs::read_to_string(resolve_path(&args.pred))
                .map_err(|e| Error::io(args.pred.display().to_string(), e))?;
            let rows: Vec<AssignmentRowIn> =
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: args.pred.display().to_string(),
                    source: e,
                })?;
            let assignments: BTreeMap<PaperRef, AuthorOrNil> =
                rows.into_iter().map(|r| (r.paper_ref, r.author)).collect();
            let truth = load_truth_map(&resolve_path(&args.truth))?;
            let report = eval::weighted_prf(&assignments, &truth)?;
            let out = RndReport {
                per_author: report
                    .per_author
                    .iter()
                    .map(|r| RndReportRow {
                        author: r.author.clone(),
                        truth_papers: r.truth_papers,
                        weight: r.weight,
                        precision: r.prf.precision,
                        recall: r.prf.recall,
                        f1: r.prf.f1,
                    })
                    .collect(),
                precision: report.aggregate.precision,
                recall: report.aggregate.recall,
                f1: report.aggregate.f1,
            };
            write_json(&args.out, &out)?;
            println!(
                "weighted precision {:.4} recall {:.4} f1 {:.4}",
                out.precision, out.recall, out.f1
            );
        }
        "ind" => {
            let text = std::fs::read_to_string(resolve_path(&args.pred))
                .map_err(|e| Error::io(args.pred.display().to_string(), e))?;
            let pred: BTreeMap<String, Vec<IndRowIn>> =
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: args.pred.display().to_string(),
                    source: e,
                })?;
            let records = corpus::load_ind(&resolve_path(&args.truth))?;
            let mut rows = Vec::new();
            let mut skipped = Vec::new();
            for record in &records {
                let Some(scored) = pred.get(&record.author_id) else {
                    return Err(Error::UniverseMismatch(format!(
                        "prediction is missing author {}",
                        record.author_id
                    )));
                };
                if record.outliers.is_empty() {
                    skipped.push(record.author_id.clone());
                    continue;
                }
                let (s, l): (Vec<f64>, Vec<bool>) = scored
                    .iter()
                    .map(|r| (r.score, record.outliers.contains(&r.paper_id)))
                    .unzip();
                rows.push(IndReportRow {
                    author: record.author_id.clone(),
                    papers: scored.len(),
                    outliers: record.outliers.len(),
                    auc: eval::auc(&s, &l)?,
                    average_precision: eval::average_precision(&s, &l)?,
                });
            }
            let mean = |f: fn(&IndReportRow) -> f64| {
                if rows.is_empty() {
                    0.0
                } else {
                    rows.iter().map(f).sum::<f64>() / rows.len() as f64
                }
            };
            let report = IndEvalReport {
                mean_auc: mean(|r| r.auc),
                mean_average_precision: mean(|r| r.average_precision),
                per_author: rows,
                skipped_single_class: skipped,
            };
            write_json(&args.out, &report)?;
            println!(
                "mean-auc {:.4} map {:.4}",
                report.mean_auc, report.mean_average_precision
            );
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown eval task {other:?}; expected snd, rnd, or ind"
            )))
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct AssignmentRowIn {
    paper_ref: PaperRef,
    author: AuthorOrNil,
    #[allow(dead_code)]
    #[serde(default)]
    score: f64,
}

#[derive(Deserialize)]
struct IndRowIn {
    paper_id: PaperId,
    score: f64,
}

#[derive(Serialize)]
struct AblateRow {
    combination: String,
    metric: String,
    value: f64,
}

fn cmd_ablate(args: &AblateArgs, file: &FileConfig) -> Result<(), Error> {
    let blocks = corpus::load_assignments(&resolve_path(&args.assignments))?;
    let store = corpus::load_papers(&resolve_path(&args.papers))?;
    let table = EmbeddingTable::load(&resolve_path(&args.embeddings))?;
    let stoplist = load_stoplist(args.stoplist.as_deref(), file)?;
    let seed = seed_of(args.seed, file);
    let truth = truth_clusters(&blocks);
    let eval_blocks = blocks.flatten();
    let mut rows = Vec::new();
    match (args.task.as_str(), args.grid.as_str()) {
        ("snd", "modality") => {
            for modality in [Modality::Semantic, Modality::Relational, Modality::Both] {
                let config = SndPipelineConfig {
                    snd: SndConfig {
                        modality,
                        ..SndConfig::default()
                    },
                    walk: WalkConfig { seed, ..WalkConfig::default() },
                    rel_embed: EmbedConfig { seed, ..EmbedConfig::default() },
                    ..SndPipelineConfig::default()
                };
                let pred = clusters_per_name(&eval_blocks, &store, &table, &config, &stoplist)?;
                let report = score_clusters(&pred, &truth)?;
                rows.push(AblateRow {
                    combination: format!("{modality:?}").to_lowercase(),
                    metric: "Macro-Pairwise-F1".into(),
                    value: report.f1,
                });
            }
        }
        ("snd", "relations") => {
            for mask in 1u8..8 {
                let relations = RelationSet {
                    coauthor: mask & 1 != 0,
                    coorg: mask & 2 != 0,
                    covenue: mask & 4 != 0,
                };
                let mut parts = Vec::new();
                if relations.coauthor {
                    parts.push("coauthor");
                }
                if relations.coorg {
                    parts.push("coorg");
                }
                if relations.covenue {
                    parts.push("covenue");
                }
                let config = SndPipelineConfig {
                    relations,
                    walk: WalkConfig { seed, ..WalkConfig::default() },
                    rel_embed: EmbedConfig { seed, ..EmbedConfig::default() },
                    ..SndPipelineConfig::default()
                };
                let pred = clusters_per_name(&eval_blocks, &store, &table, &config, &stoplist)?;
                let report = score_clusters(&pred, &truth)?;
                rows.push(AblateRow {
                    combination: parts.join("+"),
                    metric: "Macro-Pairwise-F1".into(),
                    value: report.f1,
                });
            }
        }
        ("snd", "fields") => {
            let grid: &[(&str, &str)] = &[
                ("title", "title"),
                ("keywords", "keywords"),
                ("org", "org"),
                ("title+keywords", "title,keywords"),
                ("title+org", "title,org"),
                ("title+keywords+org", "title,keywords,org"),
                ("all", "title,abstract,keywords,venue,year,coauthors,org"),
            ];
            for (label, spec) in grid {
                let config = SndPipelineConfig {
                    fields: FieldSet::parse(spec)?,
                    walk: WalkConfig { seed, ..WalkConfig::default() },
                    rel_embed: EmbedConfig { seed, ..EmbedConfig::default() },
                    ..SndPipelineConfig::default()
                };
                let pred = clusters_per_name(&eval_blocks, &store, &table, &config, &stoplist)?;
                let report = score_clusters(&pred, &truth)?;
                rows.push(AblateRow {
                    combination: (*label).to_string(),
                    metric: "Macro-Pairwise-F1".into(),
                    value: report.f1,
                });
            }
        }
        ("rnd", "features") => {
            for mode in [FeatureMode::AdhocOnly, FeatureMode::Full] {
                let value = rnd_ablation_run(&blocks, &store, &table, &stoplist, mode, args, seed)?;
                rows.push(AblateRow {
                    combination: match mode {
                        FeatureMode::AdhocOnly => "adhoc-36".into(),
                        FeatureMode::Full => "full-118".into(),
                    },
                    metric: "Weighted-F1".into(),
                    value,
                });
            }
        }
        (task, grid) => {
            return Err(Error::InvalidConfig(format!(
                "unsupported ablation {task:?}/{grid:?}; expected snd x modality|relations|fields or rnd x features"
            )))
        }
    }
    write_json(&args.out, &rows)?;
    for row in &rows {
        println!("{:24} {} {:.4}", row.combination, row.metric, row.value);
    }
    Ok(())
}

/// Self-contained rnd sweep: split, train, calibrate on the split itself,
/// and score the held-out unassigned papers.
fn rnd_ablation_run(
    blocks: &NameBlockSet,
    store: &PaperStore,
    table: &EmbeddingTable,
    stoplist: &Stoplist,
    mode: FeatureMode,
    args: &AblateArgs,
    seed: u64,
) -> Result<f64, Error> {
    let (split, _) = corpus::split_rnd(blocks, store, args.ratio, args.nil_fraction, seed)?;
    let run = RndRun {
        store,
        profiles: &split.profiles,
        extractor: FeatureExtractor {
            store,
            table,
            fields: FieldSet::default(),
            kernel: KernelConfig::default(),
            mode,
            stoplist,
        },
    };
    let (features, labels) = build_training_matrix(&run, &split, 3, seed)?;
    let scorer = rnd::train_scorer(&features, &labels, mode, &ScorerConfig::default())?;
    let scored = run.score_all(&split.unassigned, &scorer)?;
    let calibration = rnd::calibrate_nil_threshold(&scored, &split.truth);
    let assignments: BTreeMap<PaperRef, AuthorOrNil> = split
        .unassigned
        .iter()
        .map(|r| {
            (
                r.clone(),
                rnd::assign_from_scores(&scored[r], calibration.threshold).0,
            )
        })
        .collect();
    Ok(eval::weighted_prf(&assignments, &split.truth)?.aggregate.f1)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build_global();
    match &cli.command {
        Command::LoadCheck(args) => cmd_load_check(args),
        Command::Synth(args) => cmd_synth(args, &file),
        Command::Split(args) => cmd_split(args, &file),
        Command::Embed(args) => cmd_embed(args, &file),
        Command::Snd(args) => cmd_snd(args, &file),
        Command::RndTrain(args) => cmd_rnd_train(args, &file),
        Command::RndAssign(args) => cmd_rnd_assign(args, &file),
        Command::Ind(args) => cmd_ind(args, &file),
        Command::Eval(args) => cmd_eval(args),
        Command::Ablate(args) => cmd_ablate(args, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Usage => ExitCode::from(1),
                ErrorClass::Data => ExitCode::from(2),
                ErrorClass::Internal => ExitCode::from(3),
            }
        }
    }
}
