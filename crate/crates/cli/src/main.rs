//! `fielded-rerank`: batch pipeline for fielded entity retrieval and
//! embedding-based re-ranking.
//!
//! Every subcommand reads its inputs from flags or from the TOML config
//! (`--config` or `$FIELDED_RERANK_CONFIG`); flags win. Exit codes: 0 on
//! success, 2 for missing inputs, 3 for invalid inputs or configuration,
//! 1 for anything else. Failures print one `error:` line on stderr.

mod config;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fielded_rerank::corpus::{load_corpus, load_qrels, load_queries};
use fielded_rerank::embedding::{load_vectors, preprocess_hyperlinks, train_skipgram, Embeddings};
use fielded_rerank::eval::{evaluate, filter_by_prefix, filter_qrels_by_prefix, read_run, write_run};
use fielded_rerank::fsdm::retrieve_pool;
use fielded_rerank::linker::{annotate, load_annotations, load_dictionary, write_annotations, Annotations};
use fielded_rerank::ltr::{coordinate_ascent_train, mean_ndcg, rerank, training_set, Weights};
use fielded_rerank::semantics::{read_features, write_features, Features, Featurizer};
use fielded_rerank::{tokenize, FieldedIndex, Query, RankedList, ScoredPool, SurfaceFormDictionary};

use config::{require, PipelineConfig, CONFIG_ENV, DEFAULT_POOL_SIZE};

const FSDM_TAG: &str = "fsdm";
const RERANK_TAG: &str = "rerank";

/// A rejected invocation or configuration.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Debug, Parser)]
#[command(
    name = "fielded-rerank",
    version,
    about = "Fielded entity retrieval with embedding re-ranking"
)]
struct Cli {
    /// TOML pipeline config. Flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Seed for every stochastic step (skip-gram training, coordinate ascent restarts).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Only process queries whose id starts with this prefix, e.g. `QALD2_`.
    #[arg(long, global = true)]
    query_prefix: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the positional fielded index from a JSONL corpus.
    Index(IndexArgs),
    /// Retrieve the top-n FSDM pool per query as a TREC run (tag `fsdm`).
    Retrieve(RetrieveArgs),
    /// Train skip-gram vectors on passages with `[[target|anchor]]` links.
    TrainEmbeddings(TrainEmbeddingsArgs),
    /// Link queries to entities and write `query_id<TAB>entity_id` annotations.
    Link(LinkArgs),
    /// Compute the 13 re-ranking features for every pooled document.
    Extract(ExtractArgs),
    /// Learn the linear model by coordinate ascent on NDCG@10.
    Train(TrainArgs),
    /// Re-rank an FSDM run with a trained model (tag `rerank`).
    Rerank(RerankArgs),
    /// Report NDCG per query and overall, with paired t-tests against a baseline.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// Corpus JSONL file.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Index snapshot to write [config: paths.index].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    /// Index snapshot. When neither flag nor config names one, the index is built from --corpus.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Corpus JSONL file, used only without an index.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Queries TSV.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Pool size n per query [default: 100].
    #[arg(short = 'n', long)]
    pool_size: Option<usize>,
    /// Run file to write [config: paths.run].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainEmbeddingsArgs {
    /// Training text, one passage per line [config: paths.training_text].
    #[arg(long)]
    input: Option<PathBuf>,
    /// Vector file for every learned token [config: paths.embeddings].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Optional vector file holding only the entity tokens.
    #[arg(long)]
    entity_output: Option<PathBuf>,
    /// Vector dimensionality.
    #[arg(long)]
    dim: Option<usize>,
    /// Maximum context radius.
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per positive pair.
    #[arg(long)]
    negatives: Option<usize>,
    /// Passes over the training text.
    #[arg(long)]
    epochs: Option<usize>,
    /// Drop tokens seen fewer times than this.
    #[arg(long)]
    min_count: Option<usize>,
    /// Subsampling threshold; 0 disables subsampling.
    #[arg(long)]
    subsample: Option<f64>,
    /// Initial learning rate, decayed linearly.
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct LinkArgs {
    /// Queries TSV.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Surface form dictionary TSV.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Externally produced annotations; queries listed there keep them.
    #[arg(long)]
    external: Option<PathBuf>,
    /// Annotations TSV to write [config: paths.annotations].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Corpus JSONL file.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Queries TSV.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// FSDM run holding the pools [config: paths.run].
    #[arg(long)]
    run: Option<PathBuf>,
    /// Word vector file.
    #[arg(long)]
    word_vectors: Option<PathBuf>,
    /// Entity vector file.
    #[arg(long)]
    entity_vectors: Option<PathBuf>,
    /// Query entity annotations; unannotated queries fall back to --dictionary.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Surface form dictionary TSV.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Feature TSV to write [config: paths.features].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Feature TSV from `extract`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Relevance judgments.
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Model file to write [config: paths.model].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Random starts in addition to the fixed ones.
    #[arg(long)]
    restarts: Option<usize>,
    /// Maximum passes over the 13 weights per start.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Queries with this id prefix are held out of training and only evaluated.
    #[arg(long)]
    holdout_prefix: Option<String>,
}

#[derive(Debug, Args)]
struct RerankArgs {
    /// FSDM run holding the pools [config: paths.run].
    #[arg(long)]
    run: Option<PathBuf>,
    /// Feature TSV from `extract`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Model file from `train`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Run file to write [config: paths.rerank_run].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Run to evaluate [config: paths.rerank_run].
    #[arg(long)]
    run: Option<PathBuf>,
    /// Baseline run; adds paired t-tests per cutoff.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Relevance judgments.
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// NDCG cutoffs.
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    cutoffs: Vec<usize>,
    /// Report TSV to write; stdout when absent [config: paths.report].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct Session {
    config: PipelineConfig,
    query_prefix: Option<String>,
}

impl Session {
    fn prefix(&self) -> Option<&str> {
        self.query_prefix.as_deref()
    }

    fn keep(&self, query_id: &str) -> bool {
        self.prefix().is_none_or(|p| query_id.starts_with(p))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            return report_failure(3, "validation", first.trim_start_matches("error: "));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            report_failure(code, kind, &describe(&err))
        }
    }
}

fn report_failure(code: u8, kind: &str, message: &str) -> ExitCode {
    eprintln!("error: kind={kind} code={code} message={message:?}");
    ExitCode::from(code)
}

/// Joins the cause chain, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !last.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        last = text;
    }
    out
}

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<fielded_rerank::Error>() {
            if e.is_missing_input() {
                return (2, "missing_input");
            }
            if e.is_validation() {
                return (3, "validation");
            }
            return (1, "internal");
        }
        if let Some(e) = cause.downcast_ref::<std::io::Error>() {
            if e.kind() == std::io::ErrorKind::NotFound {
                return (2, "missing_input");
            }
            return (1, "internal");
        }
        if cause.is::<Invalid>() || cause.is::<toml::de::Error>() {
            return (3, "validation");
        }
    }
    (1, "internal")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed.or(config.seed) {
        config.train.seed = seed;
        config.skipgram.seed = seed;
    }
    let query_prefix = cli.query_prefix.or_else(|| config.query_prefix.clone());
    let ctx = Session { config, query_prefix };
    match cli.command {
        Command::Index(a) => cmd_index(&ctx, a),
        Command::Retrieve(a) => cmd_retrieve(&ctx, a),
        Command::TrainEmbeddings(a) => cmd_train_embeddings(&ctx, a),
        Command::Link(a) => cmd_link(&ctx, a),
        Command::Extract(a) => cmd_extract(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Rerank(a) => cmd_rerank(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
    }
}

/// Refuses to overwrite an input and creates the output's parent directory.
fn prepare_output(output: &Path, inputs: &[&Path]) -> anyhow::Result<()> {
    if inputs.contains(&output) {
        return Err(Invalid(format!("output {} is also an input", output.display())).into());
    }
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

fn load_filtered_queries(ctx: &Session, path: &Path) -> anyhow::Result<Vec<Query>> {
    let queries: Vec<Query> = load_queries(path)?
        .into_iter()
        .filter(|q| ctx.keep(&q.query_id))
        .collect();
    if queries.is_empty() {
        return Err(Invalid(format!("{}: no queries selected", path.display())).into());
    }
    Ok(queries)
}

fn cmd_index(ctx: &Session, a: IndexArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let corpus_path = require(&a.corpus, &paths.corpus, "corpus")?;
    let output = require(&a.output, &paths.index, "output")?;
    prepare_output(&output, &[&corpus_path])?;
    let corpus = load_corpus(&corpus_path)?;
    let index = FieldedIndex::build(&corpus)?;
    index.save_snapshot(&output)?;
    log::info!("indexed {} documents into {}", index.doc_count(), output.display());
    Ok(())
}

fn cmd_retrieve(ctx: &Session, a: RetrieveArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let params = &ctx.config.fsdm;
    params.validate()?;
    let pool_size = a.pool_size.or(ctx.config.pool_size).unwrap_or(DEFAULT_POOL_SIZE);
    let queries_path = require(&a.queries, &paths.queries, "queries")?;
    let output = require(&a.output, &paths.run, "output")?;
    let (index, index_input) = match a.index.clone().or_else(|| paths.index.clone()) {
        Some(p) => (FieldedIndex::load_snapshot(&p)?, p),
        None => {
            let corpus_path = require(&a.corpus, &paths.corpus, "corpus")?;
            (FieldedIndex::build(&load_corpus(&corpus_path)?)?, corpus_path)
        }
    };
    prepare_output(&output, &[&queries_path, &index_input])?;
    let queries = load_filtered_queries(ctx, &queries_path)?;
    let mut lists = Vec::with_capacity(queries.len());
    for q in &queries {
        let pool = retrieve_pool(&index, q, params, pool_size)?;
        if pool.is_empty() {
            log::warn!("query {}: no candidate documents", q.query_id);
        }
        lists.push(RankedList::from(pool));
    }
    write_run(&lists, FSDM_TAG, &output)?;
    log::info!("wrote {} pools to {}", lists.len(), output.display());
    Ok(())
}

fn cmd_train_embeddings(ctx: &Session, a: TrainEmbeddingsArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let input = require(&a.input, &paths.training_text, "input")?;
    let output = require(&a.output, &paths.embeddings, "output")?;
    prepare_output(&output, &[&input])?;
    if let Some(e) = &a.entity_output {
        prepare_output(e, &[&input, &output])?;
    }
    let mut sg = ctx.config.skipgram.clone();
    sg.dim = a.dim.unwrap_or(sg.dim);
    sg.window = a.window.unwrap_or(sg.window);
    sg.negatives = a.negatives.unwrap_or(sg.negatives);
    sg.epochs = a.epochs.unwrap_or(sg.epochs);
    sg.min_count = a.min_count.unwrap_or(sg.min_count);
    sg.subsample = a.subsample.unwrap_or(sg.subsample);
    sg.learning_rate = a.learning_rate.unwrap_or(sg.learning_rate);

    let file = File::open(&input).with_context(|| format!("{}", input.display()))?;
    let mut streams = Vec::new();
    let mut entity_tokens = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}: line {}", input.display(), i + 1))?;
        let tokens = preprocess_hyperlinks(&line).with_context(|| format!("{}: line {}", input.display(), i + 1))?;
        // Prose tokens are already normalized; anything else came from a link.
        entity_tokens.extend(tokens.iter().filter(|t| tokenize(t) != [t.as_str()]).cloned());
        if !tokens.is_empty() {
            streams.push(tokens);
        }
    }
    let (vectors, report) = train_skipgram::<f64>(&streams, &sg)?;
    for (epoch, loss) in report.mean_losses().iter().enumerate() {
        log::info!("epoch {}: mean loss {loss:.6}", epoch + 1);
    }
    vectors.write(&output)?;
    if let Some(path) = &a.entity_output {
        let mut entities = Embeddings::new();
        for token in vectors.tokens().filter(|t| entity_tokens.contains(*t)) {
            entities.insert(token, vectors.get(token).unwrap_or_default().to_vec())?;
        }
        entities.write(path)?;
    }
    Ok(())
}

fn cmd_link(ctx: &Session, a: LinkArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let queries_path = require(&a.queries, &paths.queries, "queries")?;
    let dictionary_path = require(&a.dictionary, &paths.dictionary, "dictionary")?;
    let output = require(&a.output, &paths.annotations, "output")?;
    let mut inputs = vec![queries_path.as_path(), dictionary_path.as_path()];
    if let Some(e) = &a.external {
        inputs.push(e);
    }
    prepare_output(&output, &inputs)?;
    let mut queries = load_filtered_queries(ctx, &queries_path)?;
    let dictionary = load_dictionary(&dictionary_path)?;
    let external = match &a.external {
        Some(p) => read_external_annotations(p, &queries)?,
        None => Annotations::new(),
    };
    annotate(&mut queries, &dictionary, &external);
    write_annotations(&queries, &output)?;
    Ok(())
}

/// External annotations must exist when named explicitly.
fn read_external_annotations(path: &Path, queries: &[Query]) -> anyhow::Result<Annotations> {
    if !path.exists() {
        return Err(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{}: not found", path.display())).into());
    }
    let known: HashSet<String> = queries.iter().map(|q| q.query_id.clone()).collect();
    Ok(load_annotations(path, Some(&known))?)
}

fn cmd_extract(ctx: &Session, a: ExtractArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let corpus_path = require(&a.corpus, &paths.corpus, "corpus")?;
    let queries_path = require(&a.queries, &paths.queries, "queries")?;
    let run_path = require(&a.run, &paths.run, "run")?;
    let words_path = require(&a.word_vectors, &paths.word_vectors, "word-vectors")?;
    let entities_path = require(&a.entity_vectors, &paths.entity_vectors, "entity-vectors")?;
    let annotations_path = a.annotations.clone().or_else(|| paths.annotations.clone());
    let dictionary_path = a.dictionary.clone().or_else(|| paths.dictionary.clone());
    let output = require(&a.output, &paths.features, "output")?;
    let mut inputs = vec![
        corpus_path.as_path(),
        queries_path.as_path(),
        run_path.as_path(),
        words_path.as_path(),
        entities_path.as_path(),
    ];
    inputs.extend(annotations_path.as_deref());
    inputs.extend(dictionary_path.as_deref());
    prepare_output(&output, &inputs)?;

    let corpus = load_corpus(&corpus_path)?;
    let mut queries = load_filtered_queries(ctx, &queries_path)?;
    let annotations = match &annotations_path {
        Some(p) => read_external_annotations(p, &queries)?,
        None => Annotations::new(),
    };
    let dictionary = match &dictionary_path {
        Some(p) => load_dictionary(p)?,
        None => SurfaceFormDictionary::new(),
    };
    annotate(&mut queries, &dictionary, &annotations);

    let words = load_vectors::<f64>(&words_path)?;
    let entities = load_vectors::<f64>(&entities_path)?;
    let pools: BTreeMap<String, ScoredPool> = read_run(&run_path)?
        .into_iter()
        .map(|l| (l.query_id.clone(), ScoredPool::from(l)))
        .collect();

    let mut featurizer = Featurizer::new(&words, &entities);
    let mut rows = Vec::new();
    for q in &queries {
        match pools.get(&q.query_id) {
            Some(pool) if !pool.is_empty() => rows.extend(featurizer.extract(q, pool, &corpus)?),
            _ => log::warn!("query {}: no pool in {}", q.query_id, run_path.display()),
        }
    }
    write_features(&rows, &output)?;
    log::info!("wrote {} feature rows to {}", rows.len(), output.display());
    Ok(())
}

fn cmd_train(ctx: &Session, a: TrainArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let features_path = require(&a.features, &paths.features, "features")?;
    let qrels_path = require(&a.qrels, &paths.qrels, "qrels")?;
    let output = require(&a.output, &paths.model, "output")?;
    prepare_output(&output, &[&features_path, &qrels_path])?;
    let mut train = ctx.config.train.clone();
    train.restarts = a.restarts.unwrap_or(train.restarts);
    train.max_iterations = a.max_iterations.unwrap_or(train.max_iterations);
    train.validate()?;

    let qrels = load_qrels(&qrels_path)?;
    let rows: Vec<Features<f64>> = read_features(&features_path)?
        .into_iter()
        .filter(|f| ctx.keep(&f.query_id))
        .collect();
    let held_out = |id: &str| a.holdout_prefix.as_deref().is_some_and(|p| id.starts_with(p));
    let (holdout_rows, train_rows): (Vec<_>, Vec<_>) = rows.into_iter().partition(|f| held_out(&f.query_id));
    let queries = training_set(&train_rows, &qrels, train.cutoff);
    if queries.is_empty() {
        return Err(Invalid(format!("{}: no training queries", features_path.display())).into());
    }
    let outcome = coordinate_ascent_train(&queries, &train)?;
    let baseline = mean_ndcg(&queries, &Weights::fsdm_only(), train.cutoff);
    log::info!(
        "trained on {} queries: NDCG@{} {:.4} (fsdm alone {:.4})",
        queries.len(),
        train.cutoff,
        outcome.objective,
        baseline
    );
    if !holdout_rows.is_empty() {
        let holdout = training_set(&holdout_rows, &qrels, train.cutoff);
        log::info!(
            "held-out NDCG@{} over {} queries: {:.4}",
            train.cutoff,
            holdout.len(),
            mean_ndcg(&holdout, &outcome.model, train.cutoff)
        );
    }
    outcome.model.write(&output)?;
    Ok(())
}

fn cmd_rerank(ctx: &Session, a: RerankArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let run_path = require(&a.run, &paths.run, "run")?;
    let features_path = require(&a.features, &paths.features, "features")?;
    let model_path = require(&a.model, &paths.model, "model")?;
    let output = require(&a.output, &paths.rerank_run, "output")?;
    prepare_output(&output, &[&run_path, &features_path, &model_path])?;

    let model = Weights::<f64>::read(&model_path)?;
    let mut by_query: BTreeMap<String, Vec<Features<f64>>> = BTreeMap::new();
    for f in read_features::<f64>(&features_path)? {
        by_query.entry(f.query_id.clone()).or_default().push(f);
    }
    let mut lists = Vec::new();
    for list in filter_by_prefix(read_run(&run_path)?, ctx.prefix()) {
        let pool = ScoredPool::from(list);
        if pool.is_empty() {
            continue;
        }
        let features = by_query.get(&pool.query_id).ok_or_else(|| {
            Invalid(format!(
                "query {}: no features in {}",
                pool.query_id,
                features_path.display()
            ))
        })?;
        lists.push(rerank(&pool, features, &model)?);
    }
    write_run(&lists, RERANK_TAG, &output)?;
    Ok(())
}

fn cmd_eval(ctx: &Session, a: EvalArgs) -> anyhow::Result<()> {
    let paths = &ctx.config.paths;
    let run_path = require(&a.run, &paths.rerank_run, "run")?;
    let qrels_path = require(&a.qrels, &paths.qrels, "qrels")?;
    if a.cutoffs.is_empty() || a.cutoffs.contains(&0) {
        return Err(Invalid("cutoffs must be positive".into()).into());
    }
    let output = a.output.clone().or_else(|| paths.report.clone());
    if let Some(out) = &output {
        let mut inputs = vec![run_path.as_path(), qrels_path.as_path()];
        inputs.extend(a.baseline.as_deref());
        prepare_output(out, &inputs)?;
    }
    let qrels = filter_qrels_by_prefix(&load_qrels(&qrels_path)?, ctx.prefix());
    if qrels.is_empty() {
        return Err(Invalid(format!("{}: no judged queries selected", qrels_path.display())).into());
    }
    let run = filter_by_prefix(read_run(&run_path)?, ctx.prefix());
    let baseline = match &a.baseline {
        Some(p) => Some(filter_by_prefix(read_run(p)?, ctx.prefix())),
        None => None,
    };
    let report = evaluate(&run, baseline.as_deref(), &qrels, &a.cutoffs)?;
    let text = report.render();
    match output {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("{}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
