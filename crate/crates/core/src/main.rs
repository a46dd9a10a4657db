use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use corpus_scope::config::{
    EmbeddingConfig, PlausibilityConfig, ProofreaderConfig, RunConfig, Settings, CACHE_ENV,
};
use corpus_scope::corpus::{load_corpus, split_corpus, Corpus, InputFormat, Role, SplitRatios};
use corpus_scope::fluency::{
    LanguageModel, LanguageToolClient, NGramModel, Proofreader, RemoteLanguageModel,
};
use corpus_scope::http::RetryPolicy;
use corpus_scope::report::{
    assemble_report, write_curves_csv, write_report, write_sentence_scores_csv, Backends, Report,
    ReportFormat, ReportOptions,
};
use corpus_scope::semantic::{
    CachedEmbedder, EmbeddingBackend, FeatureHashEmbedder, RemoteEmbedder,
};
use corpus_scope::setscore::Aggregation;
use corpus_scope::stats::{
    human_stats, load_metric_scores, load_ratings, mann_whitney_u, pooled_t_test, spearman,
    welch_t_test, LikertMode, SampleVec,
};
use corpus_scope::tradeoff::{
    compute_tradeoff, density_grid, filter_upper_right, write_grid_csv, write_points_csv,
};
use corpus_scope::Error;

#[derive(Parser)]
#[command(
    name = "corpus-scope",
    version,
    about = "Characterize generated sentence corpora against train/test data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shuffle a corpus with a seed and split it into train/valid/test files.
    Split(SplitArgs),
    /// Compute the characterization table for one or more generated corpora.
    Characterize(CharacterizeArgs),
    /// Per-sentence semantic similarity vs syntactic novelty.
    Tradeoff(TradeoffArgs),
    /// Likert top-2 table, Mann-Whitney between groups and Spearman vs a metric.
    HumanStats(HumanStatsArgs),
    /// Run one significance test on two samples (one number per line).
    Stats(StatsArgs),
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    /// `lines` or `csv:<column>`.
    #[arg(long, default_value = "lines")]
    format: String,
    #[arg(long, default_value = "0.8,0.1,0.1")]
    ratios: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct CorpusArgs {
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<String>,
    #[arg(long)]
    test: Option<String>,
    /// `lines` or `csv:<column>`.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Default)]
struct EmbeddingArgs {
    /// `builtin` or `remote`.
    #[arg(long)]
    embedding: Option<String>,
    #[arg(long)]
    embed_endpoint: Option<String>,
    #[arg(long)]
    embed_dim: Option<String>,
    #[arg(long)]
    embed_seed: Option<String>,
    #[arg(long)]
    embed_batch: Option<String>,
    #[arg(long)]
    cache_dir: Option<String>,
    #[arg(long)]
    http_attempts: Option<String>,
    #[arg(long)]
    http_timeout_secs: Option<String>,
}

#[derive(Args)]
struct CharacterizeArgs {
    #[command(flatten)]
    corpora: CorpusArgs,
    #[arg(long)]
    valid: Option<String>,
    /// Comma-separated list of generated corpora.
    #[arg(long)]
    generated: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    embedding: EmbeddingArgs,
    /// `none` or `remote`.
    #[arg(long)]
    proofreader: Option<String>,
    #[arg(long)]
    proofreader_endpoint: Option<String>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    proofreader_concurrency: Option<String>,
    /// `ngram` or `remote`.
    #[arg(long)]
    lm: Option<String>,
    #[arg(long)]
    lm_order: Option<String>,
    #[arg(long)]
    lm_addk: Option<String>,
    #[arg(long)]
    lm_endpoint: Option<String>,
    #[arg(long)]
    sample_g: Option<String>,
    #[arg(long)]
    sample_seed: Option<String>,
    /// Comma-separated prefix sizes for the uniqueness curves.
    #[arg(long)]
    checkpoints: Option<String>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[command(flatten)]
    corpora: CorpusArgs,
    #[arg(long)]
    generated: Option<String>,
    /// Points CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    embedding: EmbeddingArgs,
    /// Histogram bins as `XxY`.
    #[arg(long, requires = "grid_out")]
    grid: Option<String>,
    #[arg(long, requires = "grid")]
    grid_out: Option<PathBuf>,
    /// Thresholds as `SEM,SYN`.
    #[arg(long, requires = "filtered_out")]
    filter: Option<String>,
    #[arg(long, requires = "filter")]
    filtered_out: Option<PathBuf>,
    #[arg(long, default_value = "max")]
    axis_aggregation: String,
}

#[derive(Args)]
struct HumanStatsArgs {
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long)]
    metric_scores: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Metric column correlated with the `general` rating; defaults to the first.
    #[arg(long)]
    metric: Option<String>,
    /// `per-rating` or `per-sentence-mean`.
    #[arg(long, default_value = "per-rating")]
    likert_mode: String,
}

#[derive(Args)]
struct StatsArgs {
    /// `welch`, `pooled`, `mann-whitney` or `spearman`.
    #[arg(long, default_value = "welch")]
    test: String,
    a: PathBuf,
    b: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Config { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage<T>(message: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(message.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Split(a) => split(a),
        Command::Characterize(a) => characterize(a),
        Command::Tradeoff(a) => tradeoff(a),
        Command::HumanStats(a) => run_human_stats(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn runtime<T>(r: corpus_scope::Result<T>) -> CliResult<T> {
    r.map_err(Failure::Runtime)
}

fn require_files<'a>(paths: impl IntoIterator<Item = &'a Path>) -> CliResult {
    for p in paths {
        if !p.is_file() {
            return usage(format!("input file {} does not exist", p.display()));
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> CliResult {
    runtime(fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    runtime(fs::write(path, contents).map_err(|e| Error::io(path, e)))
}

fn split(a: SplitArgs) -> CliResult {
    require_files([a.input.as_path()])?;
    let format: InputFormat = a.format.parse()?;
    let ratios: SplitRatios = a.ratios.parse()?;
    let corpus = runtime(load_corpus(&a.input, &format, Role::Train, stem(&a.input)))?;
    let (train, valid, test) = runtime(split_corpus(&corpus, ratios, a.seed))?;
    create_dir(&a.out)?;
    for (file, part) in [
        ("train.txt", &train),
        ("valid.txt", &valid),
        ("test.txt", &test),
    ] {
        let mut text = String::new();
        for s in part.raw_sentences() {
            text.push_str(s);
            text.push('\n');
        }
        write_file(&a.out.join(file), &text)?;
    }
    eprintln!(
        "split {} sentences into {}/{}/{}",
        corpus.len(),
        train.len(),
        valid.len(),
        test.len()
    );
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn settings(corpora: &CorpusArgs, pairs: &[(&str, &Option<String>)]) -> CliResult<Settings> {
    let base = match &corpora.config {
        Some(path) => {
            require_files([path.as_path()])?;
            Settings::load(path)?
        }
        None => Settings::default(),
    };
    let mut cli = Settings::default();
    let common = [
        ("train", &corpora.train),
        ("test", &corpora.test),
        ("format", &corpora.format),
    ];
    for (key, value) in common.iter().chain(pairs) {
        if let Some(v) = value {
            cli.set(key, v.clone());
        }
    }
    Ok(base.merged(cli))
}

fn embedding_pairs(e: &EmbeddingArgs) -> [(&'static str, &Option<String>); 8] {
    [
        ("embedding", &e.embedding),
        ("embed-endpoint", &e.embed_endpoint),
        ("embed-dim", &e.embed_dim),
        ("embed-seed", &e.embed_seed),
        ("embed-batch", &e.embed_batch),
        ("cache-dir", &e.cache_dir),
        ("http-attempts", &e.http_attempts),
        ("http-timeout-secs", &e.http_timeout_secs),
    ]
}

fn resolve(s: &Settings) -> CliResult<RunConfig> {
    let env = std::env::var(CACHE_ENV).ok();
    let config = RunConfig::resolve(s, env.as_deref())?;
    require_files(config.input_files())?;
    Ok(config)
}

fn policy(c: &RunConfig) -> RetryPolicy {
    RetryPolicy {
        attempts: c.http_attempts,
        timeout: Duration::from_secs(c.http_timeout_secs),
        ..RetryPolicy::default()
    }
}

fn embedder(c: &RunConfig) -> CliResult<Box<dyn EmbeddingBackend>> {
    let inner: Box<dyn EmbeddingBackend> = match &c.embedding {
        EmbeddingConfig::Builtin { dim, seed } => Box::new(FeatureHashEmbedder::new(*dim, *seed)?),
        EmbeddingConfig::Remote {
            endpoint,
            batch_size,
        } => Box::new(runtime(RemoteEmbedder::connect(
            endpoint,
            *batch_size,
            policy(c),
        ))?),
    };
    Ok(match &c.cache_dir {
        Some(dir) => Box::new(runtime(CachedEmbedder::open(inner, dir))?),
        None => inner,
    })
}

struct Loaded {
    train: Corpus,
    test: Corpus,
    generated: Vec<Corpus>,
}

fn load(c: &RunConfig) -> CliResult<Loaded> {
    let format = c.input_format();
    let mut names = BTreeSet::new();
    let mut one = |path: &Path, role: Role| -> CliResult<Corpus> {
        let name = stem(path);
        if !names.insert(name.clone()) {
            return usage(format!(
                "two corpora would both be named `{name}`; rename one file"
            ));
        }
        runtime(load_corpus(path, &format, role, name))
    };
    let train = one(&c.train, Role::Train)?;
    let test = one(&c.test, Role::Test)?;
    if let Some(valid) = &c.valid {
        one(valid, Role::Validation)?;
    }
    let generated = c
        .generated
        .iter()
        .map(|p| one(p, Role::Generated))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Loaded {
        train,
        test,
        generated,
    })
}

fn characterize(a: CharacterizeArgs) -> CliResult {
    let mut pairs = vec![
        ("valid", &a.valid),
        ("generated", &a.generated),
        ("proofreader", &a.proofreader),
        ("proofreader-endpoint", &a.proofreader_endpoint),
        ("language", &a.language),
        ("proofreader-concurrency", &a.proofreader_concurrency),
        ("lm", &a.lm),
        ("lm-order", &a.lm_order),
        ("lm-addk", &a.lm_addk),
        ("lm-endpoint", &a.lm_endpoint),
        ("sample-g", &a.sample_g),
        ("sample-seed", &a.sample_seed),
        ("checkpoints", &a.checkpoints),
    ];
    pairs.extend(embedding_pairs(&a.embedding));
    let config = resolve(&settings(&a.corpora, &pairs)?)?;
    let corpora = load(&config)?;

    let embedder = embedder(&config)?;
    let proofreader: Option<Box<dyn Proofreader>> = match &config.proofreader {
        ProofreaderConfig::None => None,
        ProofreaderConfig::Remote {
            endpoint,
            language,
            concurrency,
        } => Some(Box::new(
            runtime(LanguageToolClient::new(endpoint, language, policy(&config)))?
                .with_concurrency(*concurrency),
        )),
    };
    let language_model: Box<dyn LanguageModel> = match &config.plausibility {
        PlausibilityConfig::Ngram { order, add_k } => {
            Box::new(NGramModel::train(&corpora.train, *order, *add_k)?)
        }
        PlausibilityConfig::Remote { endpoint } => Box::new(runtime(RemoteLanguageModel::new(
            endpoint,
            policy(&config),
        ))?),
    };
    let backends = Backends {
        embedder: embedder.as_ref(),
        proofreader: proofreader.as_deref(),
        language_model: language_model.as_ref(),
    };

    let out = runtime(assemble_report(
        &corpora.train,
        &corpora.test,
        &corpora.generated,
        &ReportOptions::from(&config),
        &backends,
    ))?;
    create_dir(&a.out)?;
    let report = Report::new(out.rows, config);
    for format in [
        ReportFormat::Json,
        ReportFormat::Markdown,
        ReportFormat::Csv,
    ] {
        let path = a.out.join(format!("report.{}", format.extension()));
        runtime(write_report(&report, format, &path))?;
    }
    let mut buf = Vec::new();
    runtime(write_sentence_scores_csv(&out.sentence_scores, &mut buf))?;
    write_file(
        &a.out.join("sentence_scores.csv"),
        &String::from_utf8_lossy(&buf),
    )?;
    let mut buf = Vec::new();
    runtime(write_curves_csv(&out.curves, &mut buf))?;
    write_file(
        &a.out.join("uniqueness_curves.csv"),
        &String::from_utf8_lossy(&buf),
    )?;
    print!("{}", corpus_scope::report::render_markdown(&report.rows));
    Ok(())
}

fn parse_pair<T: std::str::FromStr>(value: &str, sep: char, what: &str) -> CliResult<(T, T)> {
    let parsed = value
        .split_once(sep)
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some(p) => Ok(p),
        None => usage(format!("{what} must look like `A{sep}B`, got `{value}`")),
    }
}

fn tradeoff(a: TradeoffArgs) -> CliResult {
    let aggregation: Aggregation = a.axis_aggregation.parse()?;
    let grid = a
        .grid
        .as_deref()
        .map(|g| parse_pair::<usize>(g, 'x', "--grid"))
        .transpose()?;
    let filter = a
        .filter
        .as_deref()
        .map(|f| parse_pair::<f64>(f, ',', "--filter"))
        .transpose()?;
    let mut pairs = vec![("generated", &a.generated)];
    pairs.extend(embedding_pairs(&a.embedding));
    let config = resolve(&settings(&a.corpora, &pairs)?)?;
    if config.generated.len() != 1 {
        return usage("tradeoff takes exactly one generated corpus");
    }
    let corpora = load(&config)?;
    let embedder = embedder(&config)?;
    let points = runtime(compute_tradeoff(
        &corpora.generated[0],
        &corpora.test,
        &corpora.train,
        embedder.as_ref(),
        aggregation,
    ))?;

    let write_csv =
        |path: &Path, f: &dyn Fn(&mut Vec<u8>) -> corpus_scope::Result<()>| -> CliResult {
            let mut buf = Vec::new();
            runtime(f(&mut buf))?;
            runtime(fs::write(path, buf).map_err(|e| Error::io(path, e)))
        };
    write_csv(&a.out, &|buf| write_points_csv(&points, buf))?;
    if let (Some((x, y)), Some(path)) = (grid, &a.grid_out) {
        let grid = density_grid(&points, x, y)?;
        write_csv(path, &|buf| write_grid_csv(&grid, buf))?;
    }
    if let (Some((sem, syn)), Some(path)) = (filter, &a.filtered_out) {
        let mut text = String::new();
        for id in filter_upper_right(&points, sem, syn) {
            text.push_str(&id.to_string());
            text.push('\n');
        }
        write_file(path, &text)?;
    }
    Ok(())
}

fn run_human_stats(a: HumanStatsArgs) -> CliResult {
    require_files([a.ratings.as_path(), a.metric_scores.as_path()])?;
    let mode: LikertMode = a.likert_mode.parse()?;
    let ratings = runtime(load_ratings(&a.ratings))?;
    let scores = runtime(load_metric_scores(&a.metric_scores))?;
    let result = runtime(human_stats(&ratings, &scores, mode, a.metric.as_deref()))?;
    let mut json = serde_json::to_string_pretty(&result).expect("stats serialize");
    json.push('\n');
    write_file(&a.out, &json)
}

fn read_sample(path: &Path) -> CliResult<SampleVec> {
    let text = runtime(fs::read_to_string(path).map_err(|e| Error::io(path, e)))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                return Err(Failure::Runtime(Error::Parse {
                    message: format!("{}:{}: `{line}` is not a number", path.display(), i + 1),
                }))
            }
        }
    }
    runtime(SampleVec::new(values))
}

fn stats(a: StatsArgs) -> CliResult {
    require_files([a.a.as_path(), a.b.as_path()])?;
    let test = match a.test.as_str() {
        "welch" => welch_t_test,
        "pooled" => pooled_t_test,
        "mann-whitney" => mann_whitney_u,
        "spearman" => spearman,
        other => return usage(format!("unknown test `{other}`")),
    };
    let (x, y) = (read_sample(&a.a)?, read_sample(&a.b)?);
    let result = runtime(test(&x, &y))?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&result).expect("result serializes")
    );
    Ok(())
}
