//! `lyr`: validate aligned lyric corpora, compute metrics, build training
//! data and genre reports.
//!
//! Exit codes: 0 success, 1 data violations, 2 usage, configuration or I/O
//! errors.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lyr_core::corpus::{self, AlignedSong, CorpusError};
use lyr_core::phonetics::{JamoTable, Phonemizer};
use lyr_core::preprocess::{self, EmitOptions, Scheme, SylMode, TrainingInput};
use lyr_core::report::{self, Backends, MetricSet, ReportOptions, Variant};
use lyr_core::scd::{corpus_scd, SongLines};
use lyr_core::semantics::{CoherenceScorer, EmbeddingBackend, TranslationBackend};
use lyr_core::{PronouncingDict, Real, SyllableCounter};
use serde::Deserialize;

use config::Config;

#[derive(Parser)]
#[command(name = "lyr", version, about = "Aligned Korean–English lyric corpus tools")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pronouncing dictionary (CMUdict format). Falls back to $LYR_DICT, then the bundled subset.
    #[arg(long, global = true)]
    dict: Option<PathBuf>,
    /// Worker threads for per-song work. Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check alignment invariants; prints one violation per line.
    Validate { corpus: Option<PathBuf> },
    /// Dataset statistics as JSON.
    Stats {
        corpus: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute selected metrics.
    Metrics(MetricsArgs),
    /// Build a JSONL training file.
    Preprocess(PreprocessArgs),
    /// Per-genre report with every metric.
    Report(ReportArgs),
    /// Per-line similarity values for density plots (CSV).
    Density {
        corpus: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = VariantArg::Both)]
        variant: VariantArg,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Sem,
    Pho,
    Scd,
    Nsp,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Included,
    Excluded,
    Both,
}

impl VariantArg {
    fn variants(self) -> Vec<Variant> {
        match self {
            VariantArg::Included => vec![Variant::Included],
            VariantArg::Excluded => vec![Variant::Excluded],
            VariantArg::Both => Variant::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AggregateArgs {
    /// Aggregate lines across songs instead of averaging per-song values.
    #[arg(long)]
    pooled: bool,
    /// Only songs with official translations.
    #[arg(long)]
    official_only: bool,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct MetricsArgs {
    /// Corpus file; defaults to `corpus` from the config.
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Which::All)]
    which: Which,
    #[command(flatten)]
    agg: AggregateArgs,
    /// Emit one row per song instead of per genre.
    #[arg(long)]
    per_song: bool,
    /// JSONL of generated lines (`{"song_id":..,"lines":[..]}`) to score
    /// against the Korean originals; only with `--which scd`.
    #[arg(long)]
    generated: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ReportArgs {
    corpus: Option<PathBuf>,
    #[command(flatten)]
    agg: AggregateArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    GeneralLine,
    GeneralSection,
    LyricsLine,
    LyricsSection,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::GeneralLine => Scheme::GeneralLine,
            SchemeArg::GeneralSection => Scheme::GeneralSection,
            SchemeArg::LyricsLine => Scheme::LyricsLine,
            SchemeArg::LyricsSection => Scheme::LyricsSection,
        }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    /// Corpus (lyrics schemes) or `kr<TAB>en` TSV (general schemes).
    input: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Omit `<SYLn>` tokens.
    #[arg(long)]
    no_syl: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep section lines in order.
    #[arg(long)]
    no_shuffle: bool,
    /// Replace the Korean side with a machine translation of the English.
    #[arg(long)]
    non_singable: bool,
    #[arg(long, default_value_t = preprocess::MAX_SEGMENTS)]
    max_segments: usize,
    #[command(flatten)]
    out: OutArgs,
}

/// Problems with the data itself rather than with how the tool was run.
#[derive(Debug)]
struct DataFailure(String);

impl std::fmt::Display for DataFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataFailure {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<DataFailure>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

struct Ctx {
    config: Config,
    counter: SyllableCounter,
    phonemizer: Phonemizer,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(n) = cli.jobs {
            if n == 0 {
                bail!("--jobs must be at least 1");
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
        }
        let dict_path = cli.dict.as_deref().or(config.dictionary.as_deref());
        let dict: Arc<PronouncingDict> = PronouncingDict::resolve(dict_path).context("loading pronouncing dictionary")?;
        let mut jamo = JamoTable::default();
        if let Some(p) = &config.jamo_table {
            jamo = jamo.load_overrides(p).context("loading jamo table")?;
        }
        Ok(Self { counter: SyllableCounter::new(dict.clone()), phonemizer: Phonemizer::new(dict, jamo), config })
    }

    fn corpus_path(&self, arg: Option<PathBuf>) -> Result<PathBuf> {
        match arg.or_else(|| self.config.corpus.clone()) {
            Some(p) => Ok(p),
            None => bail!("no corpus given and none set in the config"),
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let ctx = Ctx::new(&cli)?;
    match cli.command {
        Command::Validate { corpus } => validate(&ctx.corpus_path(corpus)?),
        Command::Stats { corpus, out } => {
            let songs = load_corpus(&ctx.corpus_path(corpus)?)?;
            let stats = corpus::corpus_stats(&songs);
            emit(&out, &(serde_json::to_string_pretty(&stats)? + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics(args) => metrics(&ctx, args),
        Command::Preprocess(args) => preprocess_cmd(&ctx, args),
        Command::Report(args) => {
            let songs = load_corpus(&ctx.corpus_path(args.corpus)?)?;
            let services = Services::build(&ctx.config, MetricSet::ALL, false)?;
            let opts = report_options(&ctx.config, &args.agg, MetricSet::ALL);
            let report = report::genre_report(&songs, &services.backends(&ctx), &opts)?;
            emit(&args.out, &render(&report, args.agg.format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Density { corpus, variant, out } => {
            let songs = load_corpus(&ctx.corpus_path(corpus)?)?;
            let emb = config::embedding(&ctx.config.embed)?;
            let tr = config::translation(&ctx.config.translate)?;
            let rows = report::density_data(&songs, emb.as_ref(), tr.as_ref(), &variant.variants())?;
            emit(&out, &report::density_csv(&rows))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn corpus_failure(path: &Path, e: CorpusError) -> anyhow::Error {
    match e {
        CorpusError::Io(_) => anyhow::Error::new(e).context(format!("reading {}", path.display())),
        other => DataFailure(format!("{}: {other}", path.display())).into(),
    }
}

fn load_corpus(path: &Path) -> Result<Vec<AlignedSong>> {
    corpus::parse_corpus(&read_bytes(path)?).map_err(|e| corpus_failure(path, e))
}

fn validate(path: &Path) -> Result<ExitCode> {
    let checked = corpus::parse_corpus_lenient(&read_bytes(path)?).map_err(|e| corpus_failure(path, e))?;
    let mut stdout = io::stdout().lock();
    let mut count = 0;
    for c in &checked {
        for v in &c.violations {
            writeln!(stdout, "{v}")?;
            count += 1;
        }
    }
    if count > 0 {
        eprintln!("{count} violation(s) in {} song(s)", checked.len());
        Ok(ExitCode::from(1))
    } else {
        eprintln!("ok: {} song(s)", checked.len());
        Ok(ExitCode::SUCCESS)
    }
}

fn emit(out: &OutArgs, content: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush().map_err(Into::into)
        }
    }
}

fn render(report: &report::MetricReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    })
}

fn report_options(config: &Config, agg: &AggregateArgs, metrics: MetricSet) -> ReportOptions {
    ReportOptions {
        metrics,
        variants: agg.variant.variants(),
        pooled: agg.pooled || config.pooled,
        official_only: agg.official_only || config.official_only,
    }
}

/// Backends needed for the selected metrics; unselected ones stay unbuilt so
/// offline metrics never touch service configuration.
struct Services {
    embedding: Option<Box<dyn EmbeddingBackend>>,
    translation: Option<Box<dyn TranslationBackend>>,
    coherence: Option<Box<dyn CoherenceScorer>>,
}

impl Services {
    fn build(config: &Config, metrics: MetricSet, need_translation: bool) -> Result<Self> {
        Ok(Self {
            embedding: metrics.sem.then(|| config::embedding(&config.embed)).transpose()?,
            translation: (metrics.sem || need_translation).then(|| config::translation(&config.translate)).transpose()?,
            coherence: metrics.nsp.then(|| config::coherence(&config.nsp)).transpose()?,
        })
    }

    fn backends<'a>(&'a self, ctx: &'a Ctx) -> Backends<'a> {
        Backends {
            embedding: self.embedding.as_deref(),
            translation: self.translation.as_deref(),
            coherence: self.coherence.as_deref(),
            phonemizer: &ctx.phonemizer,
            counter: &ctx.counter,
        }
    }
}

#[derive(Deserialize)]
struct GeneratedSong {
    song_id: String,
    lines: Vec<String>,
}

fn metrics(ctx: &Ctx, args: MetricsArgs) -> Result<ExitCode> {
    let songs = load_corpus(&ctx.corpus_path(args.corpus.clone())?)?;
    let set = match args.which {
        Which::Sem => MetricSet { sem: true, ..MetricSet::NONE },
        Which::Pho => MetricSet { pho: true, ..MetricSet::NONE },
        Which::Scd => MetricSet { scd: true, ..MetricSet::NONE },
        Which::Nsp => MetricSet { nsp: true, ..MetricSet::NONE },
        Which::All => MetricSet::ALL,
    };
    if let Some(gen_path) = &args.generated {
        if !matches!(args.which, Which::Scd) {
            bail!("--generated is only valid with --which scd");
        }
        return generated_scd(ctx, &songs, gen_path, &args);
    }
    let services = Services::build(&ctx.config, set, false)?;
    let opts = report_options(&ctx.config, &args.agg, set);
    let content = if args.per_song {
        let per_song = report::per_song_metrics(&songs, &services.backends(ctx), &opts)?;
        match args.agg.format {
            Format::Csv => report::song_metrics_csv(&per_song),
            Format::Json => serde_json::to_string_pretty(&per_song)? + "\n",
        }
    } else {
        render(&report::genre_report(&songs, &services.backends(ctx), &opts)?, args.agg.format)?
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn generated_scd(ctx: &Ctx, songs: &[AlignedSong], path: &Path, args: &MetricsArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut generated = std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let g: GeneratedSong = serde_json::from_str(line).map_err(|e| DataFailure(format!("{}:{}: {e}", path.display(), i + 1)))?;
        generated.insert(g.song_id, g.lines);
    }
    let mut series = Vec::new();
    for song in songs {
        match generated.remove(&song.song_id) {
            Some(lines) => series.push(SongLines {
                song_id: song.song_id.clone(),
                source: song.lines().map(|l| l.kr.clone()).collect(),
                generated: lines,
            }),
            None => log::warn!("song {}: no generated lines", song.song_id),
        }
    }
    let Some(result) = corpus_scd::<Real>(&series, &ctx.counter) else {
        return Err(DataFailure("no song had a scorable line pair".into()).into());
    };
    let content = match args.agg.format {
        Format::Csv => result.to_csv(),
        Format::Json => serde_json::to_string_pretty(&result)? + "\n",
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn preprocess_cmd(ctx: &Ctx, args: PreprocessArgs) -> Result<ExitCode> {
    let scheme = Scheme::from(args.scheme);
    let syl_mode = if args.no_syl { SylMode::WithoutSyl } else { SylMode::WithSyl };
    let seed = args.seed.or(ctx.config.seed).unwrap_or(0);
    let mut opts = EmitOptions::new(scheme, syl_mode, seed);
    opts.shuffle = !args.no_shuffle;
    opts.max_segments = args.max_segments;

    let (records, dropped) = if scheme.is_general() {
        if args.non_singable {
            bail!("--non-singable applies to lyrics schemes only");
        }
        let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
        let pairs = preprocess::parse_sentence_tsv(&text).map_err(|e| DataFailure(format!("{}: {e}", args.input.display())))?;
        preprocess::build_records(&TrainingInput::Sentences(&pairs), &opts, &ctx.counter)?
    } else {
        let mut songs = load_corpus(&args.input)?;
        if args.non_singable {
            let tr = config::translation(&ctx.config.translate)?;
            songs = preprocess::with_translated_sources(&songs, tr.as_ref())?;
        }
        preprocess::build_records(&TrainingInput::Corpus(&songs), &opts, &ctx.counter)?
    };
    let mut buf = Vec::new();
    preprocess::write_jsonl(&records, &mut buf)?;
    emit(&args.out, std::str::from_utf8(&buf).expect("serde_json writes UTF-8"))?;
    eprintln!("{} record(s), {dropped} dropped", records.len());
    Ok(ExitCode::SUCCESS)
}
