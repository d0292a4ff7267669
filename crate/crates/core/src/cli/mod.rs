//! Command-line pipeline: `init → run → export → evaluate → rank → report`,
//! plus `stats`, `reliability` and `prime`. Commands talk to each other
//! only through files in the configured output directory.

pub mod config;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    corpus_stats, emit_report, kfold_reliability, priming_experiment, AnalysisError, CorpusStats, Panel,
    ReliabilityReport, ReportFormat,
};
use crate::backends::{BackendError, Ledger, Registry};
use crate::elicitation::{ElicitError, ElicitedResponse, Elicitor, Templates};
use crate::optimizer::store::{read_json, read_jsonl, write_json, write_jsonl};
use crate::optimizer::{export_benchmark, parse_seeds, OptError, Optimizer, QuestionRecord, QuestionStatus, RunFiles};
use crate::ranking::{leaderboard_csv, process_run, response_table, RankError, Ratings, RankingOutput};
use crate::scoring::{Embedder, ScoreError};
use crate::values::{ValueSystem, ValuesError};

pub use config::{sha256_hex, Config, Paths, Pools};

/// Exit-code class of a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Backend,
    Data,
}

impl Kind {
    pub fn code(self) -> i32 {
        match self {
            Kind::Config => 2,
            Kind::Backend => 3,
            Kind::Data => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: Kind,
    /// Command that failed; filled in by [`execute`].
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError { kind, stage: String::new(), message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self::new(Kind::Data, message)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

fn elicit_kind(e: &ElicitError) -> Kind {
    match e {
        ElicitError::Backend(_) => Kind::Backend,
        ElicitError::MissingBinding { .. } => Kind::Config,
        _ => Kind::Data,
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        let kind = match e {
            BackendError::InvalidSpec(_) | BackendError::UnknownBackend(_) => Kind::Config,
            _ => Kind::Backend,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<ElicitError> for CliError {
    fn from(e: ElicitError) -> Self {
        CliError::new(elicit_kind(&e), e.to_string())
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        let kind = match &e {
            OptError::Backend(_) | OptError::Score(ScoreError::Backend(_)) => Kind::Backend,
            OptError::Elicit(inner) => elicit_kind(inner),
            OptError::Config(_) => Kind::Config,
            _ => Kind::Data,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        let kind = if matches!(e, RankError::Config(_)) { Kind::Config } else { Kind::Data };
        CliError::new(kind, e.to_string())
    }
}

impl From<ValuesError> for CliError {
    fn from(e: ValuesError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Backend(b) => b.into(),
            AnalysisError::Elicit(x) => x.into(),
            AnalysisError::Rank(r) => r.into(),
            AnalysisError::Store(o) => o.into(),
            other => CliError::data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adaem", version, about = "Bandit-driven value-evaluation benchmark builder")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "adaem.toml")]
    pub config: PathBuf,
    /// Overrides `paths.out_dir`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides `run.seed`; also seeds the reliability folds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Score the seed questions and create the question store.
    Init {
        /// Seed file: one question per line, or JSON lines with `text` and `topic`.
        seeds: Option<PathBuf>,
    },
    /// Spend the pull budget.
    Run {
        /// Continue from the last checkpoint.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        budget: Option<usize>,
        /// Stop after this many pulls in this invocation.
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Write the benchmark: highest-scoring live questions.
    Export {
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Ask every evaluated model every benchmark question.
    Evaluate,
    /// Fold the responses into ratings and a leaderboard.
    Rank {
        /// Continue from the saved ratings.
        #[arg(long)]
        resume: bool,
    },
    /// Render the leaderboard.
    Report {
        #[arg(long, value_delimiter = ',', default_value = "csv,json-doc,radar-svg")]
        format: Vec<String>,
    },
    /// Corpus statistics of the benchmark against the seed questions.
    Stats,
    /// Leaderboard agreement across random question folds.
    Reliability {
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Boost one mock persona toward a dimension and measure the shift.
    Prime {
        #[arg(long)]
        persona: String,
        #[arg(long)]
        dim: String,
        #[arg(long)]
        boost: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Init { .. } => "init",
            Command::Run { .. } => "run",
            Command::Export { .. } => "export",
            Command::Evaluate => "evaluate",
            Command::Rank { .. } => "rank",
            Command::Report { .. } => "report",
            Command::Stats => "stats",
            Command::Reliability { .. } => "reliability",
            Command::Prime { .. } => "prime",
        }
    }
}

/// File names inside the output directory.
pub mod files {
    pub const STORE: &str = "questions.jsonl";
    pub const CHECKPOINT: &str = "checkpoint.json";
    pub const RUN_SUMMARY: &str = "run_summary.json";
    pub const BENCHMARK: &str = "benchmark.jsonl";
    pub const RESPONSES: &str = "responses.jsonl";
    pub const RATINGS: &str = "ratings.json";
    pub const LEADERBOARD: &str = "leaderboard.json";
    pub const LEADERBOARD_CSV: &str = "leaderboard.csv";
    pub const STATS: &str = "stats.json";
    pub const RELIABILITY: &str = "reliability.json";
    pub const PRIMING: &str = "priming.json";
    pub const MANIFEST: &str = "manifest.json";
    pub const LOCK: &str = "adaem.lock";
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        let path = dir.join(files::LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::data(format!(
                "{} is locked by another adaem process (delete {} if none is running)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::data(format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// What produced the files in an output directory, per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub argv: Vec<String>,
    pub version: String,
    pub seed: u64,
    pub value_system: String,
    pub config_sha256: String,
    /// Verbatim configuration text.
    pub config: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub type Manifest = BTreeMap<String, ManifestEntry>;

fn write_manifest(dir: &Path, command: &str, entry: ManifestEntry) -> Result<(), CliError> {
    let path = dir.join(files::MANIFEST);
    let mut m: Manifest = if path.exists() { read_json(&path)? } else { Manifest::new() };
    m.insert(command.to_string(), entry);
    Ok(write_json(&path, &m)?)
}

/// Loaded configuration plus everything derived from it.
pub struct Context {
    pub cfg: Config,
    pub system: Arc<ValueSystem>,
    pub templates: Arc<Templates>,
    pub seed: u64,
}

impl Context {
    pub fn new(mut cfg: Config, seed: Option<u64>) -> Result<Self, CliError> {
        if let Some(s) = seed {
            cfg.run.seed = s;
        }
        let system = Arc::new(cfg.system()?);
        let templates = match &cfg.paths.templates {
            Some(dir) => Templates::load_dir(dir).map_err(|e| CliError::new(Kind::Config, e.to_string()))?,
            None => Templates::builtin(),
        };
        Ok(Context { seed: cfg.run.seed, cfg, system, templates: Arc::new(templates) })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.paths.out_dir.join(name)
    }

    pub fn registry(&self) -> Result<Arc<Registry>, CliError> {
        let ledger = Ledger::open(self.cfg.ledger_path()).map_err(|e| CliError::data(e.to_string()))?;
        Ok(Arc::new(Registry::from_specs(&self.cfg.backends, &self.system)?.with_ledger(Arc::new(ledger))))
    }

    pub fn elicitor(&self, registry: Arc<Registry>) -> Elicitor {
        let mut e = Elicitor::new(registry, self.templates.clone(), self.system.clone(), &self.cfg.pools.judge)
            .with_points(self.cfg.run.points);
        e.length_words = self.cfg.run.length_words;
        e
    }

    pub fn embedder(&self, registry: &Arc<Registry>) -> Embedder {
        match &self.cfg.pools.embed {
            Some(id) => Embedder::backend(registry.clone(), id),
            None => Embedder::hashed(),
        }
    }

    pub fn panel(&self) -> Panel {
        Panel {
            specs: self.cfg.backends.clone(),
            system: self.system.clone(),
            templates: self.templates.clone(),
            judge: self.cfg.pools.judge.clone(),
            models: self.cfg.evaluated_models(),
            points: self.cfg.run.points,
        }
    }

    fn require(&self, name: &str, producer: &str) -> Result<PathBuf, CliError> {
        let p = self.out(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::data(format!("{} not found: run `adaem {producer}` first", p.display())))
        }
    }

    fn benchmark(&self) -> Result<Vec<QuestionRecord>, CliError> {
        Ok(read_jsonl(&self.require(files::BENCHMARK, "export")?)?)
    }

    fn responses(&self) -> Result<Vec<ElicitedResponse>, CliError> {
        Ok(read_jsonl(&self.require(files::RESPONSES, "evaluate")?)?)
    }
}

fn pairs(records: &[QuestionRecord]) -> Vec<(String, String)> {
    records.iter().map(|q| (q.id.clone(), q.text.clone())).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

/// Runs one command against a loaded context; returns its printable result.
pub fn run_command(ctx: &Context, command: &Command) -> Result<Value, CliError> {
    let c = &ctx.cfg;
    match command {
        Command::Init { seeds } => {
            let path = seeds
                .clone()
                .or_else(|| c.paths.seeds.clone())
                .ok_or_else(|| CliError::new(Kind::Config, "no seed file given and `paths.seeds` is unset"))?;
            let text = fs::read_to_string(&path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let rows = parse_seeds(&text)?;
            let registry = ctx.registry()?;
            let (elicitor, embedder) = (ctx.elicitor(registry.clone()), ctx.embedder(&registry));
            let opt = Optimizer::new(c.run_config(), c.similarity.clone(), &elicitor, &embedder);
            let files = RunFiles::in_dir(&c.paths.out_dir);
            if files.checkpoint.exists() {
                return Err(CliError::data(format!("{} already exists", files.checkpoint.display())));
            }
            let mut state = opt.ingest_seeds(&rows)?;
            opt.persist_initial(&mut state, &files)?;
            let seeds: Vec<&QuestionRecord> = state.records().collect();
            Ok(json!({
                "run_id": state.run_id,
                "seeds": seeds.len(),
                "duplicates": seeds.iter().filter(|q| q.status == QuestionStatus::Duplicate).count(),
                "arms": state.arms.len(),
            }))
        }
        Command::Run { resume, budget, stop_after } => {
            let files = RunFiles::in_dir(&c.paths.out_dir);
            ctx.require(files::CHECKPOINT, "init")?;
            let mut state = files.resume()?;
            if !resume && state.pulls_done > 0 {
                return Err(CliError::data(format!(
                    "checkpoint already has {} pulls: pass --resume to continue",
                    state.pulls_done
                )));
            }
            let cfg = c.run_config();
            if state.run_id != cfg.run_id() {
                return Err(CliError::new(
                    Kind::Config,
                    format!("checkpoint belongs to {}, this configuration is {}", state.run_id, cfg.run_id()),
                ));
            }
            if let Some(b) = budget {
                state.budget = *b;
            }
            let registry = ctx.registry()?;
            let (elicitor, embedder) = (ctx.elicitor(registry.clone()), ctx.embedder(&registry));
            let opt = Optimizer::new(cfg, c.similarity.clone(), &elicitor, &embedder);
            let summary = opt.run(&mut state, Some(&files), *stop_after)?;
            write_json(&ctx.out(files::RUN_SUMMARY), &summary)?;
            Ok(to_value(&summary))
        }
        Command::Export { top_n, threshold } => {
            ctx.require(files::STORE, "init")?;
            let store = RunFiles::in_dir(&c.paths.out_dir).store;
            let latest = store.latest()?;
            let rows = export_benchmark(latest.values(), *threshold, *top_n);
            write_jsonl(&ctx.out(files::BENCHMARK), &rows)?;
            Ok(json!({ "exported": rows.len(), "path": ctx.out(files::BENCHMARK) }))
        }
        Command::Evaluate => {
            let bench = ctx.benchmark()?;
            let elicitor = ctx.elicitor(ctx.registry()?);
            let models = c.evaluated_models();
            let responses = elicitor.evaluate(&models, &pairs(&bench))?;
            write_jsonl(&ctx.out(files::RESPONSES), &responses)?;
            Ok(json!({ "questions": bench.len(), "models": models, "responses": responses.len() }))
        }
        Command::Rank { resume } => {
            let responses = ctx.responses()?;
            let table = response_table(&responses);
            let ratings_path = ctx.out(files::RATINGS);
            let prior = if *resume && ratings_path.exists() { Some(Ratings::load(&ratings_path)?) } else { None };
            let out = process_run(&table, &c.evaluated_models(), &ctx.system, &c.ranking, prior, Some(&ratings_path))?;
            for w in &out.warnings {
                log::warn!("{w}");
            }
            write_json(&ctx.out(files::LEADERBOARD), &out)?;
            crate::optimizer::store::write_atomic(&ctx.out(files::LEADERBOARD_CSV), leaderboard_csv(&out)?.as_bytes())?;
            Ok(to_value(&out.leaderboard))
        }
        Command::Report { format } => {
            let out: RankingOutput = read_json(&ctx.require(files::LEADERBOARD, "rank")?)?;
            let stats: Option<CorpusStats> =
                if ctx.out(files::STATS).exists() { Some(read_json(&ctx.out(files::STATS))?) } else { None };
            let rel: Option<ReliabilityReport> = if ctx.out(files::RELIABILITY).exists() {
                Some(read_json(&ctx.out(files::RELIABILITY))?)
            } else {
                None
            };
            let mut written = Vec::new();
            for f in format {
                let f: ReportFormat = f.parse().map_err(|e: AnalysisError| CliError::new(Kind::Config, e.to_string()))?;
                written.push(emit_report(&out, &ctx.system, stats.as_ref(), rel.as_ref(), f, &c.paths.out_dir)?);
            }
            Ok(json!({ "written": written }))
        }
        Command::Stats => {
            let bench = ctx.benchmark()?;
            ctx.require(files::STORE, "init")?;
            let store = RunFiles::in_dir(&c.paths.out_dir).store;
            let seeds: Vec<String> =
                store.latest()?.into_values().filter(|q| q.status == QuestionStatus::Seed).map(|q| q.text).collect();
            let texts: Vec<String> = bench.into_iter().map(|q| q.text).collect();
            let registry = ctx.registry()?;
            let stats = corpus_stats(&texts, &seeds, &ctx.embedder(&registry))?;
            write_json(&ctx.out(files::STATS), &stats)?;
            Ok(to_value(&stats))
        }
        Command::Reliability { folds } => {
            let table = response_table(&ctx.responses()?);
            let report = kfold_reliability(&table, *folds, ctx.seed, &c.evaluated_models(), &ctx.system, &c.ranking)?;
            write_json(&ctx.out(files::RELIABILITY), &report)?;
            Ok(to_value(&report))
        }
        Command::Prime { persona, dim, boost } => {
            let bench = ctx.benchmark()?;
            let report = priming_experiment(&ctx.panel(), &pairs(&bench), persona, dim, *boost, &c.ranking)?;
            write_json(&ctx.out(files::PRIMING), &report)?;
            Ok(to_value(&report))
        }
    }
}

/// Loads the configuration, takes the directory lock, runs the command and
/// records the manifest entry.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<Value, CliError> {
    let stage = cli.command.name();
    let tag = |mut e: CliError| {
        e.stage = stage.to_string();
        e
    };
    let (mut cfg, text) = Config::load(&cli.config).map_err(tag)?;
    if let Some(dir) = &cli.out_dir {
        cfg.paths.out_dir = dir.clone();
    }
    let ctx = Context::new(cfg, cli.seed).map_err(tag)?;
    let _lock = DirLock::acquire(&ctx.cfg.paths.out_dir).map_err(tag)?;
    let result = run_command(&ctx, &cli.command).map_err(tag);
    let entry = ManifestEntry {
        argv: argv.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: ctx.seed,
        value_system: ctx.system.name().to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        config: text,
        ok: result.is_ok(),
        error: result.as_ref().err().map(|e| e.message.clone()),
    };
    write_manifest(&ctx.cfg.paths.out_dir, stage, entry).map_err(tag)?;
    result
}

/// Binary entry point; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match execute(&cli, &argv) {
        Ok(v) => {
            // a closed pipe (`| head`) is not a failure
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&v).expect("json"));
            0
        }
        Err(e) => {
            eprintln!("adaem {}: {e}", e.stage);
            e.kind.code()
        }
    }
}
