//! Command-line frontend.
//!
//! Machine-readable output goes to stdout as JSON; diagnostics go to stderr.
//!
//! | Exit | Meaning                          |
//! |------|----------------------------------|
//! | 0    | success                          |
//! | 1    | I/O, decode or parse failure     |
//! | 2    | level over the block budget      |
//! | 3    | level failed the support check   |
//! | 64   | bad usage                        |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sketchlevel_core::levelgen::{GenerateError, GenerationConfig, WorldMapping};
use sketchlevel_core::levelxml::from_document;
use sketchlevel_core::stability::check_support;

use crate::files::{load_template_set, load_therapy};
use crate::pipeline::{Pipeline, PipelineError};
use crate::service::{router, serve, AppState};
use crate::store::{atomic_write, Store};

/// Success.
pub const EXIT_OK: i32 = 0;
/// I/O, decode or parse failure.
pub const EXIT_IO: i32 = 1;
/// Level over the block budget.
pub const EXIT_BUDGET: i32 = 2;
/// Level failed the support check.
pub const EXIT_UNSTABLE: i32 = 3;
/// Bad usage.
pub const EXIT_USAGE: i32 = 64;

/// Default service address.
pub const DEFAULT_BIND: &str = "127.0.0.1:8787";
/// Default store directory.
pub const DEFAULT_STORE: &str = "./data";

#[derive(Debug, Parser)]
#[command(name = "sketchlevel", version, about = "Turn drawings into Science Birds levels")]
struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a level file from a drawing.
    Generate {
        /// PNG or PGM drawing.
        #[arg(long)]
        input: PathBuf,
        /// Level file to write.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Print the five most similar template classes for a drawing.
    Recognize {
        /// PNG or PGM drawing.
        #[arg(long)]
        input: PathBuf,
        /// Binarization threshold.
        #[arg(long)]
        threshold: Option<u8>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Check that every block in a level file is supported.
    Validate {
        /// Level file.
        #[arg(long)]
        level: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        /// Listen address.
        #[arg(long, env = "SKETCHLEVEL_BIND", default_value = DEFAULT_BIND)]
        bind: SocketAddr,
        /// Store directory.
        #[arg(long, env = "SKETCHLEVEL_STORE", default_value = DEFAULT_STORE)]
        store: PathBuf,
        /// Allowed CORS origins, comma separated, or `*`.
        #[arg(long, env = "SKETCHLEVEL_CORS_ORIGIN", default_value = "*")]
        cors_origin: String,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        data: DataArgs,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Seed for TNT conversion.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-block TNT chance in [0, 1].
    #[arg(long, value_parser = parse_probability)]
    tnt_prob: Option<f64>,
    /// Binarization threshold.
    #[arg(long)]
    threshold: Option<u8>,
    /// Grid size as COLSxROWS.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Pigs to place on top of the tallest columns.
    #[arg(long)]
    pigs: Option<usize>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Template set JSON; the built-in starter set when absent.
    #[arg(long, env = "SKETCHLEVEL_MODEL")]
    model: Option<PathBuf>,
    /// Feedback template JSON; needs --praise-words and --negative-words too.
    #[arg(long, env = "SKETCHLEVEL_THERAPY_TEMPLATES", requires_all = ["praise_words", "negative_words"])]
    therapy_templates: Option<PathBuf>,
    /// Praise lexicon, one entry per line.
    #[arg(long, env = "SKETCHLEVEL_PRAISE_WORDS", requires = "therapy_templates")]
    praise_words: Option<PathBuf>,
    /// Negative lexicon, one entry per line.
    #[arg(long, env = "SKETCHLEVEL_NEGATIVE_WORDS", requires = "therapy_templates")]
    negative_words: Option<PathBuf>,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err("must be in [0, 1]".into())
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (c, r) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| "expected COLSxROWS, e.g. 16x10".to_string())?;
    let c: usize = c.parse().map_err(|_| format!("bad column count {c:?}"))?;
    let r: usize = r.parse().map_err(|_| format!("bad row count {r:?}"))?;
    if c == 0 || r == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((c, r))
}

impl GenArgs {
    fn apply(&self, cfg: &mut GenerationConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.tnt_prob {
            cfg.tnt_prob = p;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some((c, r)) = self.grid {
            cfg.cols = c;
            cfg.rows = r;
        }
        if let Some(n) = self.pigs {
            cfg.pigs = n;
        }
    }
}

/// A failed command: exit code plus message for stderr.
struct Failure(i32, String);

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_IO, format!("{}: {e}", path.display()))
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e {
            PipelineError::Generate(GenerateError::OverBudget { .. }) => EXIT_BUDGET,
            PipelineError::Generate(GenerateError::InvalidConfig(_)) => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Failure(code, e.to_string())
    }
}

fn pipeline(data: &DataArgs) -> Result<Pipeline, Failure> {
    let mut p = Pipeline::default();
    if let Some(path) = &data.model {
        p.model = load_template_set(path).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    }
    if let (Some(t), Some(praise), Some(neg)) = (&data.therapy_templates, &data.praise_words, &data.negative_words) {
        p.therapy = load_therapy(t, praise, neg).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    }
    Ok(p)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| io_failure(path, e))
}

fn print_json(value: &serde_json::Value) {
    let mut out = std::io::stdout().lock();
    // A closed stdout is not worth a different exit code.
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn generate(verbose: bool, input: &Path, output: &Path, gen: &GenArgs, data: &DataArgs) -> Result<i32, Failure> {
    let p = pipeline(data)?;
    let mut cfg = p.config.clone();
    gen.apply(&mut cfg);
    let bytes = read(input)?;
    let out = p.generate(&bytes, &cfg)?;
    atomic_write(output, out.xml.as_bytes()).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    if verbose {
        eprintln!(
            "{}: {} blocks, seed {}, wrote {}",
            input.display(),
            out.stats.total_blocks,
            cfg.seed,
            output.display()
        );
    }
    print_json(&json!({
        "output": output.display().to_string(),
        "recognition": out.recognition,
        "stats": out.stats,
        "stability": out.stability,
    }));
    Ok(EXIT_OK)
}

fn recognize(input: &Path, threshold: Option<u8>, data: &DataArgs) -> Result<i32, Failure> {
    let p = pipeline(data)?;
    let mut cfg = p.config.clone();
    if let Some(t) = threshold {
        cfg.threshold = t;
    }
    let result = p.recognize(&read(input)?, &cfg)?;
    print_json(&serde_json::to_value(&result).expect("results serialize"));
    Ok(EXIT_OK)
}

fn validate(level: &Path) -> Result<i32, Failure> {
    let bytes = read(level)?;
    let text = String::from_utf8(bytes).map_err(|e| io_failure(level, e))?;
    let doc = crate::xml::parse(&text).map_err(|e| io_failure(level, e))?;
    let spec = from_document(&doc, &WorldMapping::default()).map_err(|e| io_failure(level, e))?;
    let report = check_support(&spec);
    print_json(&serde_json::to_value(&report).expect("reports serialize"));
    if report.stable {
        Ok(EXIT_OK)
    } else {
        for v in &report.violations {
            eprintln!("unsupported block at column {}, row {} ({:?})", v.col, v.row, v.reason);
        }
        Ok(EXIT_UNSTABLE)
    }
}

fn run_serve(
    bind: SocketAddr,
    store_root: &Path,
    cors_origin: &str,
    gen: &GenArgs,
    data: &DataArgs,
) -> Result<i32, Failure> {
    let mut p = pipeline(data)?;
    gen.apply(&mut p.config);
    p.config.validate().map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
    let store = Store::open(store_root).map_err(|e| Failure(EXIT_IO, e.to_string()))?;

    let source = |path: &Option<PathBuf>, builtin: &str| {
        path.as_ref()
            .map_or_else(|| builtin.to_string(), |p| p.display().to_string())
    };
    eprintln!("sketchlevel serve");
    eprintln!("  bind              {bind}");
    eprintln!("  store             {}", store.levels_dir().display());
    eprintln!("  cors origin       {cors_origin}");
    eprintln!("  model             {}", source(&data.model, "built-in starter set"));
    eprintln!("  classes           {}", p.model.classes.len());
    eprintln!("  therapy templates {}", source(&data.therapy_templates, "built-in"));
    eprintln!("  praise words      {}", source(&data.praise_words, "built-in"));
    eprintln!("  negative words    {}", source(&data.negative_words, "built-in"));
    eprintln!("  hard cutoff       {}", p.therapy.hard_cutoff());
    let c = &p.config;
    eprintln!("  grid              {}x{}", c.cols, c.rows);
    eprintln!("  threshold         {}", c.threshold);
    eprintln!("  fill ratio        {}", c.fill_ratio);
    eprintln!("  tnt prob          {}", c.tnt_prob);
    eprintln!("  seed              {}", c.seed);
    eprintln!("  max blocks        {}", c.max_blocks);
    eprintln!("  birds             {}", c.birds);
    eprintln!("  pigs              {}", c.pigs);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    let cors = cors_origin.to_string();
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| Failure(EXIT_IO, format!("{bind}: {e}")))?;
        let local = listener.local_addr().map_err(|e| Failure(EXIT_IO, e.to_string()))?;
        eprintln!("listening on http://{local}");
        let app = router(Arc::new(AppState { pipeline: p, store }), Some(&cors));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve(listener, app, shutdown)
            .await
            .map_err(|e| Failure(EXIT_IO, e.to_string()))
    })?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Generate {
            input,
            output,
            gen,
            data,
        } => generate(cli.verbose, input, output, gen, data),
        Command::Recognize { input, threshold, data } => recognize(input, *threshold, data),
        Command::Validate { level } => validate(level),
        Command::Serve {
            bind,
            store,
            cors_origin,
            gen,
            data,
        } => run_serve(*bind, store, cors_origin, gen, data),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            eprintln!("sketchlevel: {message}");
            code
        }
    }
}
