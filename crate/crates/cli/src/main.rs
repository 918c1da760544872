use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use scirec_core::config::RunConfig;
use scirec_core::corpus_io::{extract_documents, ContentMode};
use scirec_core::evaluation::{write_judgments, MetricParams};
use scirec_core::pipeline::{
    evaluate_command, read_recommendations, run_experiment, train_topic_model, validate, Inputs, MANIFEST_FILE,
    METRICS_FILE, RECOMMENDATIONS_FILE,
};
use scirec_core::synthetic::{load_truth, SyntheticFixture, SyntheticSpec};

/// Recommends scientific publications from users' social media streams.
#[derive(Parser)]
#[command(name = "scirec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the strategy matrix and write recommendations plus a manifest.
    Run(RunArgs),
    /// Train topic models for both content modes.
    TrainLda(TrainArgs),
    /// Compute metrics from judged recommendations.
    Evaluate(EvaluateArgs),
    /// Check the config and input files without running.
    Validate(ConfigArgs),
    /// Write a synthetic fixture with known relevance.
    Synth(SynthArgs),
    /// Label recommendations against a synthetic fixture's truth file.
    Judge(JudgeArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Reference date, YYYY-MM-DD.
    #[arg(long)]
    now: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(now) = &self.now {
            NaiveDate::parse_from_str(now, "%Y-%m-%d").with_context(|| format!("invalid --now `{now}`"))?;
            config.now = now.clone();
        }
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated strategy ids; all twelve when omitted.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    min_df: Option<usize>,
    /// Directory receiving lda_all.json and lda_title.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    recommendations: PathBuf,
    #[arg(long)]
    judgments: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 5.0)]
    theta: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    users: usize,
    #[arg(long, default_value_t = 200)]
    items_per_user: usize,
    #[arg(long, default_value_t = 1000)]
    documents: usize,
    #[arg(long, default_value_t = 200)]
    concepts: usize,
    #[arg(long, default_value_t = 2500)]
    background: usize,
    /// Users whose items all predate the sliding window.
    #[arg(long, default_value_t = 0)]
    stale_users: usize,
}

#[derive(Args)]
struct JudgeArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    recommendations: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::TrainLda(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Validate(args) => check(args),
        Command::Synth(args) => synth(args),
        Command::Judge(args) => judge(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = args.config.load()?;
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(strategies) = args.strategies {
        config.strategies = Some(strategies);
    }
    let output = run_experiment(&config)?;
    output.write(&args.out)?;
    let m = &output.manifest;
    println!(
        "{} users x {} strategies: {} served, {} unservable, {} rows",
        m.users,
        m.strategies.len(),
        m.served,
        m.unservable,
        m.recommendation_rows
    );
    println!("wrote {}", args.out.join(RECOMMENDATIONS_FILE).display());
    println!("wrote {}", args.out.join(MANIFEST_FILE).display());
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let mut config = args.config.load()?;
    if let Some(topics) = args.topics {
        config.lda.topics = topics;
    }
    if let Some(iterations) = args.iterations {
        config.lda.iterations = iterations;
    }
    if let Some(min_df) = args.min_df {
        config.lda.min_df = min_df;
    }
    let inputs = Inputs::load(&config)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for mode in ContentMode::ALL {
        let docs = extract_documents(&inputs.corpus(&config, mode)?, &inputs.normalizer, &inputs.index);
        let model = train_topic_model(&config, &docs, mode)?;
        let path = args.out.join(format!("lda_{}.json", mode.as_str().to_lowercase()));
        model.save(&path)?;
        println!(
            "{mode}: {} topics, vocabulary {}, log likelihood per token {:.4}, wrote {}",
            model.topics,
            model.vocabulary_size(),
            model.log_likelihood() / model.total_tokens() as f64,
            path.display()
        );
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    if args.k == 0 {
        bail!("--k must be at least 1");
    }
    let params = MetricParams {
        k: args.k,
        theta: args.theta,
    };
    let table = evaluate_command(&args.recommendations, &args.judgments, &params, &args.out)?;
    emit(&table.to_csv())?;
    eprintln!("wrote {}", args.out.join(METRICS_FILE).display());
    Ok(())
}

fn check(args: ConfigArgs) -> Result<()> {
    let config = args.load()?;
    let report = validate(&config);
    println!(
        "{} concepts, {} documents, {} users, {} items, {} background items, {} strategies",
        report.concepts, report.documents, report.users, report.items, report.background_items, report.strategies
    );
    if report.is_ok() {
        println!("ok");
        return Ok(());
    }
    for p in &report.problems {
        eprintln!("problem: {p}");
    }
    bail!("{} problem(s) found", report.problems.len())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        seed: args.seed,
        users: args.users,
        items_per_user: args.items_per_user,
        documents: args.documents,
        concepts: args.concepts,
        background_items: args.background,
        stale_users: args.stale_users,
        ..SyntheticSpec::default()
    };
    let fixture = SyntheticFixture::generate(&spec);
    let config = fixture
        .write(&args.out)
        .with_context(|| format!("writing fixture to {}", args.out.display()))?;
    println!("wrote fixture and config {}", config.display());
    Ok(())
}

fn judge(args: JudgeArgs) -> Result<()> {
    let truth = load_truth(&args.truth).with_context(|| format!("reading {}", args.truth.display()))?;
    let rows = read_recommendations(&args.recommendations)?;
    let judgments = truth.judge(&rows);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_file(&args.out, &write_judgments(&judgments))?;
    println!("wrote {} judgments to {}", judgments.len(), args.out.display());
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
