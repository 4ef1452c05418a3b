use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;

use autotelic_core::goals::{canonical_goals, GoalFile};
use autotelic_core::orchestrator::{
    baseline_table, evaluate, train, ModelPolicy, RunConfig, RunPaths, BASELINE_RESET_PERIOD,
};
use autotelic_core::qpolicy::{FeatureCache, QModel};
use autotelic_core::report::{self, ReportStatus};
use autotelic_core::worldsim::ScenarioConfig;

#[derive(Parser)]
#[command(name = "autotelic", version, about = "Autotelic goal-conditioned agents in a kitchen text world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration for one seed.
    Run {
        /// Preset name or path to a TOML config file.
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Environment-step budget (before a preset's budget fraction); recorded
        /// as an override when it differs from the configured value.
        #[arg(long)]
        steps: Option<u64>,
        /// Runs are written to `<out>/<config>/seed-<seed>/`.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Goal occurrences for a uniform-random agent.
    Baseline {
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = BASELINE_RESET_PERIOD)]
        reset_period: u64,
        /// Goal file (canonical goals when absent).
        #[arg(long)]
        goals: Option<PathBuf>,
    },
    /// Greedy evaluation of a saved model.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Goal file (canonical goals when absent).
        #[arg(long)]
        goals: Option<PathBuf>,
        /// Step cap per goal.
        #[arg(long, default_value_t = 30)]
        cap: usize,
    },
    /// Summary table and learning curves for a directory of runs.
    Report {
        #[arg(long)]
        runs: PathBuf,
        /// Output directory (defaults to the runs directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_goals(path: &Option<PathBuf>) -> Result<GoalFile> {
    match path {
        Some(p) => GoalFile::load(p).with_context(|| format!("loading goal file {}", p.display())),
        None => Ok(canonical_goals()),
    }
}

fn run(config: &str, seed: u64, steps: Option<u64>, out: PathBuf) -> Result<()> {
    let (mut cfg, mut overrides) = RunConfig::resolve(config)?;
    cfg.seed = seed;
    if let Some(s) = steps.filter(|s| *s != cfg.total_steps) {
        cfg.total_steps = s;
        overrides.push("total_steps".into());
        overrides.sort();
        overrides.dedup();
    }
    cfg.validate()?;
    let paths = RunPaths::under(&out, &cfg.name, seed);
    info!("{} seed {}: {} steps -> {}", cfg.name, seed, cfg.step_budget(), paths.dir.display());
    let outcome = train(&cfg, &overrides, Some(&paths))?;
    let last = outcome.metrics.last().context("run produced no evaluations")?;
    println!(
        "{} seed {}: {} steps, {} episodes, running eval {:.2} (hard {:.2}), {} goals discovered, {:.1}s",
        cfg.name,
        seed,
        outcome.steps,
        outcome.episodes,
        last.running_all,
        last.running_hard,
        outcome.discovered.len(),
        outcome.wall_clock_secs
    );
    Ok(())
}

fn baseline(steps: u64, out: PathBuf, seeds: &[u64], reset_period: u64, goals: &Option<PathBuf>) -> Result<()> {
    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    let goals = load_goals(goals)?;
    let table = baseline_table(steps, reset_period, &goals, &ScenarioConfig::kitchen(), seeds)?;
    std::fs::create_dir_all(&out)?;
    let path = out.join("baseline.csv");
    table.write_csv(File::create(&path)?)?;
    table.write_csv(std::io::stdout())?;
    info!("wrote {}", path.display());
    Ok(())
}

fn eval(checkpoint: PathBuf, goals: &Option<PathBuf>, cap: usize) -> Result<()> {
    let file = File::open(&checkpoint).with_context(|| format!("opening {}", checkpoint.display()))?;
    let model = QModel::read_checkpoint(BufReader::new(file))?;
    let goals = load_goals(goals)?;
    let mut cache = FeatureCache::new(model.encoder());
    let mut policy = ModelPolicy { model: &model, cache: &mut cache };
    let report = evaluate(&mut policy, &goals, &ScenarioConfig::kitchen(), cap)?;
    for r in &report.results {
        let mark = if r.success { "ok  " } else { "fail" };
        let hard = if r.hard { " [hard]" } else { "" };
        println!("{mark} {:>2} steps  {}{hard}", r.steps, r.goal);
    }
    println!("score (all) {:.2}, score (hard) {:.2}", report.score_all, report.score_hard);
    Ok(())
}

fn report(runs: PathBuf, out: Option<PathBuf>) -> Result<ReportStatus> {
    let out = out.unwrap_or_else(|| runs.clone());
    let rep = report::generate(&runs, &out)?;
    print!("{}", rep.table);
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    Ok(rep.status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, steps, out } => run(&config, seed, steps, out).map(|_| ReportStatus::Complete),
        Command::Baseline { steps, out, seeds, reset_period, goals } => {
            baseline(steps, out, &seeds, reset_period, &goals).map(|_| ReportStatus::Complete)
        }
        Command::Eval { checkpoint, goals, cap } => eval(checkpoint, &goals, cap).map(|_| ReportStatus::Complete),
        Command::Report { runs, out } => report(runs, out),
    };
    match result {
        Ok(ReportStatus::Complete) => ExitCode::SUCCESS,
        Ok(ReportStatus::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
