//! Summaries and learning curves over a directory of runs.
//!
//! Every `metrics.jsonl` below the runs directory is one (config, seed)
//! run. Per seed, the score is the mean of the last ten evaluations; across
//! seeds, the mean and the population standard deviation of those per-seed
//! scores are reported, always with the seed count.

mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Deserialize;
use thiserror::Error;

use crate::orchestrator::{MetricsLine, PRESET_NAMES};

pub use svg::{band, render_chart, Series};

/// Evaluations averaged per seed.
pub const LAST_EVALS: usize = 10;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no metrics logs found under {0}")]
    NoRuns(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whether the report saw everything it expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStatus {
    Complete,
    /// Warnings were raised (corrupt lines, missing or unfinished seeds).
    Partial,
}

/// The metrics of one (config, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub config: String,
    pub seed: u64,
    pub dir: PathBuf,
    pub lines: Vec<MetricsLine>,
    pub corrupt_lines: usize,
    /// From the manifest, when present.
    pub step_budget: Option<u64>,
    pub wall_clock_secs: Option<f64>,
}

impl SeedRun {
    /// Mean of the last ten (all, hard) evaluation scores.
    pub fn last_evals_mean(&self) -> (f64, f64) {
        let tail = &self.lines[self.lines.len().saturating_sub(LAST_EVALS)..];
        let n = tail.len().max(1) as f64;
        let all = tail.iter().map(|l| l.eval_all).sum::<f64>() / n;
        let hard = tail.iter().map(|l| l.eval_hard).sum::<f64>() / n;
        (all, hard)
    }

    pub fn final_discovered(&self) -> usize {
        self.lines.last().map_or(0, |l| l.discovered)
    }

    /// Whether the log reaches the step budget.
    pub fn finished(&self) -> bool {
        match (self.step_budget, self.lines.last()) {
            (Some(b), Some(l)) => l.step >= b,
            (None, Some(_)) => true,
            (_, None) => false,
        }
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config: String,
    pub seeds: Vec<u64>,
    pub all_mean: f64,
    pub all_std: f64,
    pub hard_mean: f64,
    pub hard_std: f64,
    pub discovered_mean: f64,
    pub discovered_std: f64,
    /// Mean wall-clock seconds over the seeds that recorded it.
    pub wall_clock_mean: Option<f64>,
    pub corrupt_lines: usize,
    /// Seeds present for other configurations but not this one.
    pub missing_seeds: Vec<u64>,
    /// Seeds whose log stops before the step budget.
    pub unfinished_seeds: Vec<u64>,
}

impl RunSummary {
    pub fn single_seed(&self) -> bool {
        self.seeds.len() == 1
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn find_logs(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            find_logs(&path, out)?;
        } else if e.file_name() == "metrics.jsonl" {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct ManifestRun {
    config: String,
    seed: u64,
    step_budget: u64,
}

#[derive(Deserialize)]
struct Manifest {
    run: ManifestRun,
}

#[derive(Deserialize)]
struct Timing {
    wall_clock_secs: f64,
}

/// Reads one run directory's metrics log (skipping corrupt lines) and, when
/// present, its manifest and timing files.
pub fn load_run(metrics: &Path) -> Result<Option<SeedRun>, ReportError> {
    let dir = metrics.parent().unwrap_or(Path::new(".")).to_path_buf();
    let text = std::fs::read_to_string(metrics)?;
    let mut lines = Vec::new();
    let mut corrupt_lines = 0;
    for raw in text.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<MetricsLine>(raw) {
            Ok(l) => lines.push(l),
            Err(_) => corrupt_lines += 1,
        }
    }
    let manifest: Option<Manifest> =
        std::fs::read_to_string(dir.join("manifest.toml")).ok().and_then(|t| toml::from_str(&t).ok());
    let timing: Option<Timing> =
        std::fs::read_to_string(dir.join("timing.json")).ok().and_then(|t| serde_json::from_str(&t).ok());
    let (config, seed) = match (lines.first(), &manifest) {
        (Some(l), _) => (l.config.clone(), l.seed),
        (None, Some(m)) => (m.run.config.clone(), m.run.seed),
        (None, None) => return Ok(None),
    };
    Ok(Some(SeedRun {
        config,
        seed,
        dir,
        lines,
        corrupt_lines,
        step_budget: manifest.map(|m| m.run.step_budget),
        wall_clock_secs: timing.map(|t| t.wall_clock_secs),
    }))
}

/// All runs below `dir`, grouped by config (presets first, in their
/// canonical order, then others by name) and sorted by seed.
pub fn load_runs(dir: &Path) -> Result<Vec<(String, Vec<SeedRun>)>, ReportError> {
    let mut logs = Vec::new();
    if dir.is_dir() {
        find_logs(dir, &mut logs)?;
    }
    let mut groups: BTreeMap<String, Vec<SeedRun>> = BTreeMap::new();
    for path in logs {
        if let Some(run) = load_run(&path)? {
            groups.entry(run.config.clone()).or_default().push(run);
        }
    }
    if groups.is_empty() {
        return Err(ReportError::NoRuns(dir.to_path_buf()));
    }
    let rank = |c: &str| PRESET_NAMES.iter().position(|p| *p == c).unwrap_or(PRESET_NAMES.len());
    let mut out: Vec<(String, Vec<SeedRun>)> = groups.into_iter().collect();
    out.sort_by(|a, b| (rank(&a.0), &a.0).cmp(&(rank(&b.0), &b.0)));
    for (_, runs) in &mut out {
        runs.sort_by_key(|r| r.seed);
    }
    Ok(out)
}

/// Summary rows plus the warnings raised while building them.
pub fn summarize_runs(groups: &[(String, Vec<SeedRun>)]) -> (Vec<RunSummary>, Vec<String>) {
    let all_seeds: BTreeSet<u64> = groups.iter().flat_map(|(_, rs)| rs.iter().map(|r| r.seed)).collect();
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for (config, runs) in groups {
        let scored: Vec<&SeedRun> = runs.iter().filter(|r| !r.lines.is_empty()).collect();
        let seeds: Vec<u64> = scored.iter().map(|r| r.seed).collect();
        let means: Vec<(f64, f64)> = scored.iter().map(|r| r.last_evals_mean()).collect();
        let (all_mean, all_std) = mean_std(&means.iter().map(|m| m.0).collect::<Vec<_>>());
        let (hard_mean, hard_std) = mean_std(&means.iter().map(|m| m.1).collect::<Vec<_>>());
        let disc: Vec<f64> = scored.iter().map(|r| r.final_discovered() as f64).collect();
        let (discovered_mean, discovered_std) = mean_std(&disc);
        let clocks: Vec<f64> = scored.iter().filter_map(|r| r.wall_clock_secs).collect();
        let wall_clock_mean = (!clocks.is_empty()).then(|| clocks.iter().sum::<f64>() / clocks.len() as f64);
        let corrupt_lines = runs.iter().map(|r| r.corrupt_lines).sum();
        let missing_seeds: Vec<u64> = all_seeds.iter().filter(|s| !seeds.contains(s)).copied().collect();
        let unfinished_seeds: Vec<u64> = runs.iter().filter(|r| !r.finished()).map(|r| r.seed).collect();
        if corrupt_lines > 0 {
            warnings.push(format!("{config}: {corrupt_lines} corrupt metrics line(s) skipped"));
        }
        if !missing_seeds.is_empty() {
            warnings.push(format!("{config}: missing seed(s) {}", join(&missing_seeds)));
        }
        if !unfinished_seeds.is_empty() {
            warnings.push(format!("{config}: seed(s) {} stop before the step budget", join(&unfinished_seeds)));
        }
        rows.push(RunSummary {
            config: config.clone(),
            seeds,
            all_mean,
            all_std,
            hard_mean,
            hard_std,
            discovered_mean,
            discovered_std,
            wall_clock_mean,
            corrupt_lines,
            missing_seeds,
            unfinished_seeds,
        });
    }
    (rows, warnings)
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

/// Summary table as CSV, one row per configuration.
pub fn summary_csv(rows: &[RunSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "config",
        "seeds",
        "eval_all_mean",
        "eval_all_std",
        "eval_hard_mean",
        "eval_hard_std",
        "discovered_mean",
        "discovered_std",
        "wall_clock_s",
        "corrupt_lines",
        "missing_seeds",
        "unfinished_seeds",
        "caveat",
    ])
    .expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.config.clone(),
            r.seeds.len().to_string(),
            format!("{:.2}", r.all_mean),
            format!("{:.2}", r.all_std),
            format!("{:.2}", r.hard_mean),
            format!("{:.2}", r.hard_std),
            format!("{:.1}", r.discovered_mean),
            format!("{:.1}", r.discovered_std),
            r.wall_clock_mean.map_or(String::new(), |s| format!("{s:.1}")),
            r.corrupt_lines.to_string(),
            join(&r.missing_seeds),
            join(&r.unfinished_seeds),
            if r.single_seed() { "single seed".into() } else { String::new() },
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Human-readable table with `mean ± std (n)` cells and a footer.
pub fn summary_text(rows: &[RunSummary]) -> String {
    let mut s = String::new();
    let _ =
        writeln!(s, "{:<22} {:>3}  {:>16}  {:>16}  {:>10}", "config", "n", "eval (all)", "eval (hard)", "discovered");
    for r in rows {
        let flag = if r.single_seed() { "  [single seed]" } else { "" };
        let _ = writeln!(
            s,
            "{:<22} {:>3}  {:>16}  {:>16}  {:>10.1}{flag}",
            r.config,
            r.seeds.len(),
            format!("{:.2} ± {:.2}", r.all_mean, r.all_std),
            format!("{:.2} ± {:.2}", r.hard_mean, r.hard_std),
            r.discovered_mean,
        );
    }
    let _ = writeln!(
        s,
        "scores: mean of the last {LAST_EVALS} evaluations per seed; ± is the population standard deviation across seeds; n = seeds."
    );
    s
}

/// The metrics drawn as curves.
pub const CURVE_METRICS: [&str; 3] = ["eval_all", "eval_hard", "discovered"];

fn metric(line: &MetricsLine, name: &str) -> f64 {
    match name {
        "eval_all" => line.eval_all,
        "eval_hard" => line.eval_hard,
        "discovered" => line.discovered as f64,
        other => unreachable!("unknown metric {other}"),
    }
}

/// One chart per configuration and metric, named `<config>-<metric>.svg`.
pub fn render_curves(groups: &[(String, Vec<SeedRun>)], out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = Vec::new();
    for (config, runs) in groups {
        let runs: Vec<&SeedRun> = runs.iter().filter(|r| !r.lines.is_empty()).collect();
        if runs.is_empty() {
            continue;
        }
        for name in CURVE_METRICS {
            let series: Vec<Series> = runs
                .iter()
                .map(|r| Series {
                    label: format!("seed {}", r.seed),
                    points: r.lines.iter().map(|l| (l.step as f64, metric(l, name))).collect(),
                })
                .collect();
            let svg = render_chart(&format!("{config}: {name}"), name, &series);
            std::fs::create_dir_all(out)?;
            let path = out.join(format!("{config}-{name}.svg"));
            std::fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Everything `report` produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<RunSummary>,
    pub table: String,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
    pub status: ReportStatus,
}

/// Summarizes `runs`, writing `summary.csv` and the charts into `out`.
pub fn generate(runs: &Path, out: &Path) -> Result<Report, ReportError> {
    let groups = load_runs(runs)?;
    let (rows, warnings) = summarize_runs(&groups);
    for w in &warnings {
        warn!("{w}");
    }
    std::fs::create_dir_all(out)?;
    let csv_path = out.join("summary.csv");
    std::fs::write(&csv_path, summary_csv(&rows))?;
    let mut files = vec![csv_path];
    files.extend(render_curves(&groups, &out.join("curves"))?);
    let status = if warnings.is_empty() { ReportStatus::Complete } else { ReportStatus::Partial };
    Ok(Report { table: summary_text(&rows), rows, warnings, files, status })
}
