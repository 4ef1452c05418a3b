//! Summaries and charts over fixture run directories.

use std::path::Path;

use indexmap::IndexMap;

use autotelic_core::orchestrator::{BufferStats, LossStats, MetricsLine};
use autotelic_core::report::{
    band, generate, load_runs, render_chart, summarize_runs, summary_csv, summary_text, ReportError, ReportStatus,
    Series,
};

fn line(config: &str, seed: u64, step: u64, all: f64, hard: f64, discovered: usize) -> MetricsLine {
    MetricsLine {
        config: config.into(),
        seed,
        step,
        episodes: step / 20,
        eval_all: all,
        eval_hard: hard,
        running_all: all,
        running_hard: hard,
        per_goal: IndexMap::new(),
        discovered,
        buffer: BufferStats { items: 0, goals: 0 },
        loss: LossStats { updates: 0, skipped: 0, td: 0.0, entropy: 0.0 },
        competence: Vec::new(),
    }
}

/// Writes a run directory with one evaluation per score, every 1000 steps,
/// and a manifest whose budget is the last step.
fn write_run(root: &Path, config: &str, seed: u64, scores: &[(f64, f64)]) {
    let dir = root.join(config).join(format!("seed-{seed}"));
    std::fs::create_dir_all(&dir).unwrap();
    let text: String = scores
        .iter()
        .enumerate()
        .map(|(i, (a, h))| {
            serde_json::to_string(&line(config, seed, 1000 * (i as u64 + 1), *a, *h, i + 1)).unwrap() + "\n"
        })
        .collect();
    std::fs::write(dir.join("metrics.jsonl"), text).unwrap();
    let budget = 1000 * scores.len();
    std::fs::write(
        dir.join("manifest.toml"),
        format!("[run]\nconfig = \"{config}\"\nseed = {seed}\nstep_budget = {budget}\n"),
    )
    .unwrap();
}

fn flat(x: f64, n: usize) -> Vec<(f64, f64)> {
    vec![(x, 0.0); n]
}

#[test]
fn two_seeds_use_the_population_std() {
    let tmp = tempfile::tempdir().unwrap();
    // Early evaluations fall outside the last ten and must not count.
    let mut a = flat(0.0, 5);
    a.extend(flat(60.0, 10));
    write_run(tmp.path(), "base", 0, &a);
    write_run(tmp.path(), "base", 1, &flat(80.0, 12));
    let (rows, warnings) = summarize_runs(&load_runs(tmp.path()).unwrap());
    assert!(warnings.is_empty(), "{warnings:?}");
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].all_mean, rows[0].all_std), (70.0, 10.0));
    assert_eq!(rows[0].seeds, [0, 1]);
    assert!(!rows[0].single_seed());
}

#[test]
fn single_seed_has_zero_std_and_a_caveat() {
    let tmp = tempfile::tempdir().unwrap();
    write_run(tmp.path(), "chain", 3, &flat(42.0, 4));
    let (rows, _) = summarize_runs(&load_runs(tmp.path()).unwrap());
    assert_eq!(rows[0].all_std, 0.0);
    assert!(rows[0].single_seed());
    assert!(summary_csv(&rows).lines().nth(1).unwrap().ends_with(",single seed"));
    assert!(summary_text(&rows).contains("[single seed]"));
}

#[test]
fn engineered_logs_print_the_target_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    // Per-seed means 55.38 and 88.40: mean 71.89, population std 16.51.
    write_run(tmp.path(), "base", 0, &flat(55.38, 10));
    write_run(tmp.path(), "base", 1, &flat(88.40, 10));
    let (rows, _) = summarize_runs(&load_runs(tmp.path()).unwrap());
    let text = summary_text(&rows);
    assert!(text.contains("71.89 ± 16.51"), "{text}");
    let csv = summary_csv(&rows);
    assert!(csv.lines().nth(1).unwrap().starts_with("base,2,71.89,16.51,"), "{csv}");
}

#[test]
fn summary_matches_an_independent_pass_over_raw_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = |k: u64| {
        (0..17)
            .map(|i| (((i * 7 + k * 13) % 15) as f64 * 100.0 / 14.0, ((i + k) % 3) as f64 * 50.0))
            .collect::<Vec<_>>()
    };
    for seed in 0..4 {
        write_run(tmp.path(), "metacognitive", seed, &scores(seed));
    }
    let (rows, _) = summarize_runs(&load_runs(tmp.path()).unwrap());

    // One pass: read the raw JSON, keep a ring of the last ten scores.
    let mut per_seed = Vec::new();
    for seed in 0..4 {
        let text =
            std::fs::read_to_string(tmp.path().join(format!("metacognitive/seed-{seed}/metrics.jsonl"))).unwrap();
        let (mut ring, mut sum) = (std::collections::VecDeque::new(), 0.0);
        for l in text.lines() {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let x = v["eval_all"].as_f64().unwrap();
            ring.push_back(x);
            sum += x;
            if ring.len() > 10 {
                sum -= ring.pop_front().unwrap();
            }
        }
        per_seed.push(ring.iter().sum::<f64>() / ring.len() as f64);
        assert!((sum / ring.len() as f64 - per_seed[seed as usize]).abs() < 1e-9);
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().sum::<f64>() / n;
    let std = (per_seed.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    assert!((rows[0].all_mean - mean).abs() < 1e-9);
    assert!((rows[0].all_std - std).abs() < 1e-9);
    assert_eq!(format!("{:.2} {:.2}", rows[0].all_mean, rows[0].all_std), format!("{mean:.2} {std:.2}"));
}

#[test]
fn corrupt_missing_and_unfinished_runs_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    write_run(tmp.path(), "base", 0, &flat(50.0, 3));
    write_run(tmp.path(), "base", 1, &flat(50.0, 3));
    write_run(tmp.path(), "go-explore", 0, &flat(10.0, 3));
    let log = tmp.path().join("base/seed-1/metrics.jsonl");
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str("{not json\n");
    std::fs::write(&log, text).unwrap();
    // An interrupted run: budget 5000 but logs stop at 3000.
    write_run(tmp.path(), "chain", 0, &flat(20.0, 3));
    write_run(tmp.path(), "chain", 1, &flat(20.0, 3));
    std::fs::write(
        tmp.path().join("chain/seed-1/manifest.toml"),
        "[run]\nconfig = \"chain\"\nseed = 1\nstep_budget = 5000\n",
    )
    .unwrap();

    let report = generate(tmp.path(), &tmp.path().join("out")).unwrap();
    assert_eq!(report.status, ReportStatus::Partial);
    let base = &report.rows[0];
    assert_eq!((base.config.as_str(), base.corrupt_lines, base.all_mean), ("base", 1, 50.0));
    let ge = report.rows.iter().find(|r| r.config == "go-explore").unwrap();
    assert_eq!(ge.missing_seeds, [1]);
    let chain = report.rows.iter().find(|r| r.config == "chain").unwrap();
    assert_eq!(chain.unfinished_seeds, [1]);
    assert_eq!(report.warnings.len(), 3, "{:?}", report.warnings);
    // Presets appear in canonical order.
    let order: Vec<&str> = report.rows.iter().map(|r| r.config.as_str()).collect();
    assert_eq!(order, ["base", "go-explore", "chain"]);
}

#[test]
fn complete_report_writes_table_and_charts() {
    let tmp = tempfile::tempdir().unwrap();
    write_run(tmp.path(), "base", 0, &flat(50.0, 3));
    write_run(tmp.path(), "base", 1, &flat(70.0, 3));
    let out = tmp.path().join("out");
    let report = generate(tmp.path(), &out).unwrap();
    assert_eq!(report.status, ReportStatus::Complete);
    assert_eq!(report.files.len(), 4);
    assert!(out.join("summary.csv").is_file());
    for m in ["eval_all", "eval_hard", "discovered"] {
        assert!(out.join(format!("curves/base-{m}.svg")).is_file());
    }
    let first: Vec<Vec<u8>> = report.files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let again = generate(tmp.path(), &out).unwrap();
    let second: Vec<Vec<u8>> = again.files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn empty_directory_is_an_error_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(matches!(generate(tmp.path(), &out), Err(ReportError::NoRuns(_))));
    assert!(!out.exists());
}

fn points_of(svg: &str, class: &str) -> Vec<(f64, f64)> {
    let tag = format!("class=\"{class}\" points=\"");
    let start = svg.find(&tag).unwrap() + tag.len();
    let end = start + svg[start..].find('"').unwrap();
    svg[start..end]
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn chart_spans_exactly_the_eval_points() {
    let s = Series { label: "seed 0".into(), points: vec![(1000.0, 10.0), (2000.0, 30.0), (3000.0, 20.0)] };
    let svg = render_chart("t", "eval_all", &[s]);
    let trace = points_of(&svg, "trace");
    assert_eq!(trace.len(), 3);
    // Plot area spans x 60..520: first and last evals sit on its edges.
    assert_eq!((trace[0].0, trace[2].0), (60.0, 520.0));
}

#[test]
fn identical_seeds_give_a_zero_width_band() {
    let pts = vec![(1.0, 5.0), (2.0, 7.0), (3.0, 6.0)];
    let series = [Series { label: "a".into(), points: pts.clone() }, Series { label: "b".into(), points: pts }];
    assert!(band(&series).iter().all(|(_, _, sd)| *sd == 0.0));
    let svg = render_chart("t", "y", &series);
    let poly = points_of(&svg, "band");
    let n = poly.len() / 2;
    let upper: Vec<_> = poly[..n].to_vec();
    let mut lower: Vec<_> = poly[n..].to_vec();
    lower.reverse();
    assert_eq!(upper, lower);
    assert_eq!(render_chart("t", "y", &series), svg);
}
