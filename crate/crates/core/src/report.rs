//! Summaries derived from persisted run directories.
//!
//! A report is never the source of truth: every number here is recomputed
//! from the prediction logs on disk, so regenerating a report after a
//! resumed or repeated run gives the same tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::attack::{
    aggregate, read_log, AttackConfig, AttackResult, Scenario, CONFIG_FILE, CONTROL_FILE,
    PREDICTIONS_FILE,
};
use crate::error::{Error, Result};

/// One run directory, re-aggregated from its logs.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub config: AttackConfig,
    pub result: AttackResult,
}

/// All runs a report covers, in scenario order.
#[derive(Debug, Clone)]
pub struct Report {
    pub runs: Vec<RunSummary>,
}

/// Re-aggregate one run directory from its config and prediction logs.
pub fn load_run_dir(dir: &Path) -> Result<RunSummary> {
    let cfg_path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&cfg_path)
        .map_err(|e| Error::Config(format!("{} is not a run directory: {e}", dir.display())))?;
    let config: AttackConfig = serde_json::from_str(&text)?;
    let rows = read_log(&dir.join(PREDICTIONS_FILE))?;
    let control = read_log(&dir.join(CONTROL_FILE))?;
    let result = aggregate(&config, &rows, &control)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        config,
        result,
    })
}

/// Load every given run directory. Duplicate scenario plus generator pairs
/// are rejected because the summary table keys on them.
pub fn build_report(dirs: &[PathBuf]) -> Result<Report> {
    if dirs.is_empty() {
        return Err(Error::Config("no run directories given".into()));
    }
    let mut runs: Vec<RunSummary> = dirs
        .iter()
        .map(|d| load_run_dir(d))
        .collect::<Result<_>>()?;
    let mut seen = BTreeMap::new();
    for run in &runs {
        let key = (run.config.scenario, run.config.generator.name());
        if let Some(prev) = seen.insert(key, run.dir.clone()) {
            return Err(Error::Config(format!(
                "both {} and {} hold results for {}/{}",
                prev.display(),
                run.dir.display(),
                run.config.scenario,
                run.config.generator.name()
            )));
        }
    }
    runs.sort_by_key(|r| (r.config.scenario, r.config.generator.name()));
    Ok(Report { runs })
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

/// Aggregate CSV: one row per run.
pub fn summary_csv(report: &Report) -> String {
    let mut out = String::from(
        "scenario,generator,n_targets,n_shadow,n_test,mean_accuracy,std_accuracy,control_mean\n",
    );
    for run in &report.runs {
        let c = &run.config;
        let r = &run.result;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.scenario,
            c.generator.name(),
            c.targets.len(),
            c.n_shadow,
            c.n_test,
            r.mean_accuracy,
            r.std_accuracy,
            r.control_mean
        );
    }
    out
}

/// Markdown summary: a scenario-by-generator accuracy matrix, per-target
/// detail, and pairwise scenario deltas in percentage points.
pub fn summary_markdown(report: &Report) -> String {
    let mut out = String::from("# Attack summary\n\n");

    let mut generators: Vec<&str> = report
        .runs
        .iter()
        .map(|r| r.config.generator.name())
        .collect();
    generators.sort_unstable();
    generators.dedup();
    let scenarios: Vec<Scenario> = {
        let mut s: Vec<Scenario> = report.runs.iter().map(|r| r.config.scenario).collect();
        s.sort_unstable();
        s.dedup();
        s
    };

    out.push_str("Mean accuracy ± population std over targets, percent.\n\n");
    out.push_str("| scenario |");
    for g in &generators {
        let _ = write!(out, " {g} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(generators.len()));
    out.push('\n');
    for &s in &scenarios {
        let _ = write!(out, "| {s} |");
        for g in &generators {
            let cell = report
                .runs
                .iter()
                .find(|r| r.config.scenario == s && r.config.generator.name() == *g)
                .map(|r| {
                    format!(
                        "{} ± {}",
                        pct(r.result.mean_accuracy),
                        pct(r.result.std_accuracy)
                    )
                })
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }

    if scenarios.len() > 1 {
        out.push_str("\n## Scenario deltas\n\n");
        for g in &generators {
            let of = |s: Scenario| {
                report
                    .runs
                    .iter()
                    .find(|r| r.config.scenario == s && r.config.generator.name() == *g)
                    .map(|r| r.result.mean_accuracy)
            };
            for i in 0..scenarios.len() {
                for j in 0..i {
                    if let (Some(hi), Some(lo)) = (of(scenarios[i]), of(scenarios[j])) {
                        let _ = writeln!(
                            out,
                            "- {g}: {} vs {}: {:+.1} p.p.",
                            scenarios[i],
                            scenarios[j],
                            100.0 * (hi - lo)
                        );
                    }
                }
            }
        }
    }

    out.push_str("\n## Per-target accuracy\n");
    for run in &report.runs {
        let _ = write!(
            out,
            "\n### {} / {} (n_shadow={}, n_test={}, seed={})\n\n",
            run.config.scenario,
            run.config.generator.name(),
            run.config.n_shadow,
            run.config.n_test,
            run.config.master_seed
        );
        out.push_str("| target | accuracy % | control % |\n|---|---|---|\n");
        for t in &run.result.per_target {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                t.target_id,
                pct(t.accuracy),
                pct(t.control_accuracy)
            );
        }
    }
    out
}

/// Write `summary.md` and `summary.csv` into `out`.
pub fn write_report(report: &Report, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("summary.md"), summary_markdown(report))?;
    fs::write(out.join("summary.csv"), summary_csv(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{run_experiment, Sources};
    use crate::fixture::demo_dataset;
    use crate::generators::GeneratorSpec;
    use crate::metaclassifier::RfParams;

    fn tiny(scenario: Scenario) -> AttackConfig {
        AttackConfig {
            scenario,
            generator: GeneratorSpec::baynet(),
            d_size: 30,
            n_synthetic: 30,
            n_shadow: 6,
            n_test: 4,
            m: Some(60),
            query_budget: 32,
            rf: RfParams {
                n_trees: 5,
                max_depth: 4,
                ..RfParams::default()
            },
            master_seed: 3,
            targets: vec![0, 2],
        }
    }

    fn sources() -> Sources {
        let full = demo_dataset(300, 8, 4).unwrap();
        let idx: Vec<usize> = (0..300).collect();
        Sources {
            d_aux: Some(full.subset(&idx[20..160])),
            d_test: full.subset(&idx[160..300]),
            full,
        }
    }

    #[test]
    fn report_recomputes_what_the_run_returned() {
        let sources = sources();
        let root = tempfile::tempdir().unwrap();
        let cfg = tiny(Scenario::S2);
        let dir = root.path().join("s2");
        let returned = run_experiment(&cfg, &sources, &dir).unwrap();
        let report = build_report(&[dir]).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert_eq!(report.runs[0].result, returned);
        assert_eq!(report.runs[0].config, cfg);
    }

    #[test]
    fn markdown_and_csv_cover_all_runs() {
        let sources = sources();
        let root = tempfile::tempdir().unwrap();
        let mut dirs = Vec::new();
        for s in [Scenario::S1, Scenario::S2] {
            let dir = root.path().join(s.as_str());
            run_experiment(&tiny(s), &sources, &dir).unwrap();
            dirs.push(dir);
        }
        let report = build_report(&dirs).unwrap();
        let md = summary_markdown(&report);
        assert!(md.contains("| s1 |"));
        assert!(md.contains("| s2 |"));
        assert!(md.contains("s2 vs s1"));
        assert!(md.contains("p.p."));
        let csv = summary_csv(&report);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("s1,baynet,2,6,4,"));

        let out = root.path().join("report");
        write_report(&report, &out).unwrap();
        assert!(out.join("summary.md").exists());
        assert!(out.join("summary.csv").exists());
    }

    #[test]
    fn empty_and_duplicate_inputs_are_rejected() {
        assert!(build_report(&[]).is_err());
        let sources = sources();
        let root = tempfile::tempdir().unwrap();
        let a = root.path().join("a");
        let b = root.path().join("b");
        run_experiment(&tiny(Scenario::S1), &sources, &a).unwrap();
        run_experiment(&tiny(Scenario::S1), &sources, &b).unwrap();
        let err = build_report(&[a, b]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(load_run_dir(&root.path().join("missing")).is_err());
    }
}
