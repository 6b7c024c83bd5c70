use std::fs;
use std::path::{Path, PathBuf};

use synthmia::attack::{
    run_experiment, sweep_m, AttackConfig, AttackResult, Scenario, Sources, PREDICTIONS_FILE,
};
use synthmia::fixture;
use synthmia::report::{build_report, summary_markdown, write_report};
use synthmia::seed::{Role, SeedCtx};
use synthmia::vulnerability::{rank_vulnerable, write_vulnerability_csv};
use synthmia::{
    load_csv, read_cache, split_disjoint, write_cache, Dataset, Error, Result, SchemaDecl,
};

use crate::manifest::ExperimentManifest;

/// Output-root override for attack and sweep runs; takes precedence over
/// both `--out` and the manifest. The experiment name is appended.
pub const CHECKPOINT_ROOT_ENV: &str = "SYNTHMIA_CHECKPOINT_ROOT";

pub fn demo(records: usize, seed: u64, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let csv_path = out.join("demo.csv");
    let schema_path = out.join("demo.schema.json");
    fs::write(&csv_path, fixture::demo_csv(records, seed))?;
    let mut schema = serde_json::to_string_pretty(&fixture::demo_schema())?;
    schema.push('\n');
    fs::write(&schema_path, schema)?;
    println!("wrote {} and {}", csv_path.display(), schema_path.display());
    Ok(())
}

pub fn prepare(csv: &Path, schema: &Path, bins: usize, out: &Path) -> Result<()> {
    let decl = SchemaDecl::from_path(schema)?;
    let raw = load_csv(csv, &decl)?;
    if raw.n_dropped > 0 {
        println!(
            "{} rows kept, {} dropped for missing values",
            raw.len(),
            raw.n_dropped
        );
    }
    let (ds, _) = raw.encode(bins)?;
    write_cache(&ds, out)?;
    println!(
        "cached {} records x {} attributes at {}",
        ds.len(),
        ds.width(),
        out.display()
    );
    Ok(())
}

pub fn vulnerable(cache: &Path, k: usize, top_n: usize, out: &Path) -> Result<()> {
    let ds = read_cache(cache)?;
    let scores = rank_vulnerable(&ds, k, top_n)?;
    let file = fs::File::create(out)?;
    write_vulnerability_csv(file, &scores)?;
    for (rank, s) in scores.iter().enumerate() {
        println!(
            "{:>4}  record {:>8}  score {:.4}",
            rank + 1,
            s.index,
            s.score
        );
    }
    println!("ranking written to {}", out.display());
    Ok(())
}

fn resolve_out(manifest: &ExperimentManifest, out_flag: Option<&Path>) -> PathBuf {
    if let Ok(root) = std::env::var(CHECKPOINT_ROOT_ENV) {
        return PathBuf::from(root).join(&manifest.name);
    }
    out_flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.out.clone())
}

fn install_workers(workers: usize) -> Result<()> {
    if workers == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot set worker count: {e}")))
}

/// Load the manifest's dataset and carve the auxiliary and test splits.
fn load_sources(manifest: &ExperimentManifest) -> Result<Sources> {
    let decl = SchemaDecl::from_path(&manifest.schema)?;
    let raw = load_csv(&manifest.csv, &decl)?;
    if raw.n_dropped > 0 {
        ::log::info!("{} rows dropped for missing values", raw.n_dropped);
    }
    let (full, _) = raw.encode(manifest.bins)?;
    let split_seed = SeedCtx::new(manifest.master_seed)
        .with(Role::Split, 0)
        .seed();
    let splits = split_disjoint(
        &full,
        &[manifest.aux_records, manifest.test_records],
        split_seed,
    )?;
    let mut it = splits.into_iter();
    let d_aux = it.next();
    let d_test = it.next().expect("two splits requested");
    Ok(Sources {
        full,
        d_aux,
        d_test,
    })
}

fn resolve_targets(manifest: &ExperimentManifest, full: &Dataset) -> Result<Vec<usize>> {
    if !manifest.targets.is_empty() {
        return Ok(manifest.targets.clone());
    }
    let tv = manifest
        .top_vulnerable
        .expect("validated: one selection mode set");
    let scores = rank_vulnerable(full, tv.k, tv.count)?;
    Ok(scores.into_iter().map(|s| s.index).collect())
}

fn print_seed_plan(cfg: &AttackConfig, targets: &[usize]) {
    println!(
        "seed plan for master seed {} ({} targets, {} instances each):",
        cfg.master_seed,
        targets.len(),
        cfg.n_test
    );
    for &tid in targets {
        let ctx = SeedCtx::new(cfg.master_seed).with(Role::Target, tid as u64);
        println!(
            "  {} target {tid}: queries {:016x} labels {:016x}",
            cfg.scenario,
            ctx.with(Role::Queries, 0).seed(),
            ctx.with(Role::TestLabels, 0).seed(),
        );
        let ictx = ctx.with(Role::Instance, 0);
        println!(
            "    instance 0: world {:016x} fit {:016x} sample {:016x} pool {:016x} meta {:016x}",
            ictx.with(Role::TestWorld, 0).seed(),
            ictx.with(Role::TestFit, 0).seed(),
            ictx.with(Role::TestSample, 0).seed(),
            ictx.with(Role::PoolSample, 0).seed(),
            ictx.with(Role::MetaClassifier, 0).seed(),
        );
    }
}

fn write_result_files(dir: &Path, result: &AttackResult) -> Result<()> {
    let mut json = serde_json::to_string_pretty(result)?;
    json.push('\n');
    fs::write(dir.join("result.json"), json)?;
    let mut csv = String::from("target_id,accuracy,control_accuracy\n");
    for t in &result.per_target {
        csv.push_str(&format!(
            "{},{},{}\n",
            t.target_id, t.accuracy, t.control_accuracy
        ));
    }
    fs::write(dir.join("result.csv"), csv)?;
    Ok(())
}

fn refuse_unless_resume(dir: &Path, resume: bool) -> Result<()> {
    if !resume && dir.join(PREDICTIONS_FILE).exists() {
        return Err(Error::Config(format!(
            "{} already holds results; pass --resume to continue it",
            dir.display()
        )));
    }
    Ok(())
}

pub fn attack(
    manifest_path: &Path,
    out_flag: Option<&Path>,
    workers: usize,
    dry_run: bool,
    resume: bool,
) -> Result<()> {
    let manifest = ExperimentManifest::from_path(manifest_path)?;
    manifest.validate()?;
    install_workers(workers)?;
    let root = resolve_out(&manifest, out_flag);

    let sources = load_sources(&manifest)?;
    let targets = resolve_targets(&manifest, &sources.full)?;

    if dry_run {
        for &scenario in &manifest.scenarios {
            let cfg = manifest.to_attack_config(scenario, targets.clone());
            cfg.validate()?;
            print_seed_plan(&cfg, &targets);
        }
        println!("dry run: nothing executed");
        return Ok(());
    }

    fs::create_dir_all(&root)?;
    fs::write(root.join("manifest.json"), manifest.echo_json()?)?;
    if manifest.top_vulnerable.is_some() {
        let scores = rank_vulnerable(
            &sources.full,
            manifest.top_vulnerable.unwrap().k,
            targets.len(),
        )?;
        let file = fs::File::create(root.join("targets.csv"))?;
        write_vulnerability_csv(file, &scores)?;
    }

    let mut dirs = Vec::new();
    for &scenario in &manifest.scenarios {
        let dir = root.join(scenario.as_str());
        refuse_unless_resume(&dir, resume)?;
        let cfg = manifest.to_attack_config(scenario, targets.clone());
        let result = run_experiment(&cfg, &sources, &dir)?;
        write_result_files(&dir, &result)?;
        println!(
            "{} {}: mean accuracy {:.1}% ± {:.1} (control {:.1}%)",
            scenario,
            manifest.generator.name(),
            100.0 * result.mean_accuracy,
            100.0 * result.std_accuracy,
            100.0 * result.control_mean
        );
        dirs.push(dir);
    }

    let report = build_report(&dirs)?;
    write_report(&report, &root)?;
    println!("summary written to {}", root.join("summary.md").display());
    Ok(())
}

pub fn sweep(
    manifest_path: &Path,
    m_values: &[usize],
    out_flag: Option<&Path>,
    workers: usize,
    resume: bool,
) -> Result<()> {
    let manifest = ExperimentManifest::from_path(manifest_path)?;
    manifest.validate()?;
    if manifest.scenarios != [Scenario::S1] {
        return Err(Error::Config(
            "the pool-size sweep needs a manifest with scenarios [\"s1\"]".into(),
        ));
    }
    install_workers(workers)?;
    let root = resolve_out(&manifest, out_flag);

    let sources = load_sources(&manifest)?;
    let targets = resolve_targets(&manifest, &sources.full)?;
    let cfg = manifest.to_attack_config(Scenario::S1, targets);

    fs::create_dir_all(&root)?;
    fs::write(root.join("manifest.json"), manifest.echo_json()?)?;
    for &m in m_values {
        refuse_unless_resume(&root.join(format!("m_{m}")), resume)?;
    }

    let results = sweep_m(&cfg, m_values, &sources, &root)?;
    let mut csv = String::from("m,mean_accuracy,std_accuracy,control_mean\n");
    for (m, r) in &results {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            m, r.mean_accuracy, r.std_accuracy, r.control_mean
        ));
        write_result_files(&root.join(format!("m_{m}")), r)?;
        println!(
            "m={m}: mean accuracy {:.1}% ± {:.1}",
            100.0 * r.mean_accuracy,
            100.0 * r.std_accuracy
        );
    }
    fs::write(root.join("sweep.csv"), csv)?;

    let means: Vec<f64> = results.iter().map(|(_, r)| r.mean_accuracy).collect();
    let spread = means.iter().cloned().fold(f64::MIN, f64::max)
        - means.iter().cloned().fold(f64::MAX, f64::min);
    println!(
        "accuracy spread across pool sizes: {:.1} p.p.",
        100.0 * spread
    );
    Ok(())
}

pub fn report(dirs: &[PathBuf], out: &Path) -> Result<()> {
    let report = build_report(dirs)?;
    write_report(&report, out)?;
    print!("{}", summary_markdown(&report));
    println!("summary written to {}", out.join("summary.md").display());
    Ok(())
}
