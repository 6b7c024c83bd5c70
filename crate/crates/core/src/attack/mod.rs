//! Shadow-modeling membership inference attacks against synthetic data
//! releases.
//!
//! The attack asks one question per test instance: was the target record in
//! the training set of the generator that produced this synthetic dataset?
//! To answer it, the attacker builds many candidate training sets (shadow
//! worlds) with known membership, fits the same generator family on each,
//! extracts subset-match query features from the resulting synthetic
//! outputs, and trains a random forest to separate member from non-member
//! worlds. The forest is then applied to the features of the released
//! dataset under audit.
//!
//! Four access scenarios control where shadow worlds come from:
//!
//! * `s0` (auxiliary): the attacker holds a disjoint sample of real records
//!   and trains one meta-classifier per target, reused for every instance.
//! * `s1` (black-box): the attacker can only draw samples from the target
//!   generator itself; each instance gets its own pool and classifier.
//! * `s2` (published): the attacker sees nothing but the released synthetic
//!   data and bootstraps a second generator from it.
//! * `s3` (upper bound): like `s1`, but member instances draw their pool
//!   from an adjoining generator that never saw the target, isolating the
//!   target's own contribution. Non-member instances are identical to `s1`
//!   by construction, seeds included.
//!
//! Every random choice descends from a single master seed through named
//! derivation paths, so a run is reproducible bit for bit regardless of
//! worker count, and can resume from its prediction log after an interrupt.

mod log;
mod world;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Record, Schema};
use crate::error::{Error, Result};
use crate::features::{extract_features, generate_queries, FeatureVector, QuerySet};
use crate::metaclassifier::{predict_rf, train_rf, RandomForest, RfParams};
use crate::seed::{Role, SeedCtx};

pub use self::log::{
    completed_instances, read_log, PredictionLog, PredictionRow, RunDir, CONFIG_FILE, CONTROL_FILE,
    PREDICTIONS_FILE,
};
pub use self::world::{
    balanced_labels, build_world, make_test_instances, shadow_pool, TestInstance, World,
};

use self::world::assert_pool_provenance;

/// Attacker access level. Ordered from weakest assumption to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    S0,
    S1,
    S2,
    S3,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S0, Scenario::S1, Scenario::S2, Scenario::S3];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::S0 => "s0",
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
            Scenario::S3 => "s3",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "s0" => Some(Scenario::S0),
            "s1" => Some(Scenario::S1),
            "s2" => Some(Scenario::S2),
            "s3" => Some(Scenario::S3),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full description of one attack experiment. Serialized into the run
/// directory so a resumed run can refuse a mismatched configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub scenario: Scenario,
    pub generator: crate::generators::GeneratorSpec,
    /// Training-set size of every world, member or not.
    pub d_size: usize,
    /// Records sampled from each fitted generator. Must equal `d_size`.
    pub n_synthetic: usize,
    /// Shadow worlds per meta-classifier; even, half member half not.
    pub n_shadow: usize,
    /// Evaluation instances per target; even, half member half not.
    pub n_test: usize,
    /// Shadow-pool size for sampled pools. `None` picks the scenario
    /// default: 1000 for s0/s2, 20000 for s1/s3.
    pub m: Option<usize>,
    /// Maximum number of subset queries per target.
    pub query_budget: usize,
    pub rf: RfParams,
    pub master_seed: u64,
    /// Row indices of the audited records in the full dataset.
    pub targets: Vec<usize>,
}

impl Default for AttackConfig {
    fn default() -> AttackConfig {
        AttackConfig {
            scenario: Scenario::S1,
            generator: crate::generators::GeneratorSpec::baynet(),
            d_size: 1000,
            n_synthetic: 1000,
            n_shadow: 2000,
            n_test: 100,
            m: None,
            query_budget: 100_000,
            rf: RfParams::default(),
            master_seed: 0,
            targets: Vec::new(),
        }
    }
}

impl AttackConfig {
    /// Effective shadow-pool size for scenarios with sampled pools.
    pub fn pool_size(&self) -> usize {
        self.m.unwrap_or(match self.scenario {
            Scenario::S0 | Scenario::S2 => 1000,
            Scenario::S1 | Scenario::S3 => 20_000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_size < 2 {
            return Err(Error::Param(format!(
                "d_size must be >= 2, got {}",
                self.d_size
            )));
        }
        if self.n_synthetic != self.d_size {
            return Err(Error::Param(format!(
                "n_synthetic ({}) must equal d_size ({}): released and shadow \
                 datasets must match the training-set size they stand in for",
                self.n_synthetic, self.d_size
            )));
        }
        if self.n_shadow < 2 || self.n_shadow % 2 != 0 {
            return Err(Error::Param(format!(
                "n_shadow must be even and >= 2, got {}",
                self.n_shadow
            )));
        }
        if self.n_test < 2 || self.n_test % 2 != 0 {
            return Err(Error::Param(format!(
                "n_test must be even and >= 2, got {}",
                self.n_test
            )));
        }
        if self.query_budget == 0 {
            return Err(Error::Param("query_budget must be >= 1".into()));
        }
        if matches!(self.scenario, Scenario::S1 | Scenario::S3)
            && self.pool_size() < self.n_synthetic
        {
            return Err(Error::Param(format!(
                "m ({}) must be >= n_synthetic ({}) so sampled pools can fill \
                 a world without replacement",
                self.pool_size(),
                self.n_synthetic
            )));
        }
        if self.pool_size() == 0 {
            return Err(Error::Param("m must be >= 1".into()));
        }
        self.rf.check()?;
        self.generator.validate()
    }
}

/// The data a run draws on. `full` holds the audited records; `d_test`
/// supplies hidden test worlds and must be disjoint from `d_aux`, the
/// attacker's auxiliary split (required only by scenario s0).
#[derive(Debug, Clone)]
pub struct Sources {
    pub full: Dataset,
    pub d_aux: Option<Dataset>,
    pub d_test: Dataset,
}

/// Per-target accuracies recovered from the prediction logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub target_id: usize,
    pub accuracy: f64,
    pub control_accuracy: f64,
}

/// Aggregate result of one experiment: per-target accuracies plus their
/// mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub scenario: Scenario,
    pub per_target: Vec<TargetOutcome>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub control_mean: f64,
}

/// Everything run for one target in one call: freshly computed rows only;
/// previously logged instances are skipped by the caller's `done` set.
#[derive(Debug, Clone)]
pub struct TargetRun {
    pub target_id: usize,
    pub rows: Vec<PredictionRow>,
    pub control_rows: Vec<PredictionRow>,
    /// Shadow or test worlds that had to sample base records with
    /// replacement because the pool was too small.
    pub with_replacement_worlds: usize,
}

struct ShadowBatch {
    features: Vec<FeatureVector>,
    labels: Vec<bool>,
    replacement_worlds: usize,
}

/// Build `n_shadow` labeled worlds from one pool, fit the generator on
/// each, and extract query features from each synthetic output.
fn shadow_batch(
    pool: &Dataset,
    x_t: &Record,
    queries: &QuerySet,
    cfg: &AttackConfig,
    scope: &SeedCtx,
) -> Result<ShadowBatch> {
    let labels = balanced_labels(cfg.n_shadow, &scope.with(Role::ShadowLabels, 0));
    let out: Result<Vec<(FeatureVector, bool)>> = (0..cfg.n_shadow)
        .into_par_iter()
        .map(|w| {
            let world = build_world(
                pool,
                x_t,
                cfg.d_size,
                labels[w],
                scope.with(Role::ShadowWorld, w as u64).seed(),
            )?;
            let model = world::fit_with_retry(
                &cfg.generator,
                &world.data,
                scope.with(Role::ShadowFit, w as u64).seed(),
            )?;
            let synth = crate::generators::sample(
                &model,
                cfg.n_synthetic,
                scope.with(Role::ShadowSample, w as u64).seed(),
            )?;
            Ok((extract_features(queries, &synth)?, world.with_replacement))
        })
        .collect();
    let out = out?;
    let replacement_worlds = out.iter().filter(|r| r.1).count();
    Ok(ShadowBatch {
        features: out.iter().map(|r| r.0.clone()).collect(),
        labels,
        replacement_worlds,
    })
}

/// Train the meta-classifier for one scope. Returns the forest and the seed
/// it was trained with, which the prediction log records.
fn train_meta(
    batch: &ShadowBatch,
    cfg: &AttackConfig,
    scope: &SeedCtx,
) -> Result<(RandomForest, u64)> {
    let seed = scope.with(Role::MetaClassifier, 0).seed();
    let mut params = cfg.rf;
    params.seed = seed;
    let rf = train_rf(&batch.features, &batch.labels, &params)?;
    Ok((rf, seed))
}

/// Train the shuffled-label control forest on the same features. Shuffling
/// a balanced label vector keeps it balanced, so control accuracy has no
/// class-prior shortcut; it measures leakage through everything except the
/// membership signal.
fn train_control(
    batch: &ShadowBatch,
    cfg: &AttackConfig,
    scope: &SeedCtx,
) -> Result<(RandomForest, u64)> {
    let mut labels = batch.labels.clone();
    let mut rng = scope.with(Role::ControlShuffle, 0).rng();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rand::Rng::gen_range(&mut rng, 0..=i));
    }
    let seed = scope.with(Role::MetaClassifier, 1).seed();
    let mut params = cfg.rf;
    params.seed = seed;
    let rf = train_rf(&batch.features, &labels, &params)?;
    Ok((rf, seed))
}

fn row(
    cfg: &AttackConfig,
    target_id: usize,
    inst: &TestInstance,
    rf: &RandomForest,
    feats: &FeatureVector,
    seed: u64,
) -> Result<PredictionRow> {
    Ok(PredictionRow {
        scenario: cfg.scenario,
        target_id,
        instance_id: inst.id,
        truth: inst.is_member,
        prediction: predict_rf(rf, feats)?,
        seed,
    })
}

/// Run one target end to end, skipping instances whose predictions are
/// already in `done`. When `sink` is given, each instance's rows are
/// appended and flushed as soon as they exist, so an interrupted run loses
/// at most the instance in flight.
fn run_target(
    x_t: &Record,
    target_id: usize,
    cfg: &AttackConfig,
    sources: &Sources,
    done: &BTreeSet<usize>,
    mut sink: Option<(&mut PredictionLog, &mut PredictionLog)>,
) -> Result<TargetRun> {
    let ctx = SeedCtx::new(cfg.master_seed).with(Role::Target, target_id as u64);
    let queries = generate_queries(
        schema_of(&sources.d_test),
        x_t,
        cfg.query_budget,
        ctx.with(Role::Queries, 0).seed(),
    )?;
    let instances = make_test_instances(&sources.d_test, x_t, cfg, &ctx)?;
    let todo: Vec<&TestInstance> = instances.iter().filter(|t| !done.contains(&t.id)).collect();

    let mut run = TargetRun {
        target_id,
        rows: Vec::with_capacity(todo.len()),
        control_rows: Vec::with_capacity(todo.len()),
        with_replacement_worlds: instances.iter().filter(|t| t.with_replacement).count(),
    };
    if todo.is_empty() {
        return Ok(run);
    }

    if cfg.scenario == Scenario::S0 {
        // One pool, one classifier, reused across instances.
        let pool = sources
            .d_aux
            .as_ref()
            .ok_or_else(|| Error::Config("scenario s0 requires an auxiliary dataset".into()))?;
        let batch = shadow_batch(pool, x_t, &queries, cfg, &ctx)?;
        run.with_replacement_worlds += batch.replacement_worlds;
        let (rf, seed) = train_meta(&batch, cfg, &ctx)?;
        let (crf, cseed) = train_control(&batch, cfg, &ctx)?;
        for inst in todo {
            let feats = extract_features(&queries, &inst.released)?;
            let r = row(cfg, target_id, inst, &rf, &feats, seed)?;
            let c = row(cfg, target_id, inst, &crf, &feats, cseed)?;
            push_rows(&mut run, &mut sink, r, c)?;
        }
    } else {
        // One pool and one classifier per instance.
        for inst in todo {
            let ictx = ctx.with(Role::Instance, inst.id as u64);
            let pool = shadow_pool(inst, cfg, sources.d_aux.as_ref(), &ictx)?;
            assert_pool_provenance(&pool, cfg.scenario)?;
            let batch = shadow_batch(&pool, x_t, &queries, cfg, &ictx)?;
            run.with_replacement_worlds += batch.replacement_worlds;
            let (rf, seed) = train_meta(&batch, cfg, &ictx)?;
            let (crf, cseed) = train_control(&batch, cfg, &ictx)?;
            let feats = extract_features(&queries, &inst.released)?;
            let r = row(cfg, target_id, inst, &rf, &feats, seed)?;
            let c = row(cfg, target_id, inst, &crf, &feats, cseed)?;
            push_rows(&mut run, &mut sink, r, c)?;
            ::log::info!(
                "target {target_id} {}: instance {} done",
                cfg.scenario,
                inst.id
            );
        }
    }
    if run.with_replacement_worlds > 0 {
        ::log::warn!(
            "target {target_id} {}: {} worlds drew base records with replacement",
            cfg.scenario,
            run.with_replacement_worlds
        );
    }
    Ok(run)
}

fn push_rows(
    run: &mut TargetRun,
    sink: &mut Option<(&mut PredictionLog, &mut PredictionLog)>,
    r: PredictionRow,
    c: PredictionRow,
) -> Result<()> {
    if let Some((plog, clog)) = sink {
        plog.append(std::slice::from_ref(&r))?;
        clog.append(std::slice::from_ref(&c))?;
    }
    run.rows.push(r);
    run.control_rows.push(c);
    Ok(())
}

fn schema_of(d: &Dataset) -> &Arc<Schema> {
    d.schema()
}

/// Attack one target without touching the filesystem. Useful for tests and
/// for callers that do their own persistence; `run_experiment` is the
/// logged, resumable entry point.
pub fn run_attack_for_target(
    x_t: &Record,
    target_id: usize,
    cfg: &AttackConfig,
    sources: &Sources,
) -> Result<TargetRun> {
    cfg.validate()?;
    run_target(x_t, target_id, cfg, sources, &BTreeSet::new(), None)
}

/// Run the full experiment into `out`, resuming from its prediction logs if
/// they already hold rows for this exact configuration.
pub fn run_experiment(cfg: &AttackConfig, sources: &Sources, out: &Path) -> Result<AttackResult> {
    cfg.validate()?;
    if cfg.targets.is_empty() {
        return Err(Error::Param("no targets given".into()));
    }
    for &t in &cfg.targets {
        if t >= sources.full.len() {
            return Err(Error::Param(format!(
                "target index {t} out of range for a dataset of {} records",
                sources.full.len()
            )));
        }
    }

    let dir = RunDir::create(out, cfg)?;
    let done_pred = completed_instances(&read_log(&dir.predictions_path())?);
    let done_ctrl = completed_instances(&read_log(&dir.control_path())?);
    let mut plog = PredictionLog::open_append(&dir.predictions_path())?;
    let mut clog = PredictionLog::open_append(&dir.control_path())?;

    for &tid in &cfg.targets {
        let key = (cfg.scenario, tid);
        // An instance counts as done only when both logs have its row;
        // recomputing a half-written instance reproduces the same rows.
        let done: BTreeSet<usize> = match (done_pred.get(&key), done_ctrl.get(&key)) {
            (Some(a), Some(b)) => a.intersection(b).copied().collect(),
            _ => BTreeSet::new(),
        };
        if done.len() >= cfg.n_test {
            ::log::info!("target {tid} {}: already complete, skipping", cfg.scenario);
            continue;
        }
        let x_t = sources.full.record(tid);
        run_target(&x_t, tid, cfg, sources, &done, Some((&mut plog, &mut clog)))?;
    }
    drop((plog, clog));

    let rows = read_log(&dir.predictions_path())?;
    let control = read_log(&dir.control_path())?;
    aggregate(cfg, &rows, &control)
}

/// Compute the experiment result from logged rows alone.
pub fn aggregate(
    cfg: &AttackConfig,
    rows: &[PredictionRow],
    control: &[PredictionRow],
) -> Result<AttackResult> {
    let mut per_target = Vec::with_capacity(cfg.targets.len());
    for &tid in &cfg.targets {
        per_target.push(TargetOutcome {
            target_id: tid,
            accuracy: target_accuracy(cfg, rows, tid, "prediction")?,
            control_accuracy: target_accuracy(cfg, control, tid, "control")?,
        });
    }
    let accs: Vec<f64> = per_target.iter().map(|t| t.accuracy).collect();
    let mean_accuracy = mean(&accs);
    let std_accuracy = population_std(&accs, mean_accuracy);
    let control_mean = mean(
        &per_target
            .iter()
            .map(|t| t.control_accuracy)
            .collect::<Vec<_>>(),
    );
    Ok(AttackResult {
        scenario: cfg.scenario,
        per_target,
        mean_accuracy,
        std_accuracy,
        control_mean,
    })
}

/// Accuracy over exactly the instances 0..n_test for one target, taking
/// the first logged row per instance. Rows are deterministic, so duplicates
/// from a resumed half-written instance agree anyway.
fn target_accuracy(
    cfg: &AttackConfig,
    rows: &[PredictionRow],
    tid: usize,
    which: &str,
) -> Result<f64> {
    let mut seen: BTreeMap<usize, &PredictionRow> = BTreeMap::new();
    for r in rows {
        if r.scenario == cfg.scenario && r.target_id == tid {
            seen.entry(r.instance_id).or_insert(r);
        }
    }
    let expected: BTreeSet<usize> = (0..cfg.n_test).collect();
    let got: BTreeSet<usize> = seen.keys().copied().collect();
    if got != expected {
        return Err(Error::Config(format!(
            "{which} log for target {tid} covers {} of {} instances",
            got.len(),
            cfg.n_test
        )));
    }
    let correct = seen.values().filter(|r| r.truth == r.prediction).count();
    Ok(correct as f64 / cfg.n_test as f64)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Repeat a black-box experiment across shadow-pool sizes, one run
/// directory per size under `out_root`.
pub fn sweep_m(
    cfg: &AttackConfig,
    m_values: &[usize],
    sources: &Sources,
    out_root: &Path,
) -> Result<Vec<(usize, AttackResult)>> {
    if cfg.scenario != Scenario::S1 {
        return Err(Error::Param(format!(
            "the pool-size sweep is defined for scenario s1, got {}",
            cfg.scenario
        )));
    }
    if m_values.is_empty() {
        return Err(Error::Param("no pool sizes given".into()));
    }
    let mut out = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let mut sized = cfg.clone();
        sized.m = Some(m);
        sized.validate()?;
        let dir = out_root.join(format!("m_{m}"));
        out.push((m, run_experiment(&sized, sources, &dir)?));
    }
    Ok(out)
}
