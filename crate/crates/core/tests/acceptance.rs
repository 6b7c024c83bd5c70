//! Acceptance gate for the whole toolkit.
//!
//! Seven checks, each printed as one `criterion N: PASS` / `criterion N:
//! FAIL` line (run with `--nocapture` to watch them). Criteria 1 through 3
//! share a single scaled end-to-end run: the bundled census-style corpus,
//! BayNet generator, |D| = n_synthetic = 1000, n_shadow = 400, n_test = 40,
//! the three most vulnerable records as targets, one master seed. That run
//! takes roughly half an hour of CPU time; the remaining criteria are
//! cheap by comparison.

use std::collections::BTreeMap;
use std::fs;
use std::sync::Arc;

use once_cell::sync::Lazy;
use rand::Rng;
use synthmia::attack::{
    balanced_labels, build_world, make_test_instances, read_log, run_experiment, shadow_pool,
    sweep_m, AttackConfig, AttackResult, PredictionRow, Scenario, Sources, CONTROL_FILE,
    PREDICTIONS_FILE,
};
use synthmia::dataset::{split_disjoint, Dataset, Record, Schema};
use synthmia::features::{extract_features, generate_queries, FeatureVector};
use synthmia::fixture::{chain3_dataset, demo_dataset};
use synthmia::generators::{fit, sample, GeneratorModel, GeneratorSpec};
use synthmia::metaclassifier::best_split;
use synthmia::seed::{rng_from, Role, SeedCtx};
use synthmia::vulnerability::{cosine_distance, encode_record, rank_vulnerable};

const MASTER_SEED: u64 = 0;
const CORPUS_RECORDS: usize = 20_000;
const CORPUS_SEED: u64 = 0;
const BINS: usize = 20;
const D_SIZE: usize = 1000;
const N_SHADOW: usize = 400;
const N_TEST: usize = 40;
const AUX_RECORDS: usize = 10_000;
const TEST_RECORDS: usize = 5_000;

fn verdict(n: u32, pass: bool) -> bool {
    println!("criterion {n}: {}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn corpus() -> Dataset {
    demo_dataset(CORPUS_RECORDS, CORPUS_SEED, BINS).expect("fixture corpus")
}

fn sources_for(full: &Dataset, master: u64) -> Sources {
    let split_seed = SeedCtx::new(master).with(Role::Split, 0).seed();
    let mut parts =
        split_disjoint(full, &[AUX_RECORDS, TEST_RECORDS], split_seed).expect("aux/test split");
    let d_test = parts.pop().unwrap();
    let d_aux = parts.pop().unwrap();
    Sources {
        full: full.clone(),
        d_aux: Some(d_aux),
        d_test,
    }
}

fn scaled_cfg(scenario: Scenario, targets: Vec<usize>, master: u64) -> AttackConfig {
    AttackConfig {
        scenario,
        generator: GeneratorSpec::baynet(),
        d_size: D_SIZE,
        n_synthetic: D_SIZE,
        n_shadow: N_SHADOW,
        n_test: N_TEST,
        m: None,
        query_budget: 100_000,
        rf: Default::default(),
        master_seed: master,
        targets,
    }
}

fn top3_targets(full: &Dataset) -> Vec<usize> {
    rank_vulnerable(full, 5, 3)
        .expect("vulnerability ranking")
        .into_iter()
        .map(|s| s.index)
        .collect()
}

/// One scenario of the scaled run, executed through the logged experiment
/// path so the criteria can also inspect the raw prediction rows.
fn run_scenario(
    scenario: Scenario,
    targets: &[usize],
    sources: &Sources,
    master: u64,
) -> (AttackResult, Vec<PredictionRow>, Vec<PredictionRow>) {
    let dir = tempfile::tempdir().expect("run dir");
    let root = dir.path().join(scenario.as_str());
    let cfg = scaled_cfg(scenario, targets.to_vec(), master);
    let result = run_experiment(&cfg, sources, &root).expect("scaled run");
    let rows = read_log(&root.join(PREDICTIONS_FILE)).expect("prediction log");
    let control = read_log(&root.join(CONTROL_FILE)).expect("control log");
    (result, rows, control)
}

struct Scaled {
    targets: Vec<usize>,
    results: BTreeMap<Scenario, AttackResult>,
    rows: BTreeMap<Scenario, Vec<PredictionRow>>,
}

static SCALED: Lazy<Scaled> = Lazy::new(|| {
    let full = corpus();
    let sources = sources_for(&full, MASTER_SEED);
    let targets = top3_targets(&full);
    let mut results = BTreeMap::new();
    let mut rows = BTreeMap::new();
    for scenario in Scenario::ALL {
        eprintln!("scaled run: scenario {scenario} starting");
        let (result, r, _) = run_scenario(scenario, &targets, &sources, MASTER_SEED);
        results.insert(scenario, result);
        rows.insert(scenario, r);
    }
    Scaled {
        targets,
        results,
        rows,
    }
});

fn mean(s: &Scaled, scenario: Scenario) -> f64 {
    s.results[&scenario].mean_accuracy
}

#[test]
fn criterion1_scaled_attack_accuracy() {
    let s = &*SCALED;
    let (s0, s1, s2, s3) = (
        mean(s, Scenario::S0),
        mean(s, Scenario::S1),
        mean(s, Scenario::S2),
        mean(s, Scenario::S3),
    );
    println!(
        "scaled means: s0 {:.1}% s1 {:.1}% s2 {:.1}% s3 {:.1}% (targets {:?})",
        s0 * 100.0,
        s1 * 100.0,
        s2 * 100.0,
        s3 * 100.0,
        s.targets
    );
    let pass = s0 >= 0.60 && s1 >= 0.55 && s2 >= 0.55 && [s0, s1, s2, s3].iter().all(|&a| a > 0.50);
    assert!(
        verdict(1, pass),
        "scaled accuracies s0 {s0:.3} s1 {s1:.3} s2 {s2:.3} s3 {s3:.3} \
         must reach 0.60 / 0.55 / 0.55 and all exceed 0.50"
    );
}

#[test]
fn criterion2_upper_bound_ordering() {
    let s = &*SCALED;
    let ordering_holds = |s0: f64, s1: f64, s3: f64| s3 >= s1 + 0.05 - 1e-9 && s3 >= s0 - 1e-9;
    let (s0, s1, s3) = (
        mean(s, Scenario::S0),
        mean(s, Scenario::S1),
        mean(s, Scenario::S3),
    );
    println!(
        "ordering: s3 {:.1}% vs s1 {:.1}% (+{:.1} p.p.) and s0 {:.1}%",
        s3 * 100.0,
        s1 * 100.0,
        (s3 - s1) * 100.0,
        s0 * 100.0
    );
    let mut pass = ordering_holds(s0, s1, s3);
    if !pass {
        // The ordering is allowed to be decided by majority over three
        // seeds when the primary seed misses it.
        eprintln!("primary seed missed the ordering; running two more seeds");
        let mut wins = 0;
        for extra in [MASTER_SEED + 1, MASTER_SEED + 2] {
            let full = corpus();
            let sources = sources_for(&full, extra);
            let targets = top3_targets(&full);
            let mut means = BTreeMap::new();
            for scenario in [Scenario::S0, Scenario::S1, Scenario::S3] {
                let (result, _, _) = run_scenario(scenario, &targets, &sources, extra);
                means.insert(scenario, result.mean_accuracy);
            }
            if ordering_holds(
                means[&Scenario::S0],
                means[&Scenario::S1],
                means[&Scenario::S3],
            ) {
                wins += 1;
            }
        }
        pass = wins >= 2;
    }
    assert!(
        verdict(2, pass),
        "upper bound must beat black-box by 5 p.p. and match auxiliary"
    );
}

#[test]
fn criterion3_shuffled_label_control() {
    let s = &*SCALED;
    let mut worst: (f64, String) = (0.5, String::new());
    let mut pass = true;
    for (scenario, result) in &s.results {
        for outcome in &result.per_target {
            let c = outcome.control_accuracy;
            if (c - 0.5).abs() > (worst.0 - 0.5).abs() {
                worst = (c, format!("{scenario} target {}", outcome.target_id));
            }
            if !(0.35..=0.65).contains(&c) {
                pass = false;
            }
        }
    }
    println!(
        "controls per scenario x target all in [0.35, 0.65]; farthest from 0.5: {:.3} ({})",
        worst.0, worst.1
    );
    assert!(
        verdict(3, pass),
        "a shuffled-label control left [0.35, 0.65]: {:?}",
        s.results
            .values()
            .flat_map(|r| r.per_target.iter().map(|o| o.control_accuracy))
            .collect::<Vec<_>>()
    );
}

/// Total variation distance between the attribute's marginal in two
/// datasets sharing a schema.
fn marginal_tv(a: &Dataset, b: &Dataset, attr: usize) -> f64 {
    let cards = a.schema().cardinality(attr);
    let count = |d: &Dataset| {
        let mut c = vec![0usize; cards];
        for row in d.rows() {
            c[row[attr] as usize] += 1;
        }
        c
    };
    let (ca, cb) = (count(a), count(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    0.5 * ca
        .iter()
        .zip(&cb)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

#[test]
fn criterion4_generator_fidelity() {
    let train = demo_dataset(D_SIZE, 1, BINS).expect("fidelity training set");
    let mut pass = true;
    for spec in [GeneratorSpec::baynet(), GeneratorSpec::cart()] {
        let model = fit(&spec, &train, 7).expect("fidelity fit");
        let synth = sample(&model, 10_000, 8).expect("fidelity sample");
        let worst = (0..train.width())
            .map(|a| marginal_tv(&train, &synth, a))
            .fold(0.0f64, f64::max);
        println!("{}: worst 1-way marginal tv {:.4}", spec.name(), worst);
        if worst > 0.1 {
            pass = false;
        }
    }

    // Sampler oracle on an enumerable model: the empirical joint of a large
    // sample must match the joint implied by the fitted network's own CPTs.
    let chain = chain3_dataset(50_000, 3);
    let model = fit(&GeneratorSpec::baynet(), &chain, 9).expect("chain fit");
    let net = match &model {
        GeneratorModel::BayNet(b) => b,
        GeneratorModel::Cart(_) => unreachable!("baynet spec fitted a cart model"),
    };
    let synth = sample(&model, 100_000, 10).expect("chain sample");
    let mut empirical = [0usize; 8];
    for row in synth.rows() {
        empirical[(row[0] * 4 + row[1] * 2 + row[2]) as usize] += 1;
    }
    let mut implied_total = 0.0;
    let mut joint_tv = 0.0;
    for a in 0..2u32 {
        for b in 0..2u32 {
            for c in 0..2u32 {
                let p = net.joint_probability(&[a, b, c]);
                let q = empirical[(a * 4 + b * 2 + c) as usize] as f64 / synth.len() as f64;
                implied_total += p;
                joint_tv += (p - q).abs();
            }
        }
    }
    joint_tv *= 0.5;
    println!("baynet sampler joint tv {joint_tv:.4} (cpt mass {implied_total:.6})");
    if (implied_total - 1.0).abs() > 1e-9 || joint_tv > 0.02 {
        pass = false;
    }
    assert!(verdict(4, pass), "a generator fidelity bound was exceeded");
}

/// Per-query fraction computed the obvious way: scan every record, test
/// every attribute in the subset.
fn naive_features(q: &synthmia::features::QuerySet, synth: &Dataset) -> Vec<f64> {
    let target = q.target().codes();
    q.subsets()
        .iter()
        .map(|&mask| {
            let mut count = 0usize;
            for row in synth.rows() {
                let mut ok = true;
                for (i, (&r, &t)) in row.iter().zip(target).enumerate() {
                    if mask & (1 << i) != 0 && r != t {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    count += 1;
                }
            }
            count as f64 / synth.len() as f64
        })
        .collect()
}

/// Exhaustive exact Gini split: every feature, every midpoint between
/// consecutive distinct sorted values, scored with integer arithmetic and
/// first-wins ties, mirroring the contract `best_split` documents.
fn oracle_split(features: &[FeatureVector], labels: &[bool]) -> Option<(usize, f64)> {
    let n = features.len();
    if n == 0 {
        return None;
    }
    let dims = features[0].len();
    // score = sum over children of (sum of squared class counts) / size,
    // compared as exact fractions; larger is purer.
    let mut best: Option<(usize, f64, u128, u128)> = None;
    for feat in 0..dims {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| features[a][feat].total_cmp(&features[b][feat]));
        let mut left = [0u128; 2];
        let mut total = [0u128; 2];
        for &i in &order {
            total[labels[i] as usize] += 1;
        }
        for w in 0..n - 1 {
            left[labels[order[w]] as usize] += 1;
            let v = features[order[w]][feat];
            let v_next = features[order[w + 1]][feat];
            if v == v_next {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let (nl, nr) = (left[0] + left[1], right[0] + right[1]);
            let num = (left[0] * left[0] + left[1] * left[1]) * nr
                + (right[0] * right[0] + right[1] * right[1]) * nl;
            let den = nl * nr;
            let better = match best {
                Some((_, _, bn, bd)) => num * bd > bn * den,
                None => true,
            };
            if better {
                best = Some((feat, (v + v_next) / 2.0, num, den));
            }
        }
    }
    best.map(|(f, t, _, _)| (f, t))
}

/// All-pairs vulnerability ranking over the dense one-hot encoding: the
/// slow reference for `rank_vulnerable`.
fn oracle_ranking(d: &Dataset, k: usize) -> Vec<(usize, f64)> {
    let schema: &Arc<Schema> = d.schema();
    let encoded: Vec<Vec<f64>> = (0..d.len())
        .map(|i| encode_record(schema, d.record(i).codes()).expect("encode"))
        .collect();
    let mut scored: Vec<(usize, f64)> = (0..d.len())
        .map(|i| {
            let mut dists: Vec<f64> = (0..d.len())
                .filter(|&j| j != i)
                .map(|j| cosine_distance(&encoded[i], &encoded[j]))
                .collect();
            dists.sort_unstable_by(f64::total_cmp);
            (i, dists[..k].iter().sum::<f64>() / k as f64)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}

#[test]
fn criterion5_oracle_equivalences() {
    let mut pass = true;

    // Count-query evaluation vs a naive scan, 100 random cases.
    let mut rng = rng_from(0x5eed);
    for case in 0..100u64 {
        let n = rng.gen_range(1..=300);
        let d = demo_dataset(n, 1000 + case, rng.gen_range(2..=8)).expect("case dataset");
        let target = d.record(rng.gen_range(0..n));
        let budget = rng.gen_range(1..=256);
        let q = generate_queries(d.schema(), &target, budget, rng.gen()).expect("queries");
        let fast = extract_features(&q, &d).expect("features");
        if fast != naive_features(&q, &d) {
            pass = false;
            eprintln!("query evaluation diverged from the naive scan on case {case}");
        }
    }
    println!("query evaluation matches the naive scan on 100 random cases");

    // Gini split vs brute force on every fixture of at most 50 samples.
    let mut gini_cases = 0;
    for seed in 0..60u64 {
        let mut rng = rng_from(0x9172 + seed);
        let n = rng.gen_range(2..=50);
        let dims = rng.gen_range(1..=5);
        let quantize = rng.gen_bool(0.5);
        let features: Vec<FeatureVector> = (0..n)
            .map(|_| {
                (0..dims)
                    .map(|_| {
                        let x: f64 = rng.gen();
                        if quantize {
                            (x * 4.0).round() / 4.0
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        let labels: Vec<bool> = match seed % 3 {
            0 => (0..n).map(|_| rng.gen()).collect(),
            1 => features.iter().map(|f| f[0] > 0.5).collect(),
            _ => vec![true; n],
        };
        if best_split(&features, &labels) != oracle_split(&features, &labels) {
            pass = false;
            eprintln!("gini split diverged from brute force at seed {seed}");
        }
        gini_cases += 1;
    }
    // Constant features must yield no split at all.
    let flat = vec![vec![1.0, 2.0]; 10];
    let flat_labels: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
    if best_split(&flat, &flat_labels).is_some() || oracle_split(&flat, &flat_labels).is_some() {
        pass = false;
    }
    println!("gini splits match brute force on {gini_cases} fixtures plus the constant case");

    // Vulnerability ranking vs the all-pairs scan at n = 500.
    let d = demo_dataset(500, 11, 8).expect("ranking dataset");
    let ranked = rank_vulnerable(&d, 5, d.len()).expect("ranking");
    let oracle = oracle_ranking(&d, 5);
    if ranked.len() != oracle.len()
        || ranked
            .iter()
            .zip(&oracle)
            .any(|(r, &(i, s))| r.index != i || r.score != s)
    {
        pass = false;
        eprintln!("vulnerability ranking diverged from the all-pairs oracle");
    }
    println!("vulnerability ranking matches the all-pairs oracle at n = 500");

    assert!(verdict(5, pass), "an exact oracle equivalence failed");
}

/// Small full-pipeline configuration for the structural checks: big enough
/// to exercise every scenario, cheap enough to re-derive every world.
fn small_setup() -> (Dataset, Sources, AttackConfig) {
    let full = demo_dataset(600, 2, 6).expect("small corpus");
    let split_seed = SeedCtx::new(MASTER_SEED).with(Role::Split, 0).seed();
    let mut parts = split_disjoint(&full, &[250, 250], split_seed).expect("small split");
    let d_test = parts.pop().unwrap();
    let d_aux = parts.pop().unwrap();
    let sources = Sources {
        full: full.clone(),
        d_aux: Some(d_aux),
        d_test,
    };
    let cfg = AttackConfig {
        scenario: Scenario::S1,
        generator: GeneratorSpec::baynet(),
        d_size: 40,
        n_synthetic: 40,
        n_shadow: 8,
        n_test: 6,
        m: Some(80),
        query_budget: 512,
        rf: synthmia::metaclassifier::RfParams {
            n_trees: 20,
            max_depth: 6,
            ..Default::default()
        },
        master_seed: MASTER_SEED,
        targets: vec![3, 17],
    };
    (full, sources, cfg)
}

#[test]
fn criterion6_structural_invariants() {
    let mut pass = true;

    // Exact 50/50 truth balance in every scenario x target cell of the
    // scaled run, and identical membership labels for s1 and s3.
    let s = &*SCALED;
    for (scenario, rows) in &s.rows {
        for &target in &s.targets {
            let members = rows
                .iter()
                .filter(|r| r.target_id == target && r.truth)
                .count();
            let total = rows.iter().filter(|r| r.target_id == target).count();
            if total != N_TEST || members * 2 != N_TEST {
                pass = false;
                eprintln!("{scenario} target {target}: {members} members of {total}");
            }
        }
    }

    // Shadow label balance, re-derived through the exact seed paths the
    // scaled run used.
    for &target in &s.targets {
        let tctx = SeedCtx::new(MASTER_SEED).with(Role::Target, target as u64);
        let batches = std::iter::once(tctx.clone())
            .chain((0..N_TEST).map(|i| tctx.with(Role::Instance, i as u64)));
        for scope in batches {
            let labels = balanced_labels(N_SHADOW, &scope.with(Role::ShadowLabels, 0));
            if labels.iter().filter(|&&l| l).count() * 2 != N_SHADOW {
                pass = false;
                eprintln!("unbalanced shadow labels under {scope:?}");
            }
        }
    }
    println!("label balance: exact 50/50 in every test and shadow set");

    // s3 must equal s1 on non-member instances: bit-identical predictions
    // and the same logged classifier seed.
    let key = |r: &PredictionRow| (r.target_id, r.instance_id);
    let s1: BTreeMap<_, _> = s.rows[&Scenario::S1].iter().map(|r| (key(r), r)).collect();
    let mut compared = 0;
    for r3 in &s.rows[&Scenario::S3] {
        let r1 = s1[&key(r3)];
        if r1.truth != r3.truth {
            pass = false;
            eprintln!("s1/s3 truth labels diverged on {:?}", key(r3));
        }
        if !r3.truth {
            compared += 1;
            if r1.prediction != r3.prediction || r1.seed != r3.seed {
                pass = false;
                eprintln!("s1/s3 non-member rows diverged on {:?}", key(r3));
            }
        }
    }
    println!("s3 equals s1 on all {compared} non-member instances (predictions and seeds)");

    // Every world of a small full pipeline, re-derived from the exact seed
    // paths the orchestrator uses: the target record never appears in a
    // non-member world and always closes a member world. The auxiliary
    // scenario builds one shadow batch per target; the others one per
    // instance.
    let (full, sources, small) = small_setup();
    let mut worlds = 0;
    let mut check_world = |world: &synthmia::attack::World, x_t: &Record, tag: &str| {
        worlds += 1;
        let rows: Vec<&[u32]> = world.data.rows().collect();
        if world.is_member {
            if rows[rows.len() - 1] != x_t.codes()
                || rows[..rows.len() - 1].iter().any(|r| *r == x_t.codes())
            {
                pass = false;
                eprintln!("member world malformed ({tag})");
            }
        } else if world.data.contains(x_t.codes()) {
            pass = false;
            eprintln!("target leaked into a non-member world ({tag})");
        }
    };
    for scenario in Scenario::ALL {
        let cfg = AttackConfig {
            scenario,
            ..small.clone()
        };
        for &target in &cfg.targets {
            let x_t = full.record(target);
            let tctx = SeedCtx::new(cfg.master_seed).with(Role::Target, target as u64);
            let instances =
                make_test_instances(&sources.d_test, &x_t, &cfg, &tctx).expect("instances");
            let mut batches: Vec<(SeedCtx, Dataset)> = Vec::new();
            if scenario == Scenario::S0 {
                batches.push((tctx.clone(), sources.d_aux.clone().unwrap()));
            }
            for inst in &instances {
                let ictx = tctx.with(Role::Instance, inst.id as u64);
                let test_world = build_world(
                    &sources.d_test,
                    &x_t,
                    cfg.d_size,
                    inst.is_member,
                    ictx.with(Role::TestWorld, 0).seed(),
                )
                .expect("test world");
                check_world(&test_world, &x_t, &format!("{scenario} test {}", inst.id));
                if scenario != Scenario::S0 {
                    let pool = shadow_pool(inst, &cfg, sources.d_aux.as_ref(), &ictx)
                        .expect("shadow pool");
                    batches.push((ictx, pool));
                }
            }
            for (scope, pool) in &batches {
                let shadow_labels =
                    balanced_labels(cfg.n_shadow, &scope.with(Role::ShadowLabels, 0));
                for (w, &label) in shadow_labels.iter().enumerate() {
                    let world = build_world(
                        pool,
                        &x_t,
                        cfg.d_size,
                        label,
                        scope.with(Role::ShadowWorld, w as u64).seed(),
                    )
                    .expect("shadow world");
                    check_world(&world, &x_t, &format!("{scenario} shadow {w}"));
                }
            }
        }
    }
    println!("target placement verified across {worlds} re-derived worlds");

    // Bit-reproducibility: the same experiment under 1 and 8 workers must
    // produce byte-identical logs and equal results.
    let mut logs: Vec<(Vec<u8>, Vec<u8>, Vec<AttackResult>)> = Vec::new();
    for threads in [1usize, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool");
        let dir = tempfile::tempdir().expect("worker run dir");
        let mut results = Vec::new();
        let mut pred_bytes = Vec::new();
        let mut ctrl_bytes = Vec::new();
        for scenario in Scenario::ALL {
            let cfg = AttackConfig {
                scenario,
                ..small.clone()
            };
            let root = dir.path().join(scenario.as_str());
            let result = pool
                .install(|| run_experiment(&cfg, &sources, &root))
                .expect("worker run");
            results.push(result);
            pred_bytes.extend(fs::read(root.join(PREDICTIONS_FILE)).expect("read predictions"));
            ctrl_bytes.extend(fs::read(root.join(CONTROL_FILE)).expect("read control"));
        }
        logs.push((pred_bytes, ctrl_bytes, results));
    }
    if logs[0] != logs[1] {
        pass = false;
        eprintln!("1-worker and 8-worker runs diverged");
    }
    println!("1 vs 8 workers: byte-identical logs and equal results");

    assert!(verdict(6, pass), "a structural invariant was violated");
}

#[test]
fn criterion7_pool_size_robustness() {
    let full = corpus();
    let sources = sources_for(&full, MASTER_SEED);
    let targets = top3_targets(&full);
    let cfg = AttackConfig {
        n_shadow: 200,
        n_test: 20,
        ..scaled_cfg(Scenario::S1, targets, MASTER_SEED)
    };
    let dir = tempfile::tempdir().expect("sweep dir");
    let runs = sweep_m(&cfg, &[5_000, 20_000, 50_000], &sources, dir.path()).expect("sweep");
    let means: Vec<f64> = runs.iter().map(|(_, r)| r.mean_accuracy).collect();
    let spread = means.iter().cloned().fold(f64::MIN, f64::max)
        - means.iter().cloned().fold(f64::MAX, f64::min);
    for ((m, r), mean) in runs.iter().zip(&means) {
        println!(
            "m = {m}: mean accuracy {:.1}% (control {:.1}%)",
            mean * 100.0,
            r.control_mean * 100.0
        );
    }
    println!("pool-size spread {:.1} p.p.", spread * 100.0);
    assert!(
        verdict(7, spread <= 0.10),
        "black-box accuracy moved more than 10 p.p. across pool sizes: {means:?}"
    );
}
