//! World construction and per-scenario shadow pools.
//!
//! A "world" is one candidate training set for the audited generator:
//! `d_size - 1` base records drawn from a pool, plus either the target
//! record (member world) or a fresh random record from the pool (non-member
//! world). Test instances fit the target generator on worlds drawn from the
//! held-out test split; shadow worlds are drawn from whatever pool the
//! attacker's scenario grants access to.

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, Provenance, Record};
use crate::error::{Error, Result};
use crate::generators::{self, GeneratorModel, GeneratorSpec};
use crate::seed::{perturb, rng_from, Role, SeedCtx};

use super::{AttackConfig, Scenario};

/// One candidate training set with its membership label.
#[derive(Debug, Clone)]
pub struct World {
    pub data: Dataset,
    pub is_member: bool,
    pub seed: u64,
    /// Base records were drawn with replacement because the pool was too
    /// small; expected for published-data pools of size `n_synthetic`.
    pub with_replacement: bool,
}

/// One evaluation unit: the target generator fit on a hidden world, and the
/// synthetic dataset it released.
#[derive(Debug)]
pub struct TestInstance {
    pub id: usize,
    pub is_member: bool,
    /// The released synthetic dataset the attacker actually observes.
    pub released: Dataset,
    /// The target generator itself; only black-box style scenarios may
    /// query it.
    pub model: GeneratorModel,
    /// Generator fit on the adjoining world (the member world with the
    /// target swapped for a random record). Present only for member
    /// instances in the upper-bound scenario.
    pub adjoin: Option<GeneratorModel>,
    pub with_replacement: bool,
}

/// Build one world: `size - 1` base records sampled from `pool` minus all
/// exact-match copies of the target, then the target itself (member) or a
/// fresh random non-target record (non-member) appended.
pub fn build_world(
    pool: &Dataset,
    x_t: &Record,
    size: usize,
    label: bool,
    seed: u64,
) -> Result<World> {
    if size < 2 {
        return Err(Error::Param(format!("world size must be >= 2, got {size}")));
    }
    let eligible: Vec<usize> = (0..pool.len())
        .filter(|&i| pool.row(i) != x_t.codes())
        .collect();
    if eligible.is_empty() {
        return Err(Error::Fit(
            "pool has no records distinct from the target".into(),
        ));
    }
    let mut rng = rng_from(seed);
    let base = size - 1;
    let with_replacement = eligible.len() < base;
    let picked: Vec<usize> = if with_replacement {
        (0..base)
            .map(|_| eligible[rng.gen_range(0..eligible.len())])
            .collect()
    } else {
        rand::seq::index::sample(&mut rng, eligible.len(), base)
            .iter()
            .map(|i| eligible[i])
            .collect()
    };
    let mut data = pool.subset(&picked);
    if label {
        data.push_row(x_t.codes())?;
    } else {
        let x_r = eligible[rng.gen_range(0..eligible.len())];
        data.push_row(pool.row(x_r))?;
    }
    Ok(World {
        data,
        is_member: label,
        seed,
        with_replacement,
    })
}

/// Fit a generator, retrying exactly once with a perturbed seed if the fit
/// itself fails. A second failure aborts with both diagnostics.
pub(crate) fn fit_with_retry(
    spec: &GeneratorSpec,
    d: &Dataset,
    seed: u64,
) -> Result<GeneratorModel> {
    match generators::fit(spec, d, seed) {
        Ok(model) => Ok(model),
        Err(Error::Fit(first)) => generators::fit(spec, d, perturb(seed)).map_err(|second| {
            Error::Fit(format!(
                "generator fit failed twice (seed {seed}): {first}; after perturbed retry: {second}"
            ))
        }),
        Err(other) => Err(other),
    }
}

/// Exactly `n/2` member labels, order shuffled by the given context.
pub fn balanced_labels(n: usize, ctx: &SeedCtx) -> Vec<bool> {
    let mut labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    let mut rng = ctx.rng();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    labels
}

/// Construct the `n_test` evaluation instances for one target: balanced
/// membership labels, one hidden world and one released synthetic dataset
/// each, plus the adjoining generator where the scenario needs it.
pub fn make_test_instances(
    d_test: &Dataset,
    x_t: &Record,
    cfg: &AttackConfig,
    target_ctx: &SeedCtx,
) -> Result<Vec<TestInstance>> {
    let labels = balanced_labels(cfg.n_test, &target_ctx.with(Role::TestLabels, 0));
    (0..cfg.n_test)
        .into_par_iter()
        .map(|i| {
            let ictx = target_ctx.with(Role::Instance, i as u64);
            let world = build_world(
                d_test,
                x_t,
                cfg.d_size,
                labels[i],
                ictx.with(Role::TestWorld, 0).seed(),
            )?;
            let model = fit_with_retry(
                &cfg.generator,
                &world.data,
                ictx.with(Role::TestFit, 0).seed(),
            )?;
            let released = generators::sample(
                &model,
                cfg.n_synthetic,
                ictx.with(Role::TestSample, 0).seed(),
            )?;
            let adjoin = if cfg.scenario == Scenario::S3 && world.is_member {
                let adj = adjoining_world(&world, d_test, x_t, &ictx)?;
                Some(fit_with_retry(
                    &cfg.generator,
                    &adj,
                    ictx.with(Role::AdjoinFit, 0).seed(),
                )?)
            } else {
                None
            };
            Ok(TestInstance {
                id: i,
                is_member: world.is_member,
                released,
                model,
                adjoin,
                with_replacement: world.with_replacement,
            })
        })
        .collect()
}

/// The member world with its appended target swapped for a fresh random
/// record: the two training sets differ in exactly one row.
fn adjoining_world(world: &World, pool: &Dataset, x_t: &Record, ictx: &SeedCtx) -> Result<Dataset> {
    let eligible: Vec<usize> = (0..pool.len())
        .filter(|&i| pool.row(i) != x_t.codes())
        .collect();
    if eligible.is_empty() {
        return Err(Error::Fit(
            "pool has no records distinct from the target".into(),
        ));
    }
    let mut rng = ictx.with(Role::AdjoinWorld, 0).rng();
    let replacement = eligible[rng.gen_range(0..eligible.len())];
    let keep: Vec<usize> = (0..world.data.len() - 1).collect();
    let mut adj = world.data.subset(&keep);
    adj.push_row(pool.row(replacement))?;
    Ok(adj)
}

/// The records the attacker may build shadow worlds from, per scenario.
///
/// * S0: the real auxiliary split, shared across instances.
/// * S1: `m` fresh records drawn from the target generator.
/// * S2: a second generator fit on the released synthetic data, sampled `m`
///   times; nothing real is touched.
/// * S3: like S1, except member instances draw from the adjoining
///   generator, which never saw the target.
pub fn shadow_pool(
    instance: &TestInstance,
    cfg: &AttackConfig,
    d_aux: Option<&Dataset>,
    ictx: &SeedCtx,
) -> Result<Dataset> {
    let m = cfg.pool_size();
    match cfg.scenario {
        Scenario::S0 => d_aux
            .cloned()
            .ok_or_else(|| Error::Config("scenario s0 requires an auxiliary dataset".into())),
        Scenario::S1 => {
            generators::sample(&instance.model, m, ictx.with(Role::PoolSample, 0).seed())
        }
        Scenario::S2 => {
            let phi_s = fit_with_retry(
                &cfg.generator,
                &instance.released,
                ictx.with(Role::PoolFit, 0).seed(),
            )?;
            generators::sample(&phi_s, m, ictx.with(Role::PoolSample, 0).seed())
        }
        Scenario::S3 => {
            let model = if instance.is_member {
                instance.adjoin.as_ref().ok_or_else(|| {
                    Error::Config("member instance lacks an adjoining generator".into())
                })?
            } else {
                &instance.model
            };
            generators::sample(model, m, ictx.with(Role::PoolSample, 0).seed())
        }
    }
}

/// Provenance guard: scenarios that promise to never read real data must
/// only ever see synthetic pools.
pub(crate) fn assert_pool_provenance(pool: &Dataset, scenario: Scenario) -> Result<()> {
    match scenario {
        Scenario::S0 => Ok(()),
        _ => {
            if pool.provenance() != Provenance::Synthetic {
                return Err(Error::Config(format!(
                    "scenario {} shadow pool is tagged as real data",
                    scenario.as_str()
                )));
            }
            Ok(())
        }
    }
}
