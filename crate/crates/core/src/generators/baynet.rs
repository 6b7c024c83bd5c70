//! Bayesian-network synthesizer.
//!
//! Structure learning is greedy: nodes are placed in order of strongest
//! pairwise mutual information with the already-placed set, and each new
//! node's parents are grown one at a time, keeping the addition only when
//! it strictly raises the joint mutual information. Parent growth evaluates
//! joint MI over the node's strongest pairwise candidates, which keeps
//! fitting cheap enough to run hundreds of thousands of times. Conditional
//! probability tables are maximum-likelihood; parent combinations never
//! observed during fitting fall back to the node's marginal at sampling
//! time.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance, Schema};
use crate::error::{Error, Result};
use crate::seed::rng_from;

use super::mi::mutual_information;

/// Placed nodes considered for joint-MI parent growth, strongest pairwise
/// first.
const PARENT_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    /// Probability vector per observed parent combination (mixed-radix key
    /// over the parent codes, in stored parent order).
    table: BTreeMap<u64, Vec<f64>>,
    /// Attribute marginal; also the fallback for unseen combinations.
    marginal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayNetModel {
    schema: Arc<Schema>,
    /// Attribute indices in sampling (topological) order.
    order: Vec<usize>,
    /// Parent attribute indices per attribute, in greedy insertion order.
    parents: Vec<Vec<usize>>,
    cpts: Vec<Cpt>,
}

impl BayNetModel {
    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parents(&self, attr: usize) -> &[usize] {
        &self.parents[attr]
    }

    /// P(row[attr] | parents of attr as coded in row), with the marginal as
    /// the fallback for unseen parent combinations.
    pub fn conditional(&self, attr: usize, row: &[u32]) -> f64 {
        let cpt = &self.cpts[attr];
        let dist = if self.parents[attr].is_empty() {
            &cpt.marginal
        } else {
            let key = combo_key(row, &self.parents[attr], &self.schema);
            cpt.table.get(&key).unwrap_or(&cpt.marginal)
        };
        dist[row[attr] as usize]
    }

    /// Model probability of a full record: product of conditionals along
    /// the sampling order.
    pub fn joint_probability(&self, row: &[u32]) -> f64 {
        self.order
            .iter()
            .map(|&attr| self.conditional(attr, row))
            .product()
    }

    pub(crate) fn sample(&self, m: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(seed);
        let f = self.schema.attribute_count();
        let mut out = Dataset::new(Arc::clone(&self.schema), Provenance::Synthetic);
        let mut row = vec![0u32; f];
        for _ in 0..m {
            for &attr in &self.order {
                let cpt = &self.cpts[attr];
                let dist = if self.parents[attr].is_empty() {
                    &cpt.marginal
                } else {
                    let key = combo_key(&row, &self.parents[attr], &self.schema);
                    cpt.table.get(&key).unwrap_or(&cpt.marginal)
                };
                row[attr] = draw(dist, &mut rng);
            }
            out.push_row_unchecked(&row);
        }
        out
    }
}

/// Inverse-CDF draw from a probability vector.
fn draw<R: Rng>(dist: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0u32;
    for (i, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            last_positive = i as u32;
        }
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    // Rounding can leave the cumulative sum a hair under 1.
    last_positive
}

fn combo_key(row: &[u32], parents: &[usize], schema: &Schema) -> u64 {
    let mut key = 0u64;
    for &p in parents {
        key = key * schema.cardinality(p) as u64 + row[p] as u64;
    }
    key
}

pub(crate) fn fit_baynet(d: &Dataset, max_parents: usize, _seed: u64) -> Result<BayNetModel> {
    if max_parents == 0 {
        return Err(Error::Param("max_parents must be >= 1".into()));
    }
    if d.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 records to fit, got {}",
            d.len()
        )));
    }
    let schema = Arc::clone(d.schema());
    let f = schema.attribute_count();

    // Pairwise MI, the scaffold for both node ordering and candidate
    // pruning. Symmetric up to rounding; computed once per unordered pair.
    let mut pair_mi = vec![vec![0.0f64; f]; f];
    for i in 0..f {
        for j in 0..i {
            let mi = mutual_information(d, i, &[j])?;
            pair_mi[i][j] = mi;
            pair_mi[j][i] = mi;
        }
    }

    let mut placed: Vec<usize> = Vec::with_capacity(f);
    let mut unplaced: Vec<usize> = (0..f).collect();
    while let Some(pos) = next_node(&pair_mi, &placed, &unplaced) {
        placed.push(unplaced.remove(pos));
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); f];
    for (rank, &node) in placed.iter().enumerate() {
        parents[node] = grow_parents(d, node, &placed[..rank], &pair_mi, max_parents)?;
    }

    let cpts = (0..f)
        .map(|attr| estimate_cpt(d, attr, &parents[attr]))
        .collect();

    Ok(BayNetModel {
        schema,
        order: placed,
        parents,
        cpts,
    })
}

/// Position in `unplaced` of the next node to place: the one with the
/// strongest pairwise MI to any placed node (to any node at all for the
/// first pick). Ties go to the lowest attribute index.
fn next_node(pair_mi: &[Vec<f64>], placed: &[usize], unplaced: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (pos, &x) in unplaced.iter().enumerate() {
        let against: &[usize] = if placed.is_empty() { unplaced } else { placed };
        let score = against
            .iter()
            .filter(|&&y| y != x)
            .map(|&y| pair_mi[x][y])
            .fold(0.0f64, f64::max);
        let better = match best {
            Some((_, b)) => score > b,
            None => true,
        };
        if better {
            best = Some((pos, score));
        }
    }
    best.map(|(pos, _)| pos)
}

/// Greedy forward selection of parents for `node` from `placed`, capped at
/// `max_parents`, keeping an addition only when joint MI strictly
/// increases. Candidates are the strongest `PARENT_CANDIDATES` placed nodes
/// by pairwise MI.
fn grow_parents(
    d: &Dataset,
    node: usize,
    placed: &[usize],
    pair_mi: &[Vec<f64>],
    max_parents: usize,
) -> Result<Vec<usize>> {
    let mut candidates: Vec<usize> = placed.to_vec();
    candidates.sort_by(|&a, &b| {
        pair_mi[node][b]
            .partial_cmp(&pair_mi[node][a])
            .expect("MI is finite")
            .then(a.cmp(&b))
    });
    candidates.truncate(PARENT_CANDIDATES);

    let mut parents: Vec<usize> = Vec::new();
    let mut best_mi = 0.0f64;
    while parents.len() < max_parents {
        let mut best_add: Option<(usize, f64)> = None;
        for &q in &candidates {
            if parents.contains(&q) {
                continue;
            }
            let mut trial = parents.clone();
            trial.push(q);
            let mi = mutual_information(d, node, &trial)?;
            let better = match best_add {
                Some((_, b)) => mi > b,
                None => true,
            };
            if better {
                best_add = Some((q, mi));
            }
        }
        match best_add {
            Some((q, mi)) if mi > best_mi => {
                parents.push(q);
                best_mi = mi;
            }
            _ => break,
        }
    }
    Ok(parents)
}

fn estimate_cpt(d: &Dataset, attr: usize, parents: &[usize]) -> Cpt {
    let schema = d.schema();
    let card = schema.cardinality(attr);
    let n = d.len();

    let mut marginal_counts = vec![0u32; card];
    for row in d.rows() {
        marginal_counts[row[attr] as usize] += 1;
    }
    let marginal: Vec<f64> = marginal_counts
        .iter()
        .map(|&c| c as f64 / n as f64)
        .collect();

    let mut table = BTreeMap::new();
    if !parents.is_empty() {
        let mut keyed: Vec<(u64, u32)> = d
            .rows()
            .map(|row| (combo_key(row, parents, schema), row[attr]))
            .collect();
        keyed.sort_unstable();
        let mut at = 0;
        while at < keyed.len() {
            let combo = keyed[at].0;
            let mut end = at;
            let mut counts = vec![0u32; card];
            while end < keyed.len() && keyed[end].0 == combo {
                counts[keyed[end].1 as usize] += 1;
                end += 1;
            }
            let total = (end - at) as f64;
            let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
            table.insert(combo, dist);
            at = end;
        }
    }
    Cpt { table, marginal }
}
