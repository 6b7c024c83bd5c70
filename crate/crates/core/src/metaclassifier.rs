//! Random-forest membership meta-classifier.
//!
//! Deliberately small: binary classes only, axis-aligned threshold splits,
//! Gini impurity. Split scores are compared with exact integer arithmetic
//! (class counts are integers, so two candidate splits compare as fractions
//! with no floating-point error), which keeps training bit-reproducible and
//! lets tests check the split finder against a brute-force oracle.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::seed::{derive, rng_from};

/// Forest hyperparameters. Fields left out of a JSON manifest fall back to
/// the defaults below; unknown fields are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Candidate features per node; `None` means floor(sqrt(dim)).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_depth: 10,
            min_samples_split: 2,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl RfParams {
    pub fn check(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Param("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Param("max_depth must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Param("min_samples_split must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Class counts of the training samples that reached this leaf,
    /// indexed by label (false, true).
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn vote(&self, x: &[f64]) -> bool {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { counts } => return counts[1] > counts[0],
            }
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
    dim: usize,
}

impl RandomForest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Train a forest on feature vectors with boolean membership labels.
pub fn train_rf(
    features: &[FeatureVector],
    labels: &[bool],
    params: &RfParams,
) -> Result<RandomForest> {
    params.check()?;
    let n = features.len();
    if n != labels.len() {
        return Err(Error::Fit(format!(
            "{} feature vectors but {} labels",
            n,
            labels.len()
        )));
    }
    if n < 2 {
        return Err(Error::Fit("need at least 2 training samples".into()));
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(Error::Fit("feature vectors are empty".into()));
    }
    if let Some(bad) = features.iter().position(|f| f.len() != dim) {
        return Err(Error::Fit(format!(
            "feature vector {} has dimension {}, expected {}",
            bad,
            features[bad].len(),
            dim
        )));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::Fit("training labels contain a single class".into()));
    }

    let k = params
        .features_per_split
        .unwrap_or_else(|| (dim as f64).sqrt().floor() as usize)
        .clamp(1, dim);

    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(derive(params.seed, &[t as u64]));
            let indices: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            let mut builder = TreeBuilder {
                features,
                labels,
                params,
                k,
                dim,
                rng,
                nodes: Vec::new(),
            };
            builder.grow(indices, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();

    Ok(RandomForest { trees, dim })
}

/// Majority vote over trees; an exact tie predicts non-member.
pub fn predict_rf(model: &RandomForest, f: &FeatureVector) -> Result<bool> {
    if f.len() != model.dim {
        return Err(Error::Eval(format!(
            "feature dimension {} does not match training dimension {}",
            f.len(),
            model.dim
        )));
    }
    let member_votes = model.trees.iter().filter(|t| t.vote(f)).count();
    Ok(member_votes * 2 > model.trees.len())
}

/// Fraction of positions where prediction equals truth.
pub fn accuracy(preds: &[bool], truth: &[bool]) -> Result<f64> {
    if preds.len() != truth.len() {
        return Err(Error::Param(format!(
            "{} predictions but {} labels",
            preds.len(),
            truth.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Param("accuracy of empty prediction list".into()));
    }
    let hits = preds.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / preds.len() as f64)
}

struct TreeBuilder<'a> {
    features: &'a [FeatureVector],
    labels: &'a [bool],
    params: &'a RfParams,
    k: usize,
    dim: usize,
    rng: rand_chacha::ChaCha8Rng,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Split {
    feature: usize,
    threshold: f64,
}

impl<'a> TreeBuilder<'a> {
    fn grow(&mut self, indices: Vec<u32>, depth: usize) -> u32 {
        let counts = self.class_counts(&indices);
        let id = self.nodes.len() as u32;

        let stop = depth >= self.params.max_depth
            || indices.len() < self.params.min_samples_split
            || counts[0] == 0
            || counts[1] == 0;
        if stop {
            self.nodes.push(Node::Leaf { counts });
            return id;
        }

        let candidates: Vec<usize> = if self.k >= self.dim {
            (0..self.dim).collect()
        } else {
            let mut picked = index::sample(&mut self.rng, self.dim, self.k).into_vec();
            picked.sort_unstable();
            picked
        };

        let split = match find_best_split(self.features, self.labels, &indices, &candidates) {
            Some(s) => s,
            None => {
                self.nodes.push(Node::Leaf { counts });
                return id;
            }
        };

        let (left_idx, right_idx): (Vec<u32>, Vec<u32>) = indices
            .iter()
            .partition(|&&i| self.features[i as usize][split.feature] <= split.threshold);

        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        match &mut self.nodes[id as usize] {
            Node::Split {
                left: l, right: r, ..
            } => {
                *l = left;
                *r = right;
            }
            Node::Leaf { .. } => unreachable!("node was pushed as a split"),
        }
        id
    }

    fn class_counts(&self, indices: &[u32]) -> [u32; 2] {
        let mut counts = [0u32; 2];
        for &i in indices {
            counts[self.labels[i as usize] as usize] += 1;
        }
        counts
    }
}

/// Exact rational score of a binary split: maximizing
/// sum_child (sum_class count^2) / n_child minimizes weighted Gini
/// impurity. Kept as numerator/denominator for exact comparison.
#[derive(Debug, Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(left: [u32; 2], right: [u32; 2]) -> SplitScore {
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        let sl = (left[0] as u128).pow(2) + (left[1] as u128).pow(2);
        let sr = (right[0] as u128).pow(2) + (right[1] as u128).pow(2);
        // sl/nl + sr/nr over the common denominator nl*nr.
        SplitScore {
            num: sl * nr + sr * nl,
            den: nl * nr,
        }
    }

    fn beats(&self, other: &SplitScore) -> bool {
        self.num * other.den > other.num * self.den
    }
}

/// The exact Gini-optimal axis-aligned split over all rows and all
/// dimensions: the same routine tree growth calls at each node. Returns
/// `(feature, threshold)`, or `None` when no threshold separates the rows.
/// Public so the split finder can be checked against reference
/// implementations from outside the crate.
pub fn best_split(features: &[FeatureVector], labels: &[bool]) -> Option<(usize, f64)> {
    if features.is_empty() || features.len() != labels.len() {
        return None;
    }
    let indices: Vec<u32> = (0..features.len() as u32).collect();
    let candidates: Vec<usize> = (0..features[0].len()).collect();
    find_best_split(features, labels, &indices, &candidates).map(|s| (s.feature, s.threshold))
}

/// Best Gini split over the given candidate features, scanning midpoints
/// between consecutive distinct values. Ties keep the first candidate in
/// (feature order, ascending threshold) order. Returns `None` when every
/// candidate feature is constant within the node.
fn find_best_split(
    features: &[FeatureVector],
    labels: &[bool],
    indices: &[u32],
    candidates: &[usize],
) -> Option<Split> {
    let mut best: Option<(Split, SplitScore)> = None;
    let mut order: Vec<u32> = indices.to_vec();

    for &feat in candidates {
        order.sort_by(|&a, &b| features[a as usize][feat].total_cmp(&features[b as usize][feat]));

        let total = {
            let mut c = [0u32; 2];
            for &i in &order {
                c[labels[i as usize] as usize] += 1;
            }
            c
        };
        let mut left = [0u32; 2];
        for w in 0..order.len() - 1 {
            let i = order[w] as usize;
            left[labels[i] as usize] += 1;
            let v = features[i][feat];
            let v_next = features[order[w + 1] as usize][feat];
            if v == v_next {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let score = SplitScore::new(left, right);
            let better = match &best {
                Some((_, b)) => score.beats(b),
                None => true,
            };
            if better {
                best = Some((
                    Split {
                        feature: feat,
                        threshold: (v + v_next) / 2.0,
                    },
                    score,
                ));
            }
        }
    }
    best.map(|(s, _)| s)
}
