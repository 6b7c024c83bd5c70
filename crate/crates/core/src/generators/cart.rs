//! Sequential CART synthesizer.
//!
//! Attributes are visited in schema order. The first is drawn from its
//! empirical marginal; each later attribute gets a decision tree that
//! predicts it from the attributes before it, with leaves storing the
//! empirical category distribution of the training records routed there.
//! Sampling walks each tree with the partially generated record and draws
//! from the leaf distribution, which is what makes the model generative
//! rather than a classifier.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance, Schema};
use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    /// One-vs-rest equality split on an earlier attribute.
    Split {
        attr: usize,
        category: u32,
        eq: u32,
        ne: u32,
    },
    Leaf {
        dist: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    /// The attribute this tree predicts.
    attr: usize,
    nodes: Vec<CartNode>,
}

impl CartTree {
    pub fn attr(&self) -> usize {
        self.attr
    }

    pub fn nodes(&self) -> &[CartNode] {
        &self.nodes
    }

    fn leaf_dist(&self, row: &[u32]) -> &[f64] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                CartNode::Split {
                    attr,
                    category,
                    eq,
                    ne,
                } => {
                    at = if row[*attr] == *category {
                        *eq as usize
                    } else {
                        *ne as usize
                    };
                }
                CartNode::Leaf { dist } => return dist,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartSynthModel {
    schema: Arc<Schema>,
    /// Marginal distribution of attribute 0.
    first_marginal: Vec<f64>,
    /// One tree per attribute 1..F, in visit order.
    trees: Vec<CartTree>,
}

impl CartSynthModel {
    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn first_marginal(&self) -> &[f64] {
        &self.first_marginal
    }

    pub fn trees(&self) -> &[CartTree] {
        &self.trees
    }

    pub(crate) fn sample(&self, m: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(seed);
        let f = self.schema.attribute_count();
        let mut out = Dataset::new(Arc::clone(&self.schema), Provenance::Synthetic);
        let mut row = vec![0u32; f];
        for _ in 0..m {
            row[0] = draw(&self.first_marginal, &mut rng);
            for tree in &self.trees {
                row[tree.attr] = draw(tree.leaf_dist(&row), &mut rng);
            }
            out.push_row_unchecked(&row);
        }
        out
    }
}

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
    last_positive
}

pub(crate) fn fit_cart(
    d: &Dataset,
    min_leaf: usize,
    max_depth: usize,
    _seed: u64,
) -> Result<CartSynthModel> {
    if min_leaf == 0 {
        return Err(Error::Param("min_leaf must be >= 1".into()));
    }
    if max_depth == 0 {
        return Err(Error::Param("max_depth must be >= 1".into()));
    }
    if d.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 records to fit, got {}",
            d.len()
        )));
    }
    let schema = Arc::clone(d.schema());
    let f = schema.attribute_count();

    let first_card = schema.cardinality(0);
    let mut counts = vec![0u32; first_card];
    for row in d.rows() {
        counts[row[0] as usize] += 1;
    }
    let n = d.len() as f64;
    let first_marginal: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();

    let trees = (1..f)
        .map(|attr| {
            let mut builder = CartBuilder {
                d,
                attr,
                card: schema.cardinality(attr),
                min_leaf,
                max_depth,
                nodes: Vec::new(),
            };
            let indices: Vec<u32> = (0..d.len() as u32).collect();
            builder.grow(indices, 0);
            CartTree {
                attr,
                nodes: builder.nodes,
            }
        })
        .collect();

    Ok(CartSynthModel {
        schema,
        first_marginal,
        trees,
    })
}

/// Exact rational comparison of split quality; maximizing
/// sum_child (sum_class count^2) / n_child minimizes weighted Gini.
#[derive(Debug, Clone, Copy)]
struct GiniScore {
    num: u128,
    den: u128,
}

impl GiniScore {
    fn of_counts(counts: &[u32]) -> GiniScore {
        let n: u128 = counts.iter().map(|&c| c as u128).sum();
        let s: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        GiniScore { num: s, den: n }
    }

    fn of_split(left: &[u32], right: &[u32]) -> GiniScore {
        let nl: u128 = left.iter().map(|&c| c as u128).sum();
        let nr: u128 = right.iter().map(|&c| c as u128).sum();
        let sl: u128 = left.iter().map(|&c| (c as u128) * (c as u128)).sum();
        let sr: u128 = right.iter().map(|&c| (c as u128) * (c as u128)).sum();
        GiniScore {
            num: sl * nr + sr * nl,
            den: nl * nr,
        }
    }

    fn beats(&self, other: &GiniScore) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct CartBuilder<'a> {
    d: &'a Dataset,
    attr: usize,
    card: usize,
    min_leaf: usize,
    max_depth: usize,
    nodes: Vec<CartNode>,
}

impl<'a> CartBuilder<'a> {
    fn grow(&mut self, indices: Vec<u32>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let class_counts = self.class_counts(&indices);
        let pure = class_counts.iter().filter(|&&c| c > 0).count() <= 1;

        if depth >= self.max_depth || pure || indices.len() < 2 * self.min_leaf {
            self.push_leaf(&class_counts, indices.len());
            return id;
        }

        let split = self.find_split(&indices, &class_counts);
        let (attr, category) = match split {
            Some(s) => s,
            None => {
                self.push_leaf(&class_counts, indices.len());
                return id;
            }
        };

        let (eq_idx, ne_idx): (Vec<u32>, Vec<u32>) = indices
            .iter()
            .partition(|&&i| self.d.row(i as usize)[attr] == category);

        self.nodes.push(CartNode::Split {
            attr,
            category,
            eq: 0,
            ne: 0,
        });
        let eq = self.grow(eq_idx, depth + 1);
        let ne = self.grow(ne_idx, depth + 1);
        match &mut self.nodes[id as usize] {
            CartNode::Split { eq: l, ne: r, .. } => {
                *l = eq;
                *r = ne;
            }
            CartNode::Leaf { .. } => unreachable!("node was pushed as a split"),
        }
        id
    }

    fn push_leaf(&mut self, class_counts: &[u32], total: usize) {
        let dist = class_counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect();
        self.nodes.push(CartNode::Leaf { dist });
    }

    fn class_counts(&self, indices: &[u32]) -> Vec<u32> {
        let mut counts = vec![0u32; self.card];
        for &i in indices {
            counts[self.d.row(i as usize)[self.attr] as usize] += 1;
        }
        counts
    }

    /// Best one-vs-rest split over every earlier attribute and category,
    /// subject to min_leaf on both children; `None` when nothing strictly
    /// beats the unsplit node. Ties keep the lowest (attribute, category).
    fn find_split(&self, indices: &[u32], class_counts: &[u32]) -> Option<(usize, u32)> {
        let schema = self.d.schema();
        let parent = GiniScore::of_counts(class_counts);
        let n = indices.len();
        let mut best: Option<((usize, u32), GiniScore)> = None;

        for p in 0..self.attr {
            let card_p = schema.cardinality(p);
            // counts[c * card + k]: records with predictor value c and
            // target class k.
            let mut matrix = vec![0u32; card_p * self.card];
            let mut row_totals = vec![0usize; card_p];
            for &i in indices {
                let row = self.d.row(i as usize);
                let c = row[p] as usize;
                matrix[c * self.card + row[self.attr] as usize] += 1;
                row_totals[c] += 1;
            }
            for c in 0..card_p {
                let n_eq = row_totals[c];
                if n_eq < self.min_leaf || n - n_eq < self.min_leaf {
                    continue;
                }
                let left = &matrix[c * self.card..(c + 1) * self.card];
                let right: Vec<u32> = class_counts
                    .iter()
                    .zip(left)
                    .map(|(&t, &l)| t - l)
                    .collect();
                let score = GiniScore::of_split(left, &right);
                if !score.beats(&parent) {
                    continue;
                }
                let better = match &best {
                    Some((_, b)) => score.beats(b),
                    None => true,
                };
                if better {
                    best = Some(((p, c as u32), score));
                }
            }
        }
        best.map(|(s, _)| s)
    }
}
