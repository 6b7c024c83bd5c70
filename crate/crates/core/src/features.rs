//! Count-query features anchored on a target record.
//!
//! A query is a non-empty subset of attribute indices; its value against a
//! synthetic dataset is the fraction of records that agree with the target
//! on every attribute in the subset. With F attributes there are 2^F − 1
//! such queries; [`generate_queries`] enumerates them all when they fit the
//! budget and otherwise samples distinct subsets uniformly.
//!
//! Values are fractions rather than raw counts so that feature vectors stay
//! comparable when shadow and test synthetic datasets differ in size.

use std::collections::HashSet;
use std::io;
use std::sync::Arc;

use rand::Rng;

use crate::dataset::{Dataset, Record, Schema};
use crate::error::{Error, Result};
use crate::seed::rng_from;

/// One entry per query, each in [0, 1].
pub type FeatureVector = Vec<f64>;

/// Attribute-subset count queries anchored on one target record.
///
/// Subsets are stored as bitmasks over attribute indices, so the schema is
/// limited to 63 attributes (far above the tables this tool audits).
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    schema: Arc<Schema>,
    target: Record,
    subsets: Vec<u64>,
    seed: u64,
}

impl QuerySet {
    /// Build from explicit subset masks. Masks must be distinct, non-empty,
    /// and within the schema's attribute range.
    pub fn from_masks(
        schema: Arc<Schema>,
        target: Record,
        subsets: Vec<u64>,
        seed: u64,
    ) -> Result<Self> {
        target.validate(&schema)?;
        let f = schema.attribute_count();
        let valid = mask_limit(f)?;
        let mut seen = HashSet::with_capacity(subsets.len());
        for &m in &subsets {
            if m == 0 {
                return Err(Error::Param("empty query subset".into()));
            }
            if m > valid {
                return Err(Error::Param(format!(
                    "query subset {:#b} references attributes beyond the schema's {}",
                    m, f
                )));
            }
            if !seen.insert(m) {
                return Err(Error::Param(format!("duplicate query subset {:#b}", m)));
            }
        }
        Ok(QuerySet {
            schema,
            target,
            subsets,
            seed,
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn target(&self) -> &Record {
        &self.target
    }

    pub fn subsets(&self) -> &[u64] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn mask_limit(f: usize) -> Result<u64> {
    if f == 0 || f > 63 {
        return Err(Error::Param(format!(
            "query masks support 1..=63 attributes, schema has {}",
            f
        )));
    }
    Ok((1u64 << f) - 1)
}

/// Generate the query set for one target.
///
/// When all 2^F − 1 non-empty subsets fit the budget they are enumerated in
/// increasing mask order; otherwise `budget` distinct subsets are sampled
/// uniformly without replacement, in a seed-determined order.
pub fn generate_queries(
    schema: &Arc<Schema>,
    target: &Record,
    budget: usize,
    seed: u64,
) -> Result<QuerySet> {
    if budget == 0 {
        return Err(Error::Param("query budget must be >= 1".into()));
    }
    target.validate(schema)?;
    let f = schema.attribute_count();
    let all = mask_limit(f)?;

    let subsets: Vec<u64> = if all as u128 <= budget as u128 {
        (1..=all).collect()
    } else {
        let mut rng = rng_from(seed);
        let mut seen = HashSet::with_capacity(budget);
        let mut out = Vec::with_capacity(budget);
        while out.len() < budget {
            let m = rng.gen_range(1..=all);
            if seen.insert(m) {
                out.push(m);
            }
        }
        out
    };

    Ok(QuerySet {
        schema: Arc::clone(schema),
        target: target.clone(),
        subsets,
        seed,
    })
}

/// Evaluate every query against a synthetic dataset.
///
/// Entry j is the fraction of records agreeing with the target on every
/// attribute in subset j. Implemented with one match bitset per attribute;
/// each query is then an AND-and-popcount over its attributes.
pub fn extract_features(q: &QuerySet, synth: &Dataset) -> Result<FeatureVector> {
    if synth.is_empty() {
        return Err(Error::Eval(
            "cannot extract features from an empty synthetic dataset".into(),
        ));
    }
    if **q.schema() != **synth.schema() {
        return Err(Error::SchemaMismatch(
            "query set and synthetic dataset have different schemas".into(),
        ));
    }

    let n = synth.len();
    let f = synth.width();
    let words = n.div_ceil(64);
    let target = q.target().codes();

    let mut used = 0u64;
    for &m in q.subsets() {
        used |= m;
    }

    // Bit r of attr_masks[i] is set when record r matches the target on
    // attribute i. Unused attributes keep an empty mask.
    let mut attr_masks: Vec<Vec<u64>> = vec![Vec::new(); f];
    for i in 0..f {
        if used & (1 << i) != 0 {
            attr_masks[i] = vec![0u64; words];
        }
    }
    for (r, row) in synth.rows().enumerate() {
        let mut rem = used;
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            if row[i] == target[i] {
                attr_masks[i][r / 64] |= 1 << (r % 64);
            }
        }
    }

    let mut acc = vec![0u64; words];
    let mut out = Vec::with_capacity(q.len());
    for &mask in q.subsets() {
        let first = mask.trailing_zeros() as usize;
        acc.copy_from_slice(&attr_masks[first]);
        let mut rem = mask & (mask - 1);
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            for (a, b) in acc.iter_mut().zip(&attr_masks[i]) {
                *a &= b;
            }
        }
        let count: u64 = acc.iter().map(|w| w.count_ones() as u64).sum();
        out.push(count as f64 / n as f64);
    }
    Ok(out)
}

/// Dump a feature matrix as CSV: one row per dataset, query columns first,
/// membership label last.
pub fn write_feature_matrix<W: io::Write>(
    w: W,
    features: &[FeatureVector],
    labels: &[bool],
) -> Result<()> {
    if features.len() != labels.len() {
        return Err(Error::Param(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let dim = features.first().map_or(0, |f| f.len());
    let mut writer = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..dim).map(|j| format!("q{}", j)).collect();
    header.push("member".into());
    writer.write_record(&header)?;
    for (row, &label) in features.iter().zip(labels) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(if label { "1" } else { "0" }.into());
        writer.write_record(&cells)?;
    }
    writer.flush()?;
    Ok(())
}
