//! Vulnerability scoring: how isolated each record is in encoded space.
//!
//! Every categorical attribute becomes a one-hot block and every binned
//! attribute becomes its bin midpoint rescaled to `[0, 1]`; the blocks are
//! concatenated in schema order. A record's score is the mean cosine
//! distance to its `k` closest neighbors. Records with high scores sit far
//! from everything else and make natural membership-inference targets.
//!
//! Raw pre-discretization values are not kept by the encoded [`Dataset`],
//! so binned attributes are always represented by their bin midpoints.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeDomain, BinSpec, Dataset, Schema};
use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Above this many records, [`rank_vulnerable`] scores a uniform subsample
/// instead of running the full quadratic scan.
pub const SCAN_LIMIT: usize = 100_000;

/// Fixed seed for the subsample draw, so rankings of oversized datasets are
/// stable across runs and processes.
const SUBSAMPLE_SEED: u64 = 0x6e65_6967_6862;

/// Isolation of one record: mean cosine distance to its `k` nearest
/// neighbors, excluding the record itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityScore {
    pub index: usize,
    pub score: f64,
    pub k: usize,
}

/// Dimension of the encoded space for `schema`: one dimension per category
/// plus one per binned attribute.
pub fn encoded_dim(schema: &Schema) -> usize {
    schema
        .attributes()
        .iter()
        .map(|a| match &a.domain {
            AttributeDomain::Categorical { .. } => a.cardinality(),
            AttributeDomain::Binned(_) => 1,
        })
        .sum()
}

/// Encode one record as a dense vector: one-hot blocks for categorical
/// attributes, min-max scaled bin midpoints for binned ones.
pub fn encode_record(schema: &Schema, codes: &[u32]) -> Result<Vec<f64>> {
    schema.validate_row(codes)?;
    let mut v = Vec::with_capacity(encoded_dim(schema));
    for (attr, &code) in schema.attributes().iter().zip(codes) {
        match &attr.domain {
            AttributeDomain::Categorical { labels } => {
                let start = v.len();
                v.resize(start + labels.len(), 0.0);
                v[start + code as usize] = 1.0;
            }
            AttributeDomain::Binned(spec) => v.push(scaled_midpoint(spec, code)),
        }
    }
    Ok(v)
}

/// Bin midpoint rescaled into `[0, 1]`. A constant attribute maps to 0.5.
fn scaled_midpoint(spec: &BinSpec, code: u32) -> f64 {
    if spec.max == spec.min {
        return 0.5;
    }
    (spec.midpoint(code) - spec.min) / (spec.max - spec.min)
}

/// Cosine distance `1 - a.b / (|a| |b|)`, in `[0, 2]`. Equal vectors are
/// exactly 0 and rounding never pushes the result negative. A zero-norm
/// vector is treated as maximally distant from everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine distance on mismatched dimensions");
    if a == b {
        return 0.0;
    }
    let mut dot = 0.0f64;
    let mut sq_a = 0.0f64;
    let mut sq_b = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        sq_a += x * x;
        sq_b += y * y;
    }
    let (na, nb) = (sq_a.sqrt(), sq_b.sqrt());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Compact row encoding. Categorical attributes keep their code (stored as
/// an exactly-representable float and compared for equality); binned ones
/// store the scaled midpoint. Pairwise dot products walk attributes in
/// schema order and skip the zero one-hot terms, which leaves every partial
/// sum bit-identical to a dense scan over the vectors from
/// [`encode_record`].
struct Encoded {
    is_cat: Vec<bool>,
    rows: Vec<f64>,
    norms: Vec<f64>,
    width: usize,
}

fn encode_compact(d: &Dataset) -> Encoded {
    let schema = d.schema();
    let width = schema.attribute_count();
    let mut is_cat = Vec::with_capacity(width);
    let mut tables: Vec<Option<Vec<f64>>> = Vec::with_capacity(width);
    for attr in schema.attributes() {
        match &attr.domain {
            AttributeDomain::Categorical { .. } => {
                is_cat.push(true);
                tables.push(None);
            }
            AttributeDomain::Binned(spec) => {
                is_cat.push(false);
                let t = (0..spec.n_bins() as u32)
                    .map(|b| scaled_midpoint(spec, b))
                    .collect();
                tables.push(Some(t));
            }
        }
    }
    let mut rows = Vec::with_capacity(d.len() * width);
    let mut norms = Vec::with_capacity(d.len());
    for row in d.rows() {
        let mut sq = 0.0f64;
        for (a, &code) in row.iter().enumerate() {
            let x = match &tables[a] {
                None => {
                    sq += 1.0;
                    code as f64
                }
                Some(t) => {
                    let v = t[code as usize];
                    sq += v * v;
                    v
                }
            };
            rows.push(x);
        }
        norms.push(sq.sqrt());
    }
    Encoded {
        is_cat,
        rows,
        norms,
        width,
    }
}

fn pair_distance(e: &Encoded, i: usize, j: usize) -> f64 {
    let a = &e.rows[i * e.width..(i + 1) * e.width];
    let b = &e.rows[j * e.width..(j + 1) * e.width];
    if a == b {
        return 0.0;
    }
    let mut dot = 0.0f64;
    for t in 0..e.width {
        if e.is_cat[t] {
            if a[t] == b[t] {
                dot += 1.0;
            }
        } else {
            dot += a[t] * b[t];
        }
    }
    let (na, nb) = (e.norms[i], e.norms[j]);
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Mean of the `k` smallest distances from record `idx` to every other
/// record in the encoding. The `k` smallest values are summed in ascending
/// order, so the result does not depend on selection internals.
fn score_one(e: &Encoded, idx: usize, k: usize) -> f64 {
    let n = e.norms.len();
    let mut dists = Vec::with_capacity(n - 1);
    for j in 0..n {
        if j != idx {
            dists.push(pair_distance(e, idx, j));
        }
    }
    dists.select_nth_unstable_by(k - 1, f64::total_cmp);
    let mut nearest = dists[..k].to_vec();
    nearest.sort_unstable_by(f64::total_cmp);
    nearest.iter().sum::<f64>() / k as f64
}

fn check_args(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Param("neighbor count k must be positive".into()));
    }
    if n <= k {
        return Err(Error::Param(format!(
            "dataset has {n} records; need more than k = {k}"
        )));
    }
    Ok(())
}

/// Vulnerability score of record `idx`: mean cosine distance to its `k`
/// nearest neighbors among all other records.
pub fn vulnerability_score(idx: usize, d: &Dataset, k: usize) -> Result<VulnerabilityScore> {
    check_args(d.len(), k)?;
    if idx >= d.len() {
        return Err(Error::Param(format!(
            "record index {idx} out of range for {} records",
            d.len()
        )));
    }
    let e = encode_compact(d);
    Ok(VulnerabilityScore {
        index: idx,
        score: score_one(&e, idx, k),
        k,
    })
}

/// Score every record and return the `top_n` most vulnerable, sorted by
/// descending score with ties broken by ascending record index.
///
/// Datasets larger than [`SCAN_LIMIT`] are ranked within a fixed-seed
/// uniform subsample of that size; returned indices always refer to the
/// full dataset.
pub fn rank_vulnerable(d: &Dataset, k: usize, top_n: usize) -> Result<Vec<VulnerabilityScore>> {
    rank_with_limit(d, k, top_n, SCAN_LIMIT)
}

pub(crate) fn rank_with_limit(
    d: &Dataset,
    k: usize,
    top_n: usize,
    limit: usize,
) -> Result<Vec<VulnerabilityScore>> {
    check_args(d.len(), k)?;
    if top_n == 0 {
        return Err(Error::Param("top_n must be positive".into()));
    }
    if top_n > d.len() {
        return Err(Error::Param(format!(
            "top_n = {top_n} exceeds dataset size {}",
            d.len()
        )));
    }
    let (encoded, pool) = if d.len() > limit {
        let mut idx =
            rand::seq::index::sample(&mut rng_from(SUBSAMPLE_SEED), d.len(), limit).into_vec();
        idx.sort_unstable();
        if top_n > idx.len() || idx.len() <= k {
            return Err(Error::Param(format!(
                "subsample of {} records cannot satisfy k = {k}, top_n = {top_n}",
                idx.len()
            )));
        }
        (encode_compact(&d.subset(&idx)), idx)
    } else {
        (encode_compact(d), (0..d.len()).collect::<Vec<_>>())
    };
    let scores: Vec<f64> = (0..pool.len())
        .into_par_iter()
        .map(|i| score_one(&encoded, i, k))
        .collect();
    let mut out: Vec<VulnerabilityScore> = pool
        .into_iter()
        .zip(scores)
        .map(|(index, score)| VulnerabilityScore { index, score, k })
        .collect();
    out.sort_unstable_by(|x, y| y.score.total_cmp(&x.score).then(x.index.cmp(&y.index)));
    out.truncate(top_n);
    Ok(out)
}

/// Write scores as CSV with columns `record_index,score,rank` (rank is
/// 1-based in the given order).
pub fn write_vulnerability_csv<W: io::Write>(w: W, scores: &[VulnerabilityScore]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["record_index", "score", "rank"])?;
    for (rank, s) in scores.iter().enumerate() {
        wtr.write_record([
            s.index.to_string(),
            s.score.to_string(),
            (rank + 1).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
