//! Plug-in mutual information between one attribute and a joint of others.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Cell-count budget below which the estimator uses a dense contingency
/// array; larger joint domains fall back to sorting record keys. The cutoff
/// depends only on the schema, so the summation order (and hence the exact
/// floating-point result) is stable for a given attribute combination.
const DENSE_CELL_LIMIT: u128 = 1 << 16;

/// Empirical mutual information I(X; Parents) in nats.
///
/// The estimate is the plug-in formula over the empirical joint of
/// (target, parent combination). Always ≥ 0 up to rounding; exactly 0.0 for
/// an empty parent set or an empty dataset.
pub fn mutual_information(d: &Dataset, target_attr: usize, parent_attrs: &[usize]) -> Result<f64> {
    let f = d.width();
    if target_attr >= f {
        return Err(Error::Param(format!(
            "target attribute {} out of range ({} attributes)",
            target_attr, f
        )));
    }
    let mut seen = vec![false; f];
    seen[target_attr] = true;
    for &p in parent_attrs {
        if p >= f {
            return Err(Error::Param(format!(
                "parent attribute {} out of range ({} attributes)",
                p, f
            )));
        }
        if seen[p] {
            return Err(Error::Param(format!(
                "attribute {} repeated in mutual information arguments",
                p
            )));
        }
        seen[p] = true;
    }
    if parent_attrs.is_empty() || d.is_empty() {
        return Ok(0.0);
    }

    let schema = d.schema();
    let cx = schema.cardinality(target_attr) as u128;
    let mut combo_card: u128 = 1;
    for &p in parent_attrs {
        combo_card = combo_card.saturating_mul(schema.cardinality(p) as u128);
    }

    if combo_card.saturating_mul(cx) <= DENSE_CELL_LIMIT {
        Ok(mi_dense(
            d,
            target_attr,
            parent_attrs,
            combo_card as usize,
            cx as usize,
        ))
    } else {
        Ok(mi_sparse(d, target_attr, parent_attrs, cx as u64))
    }
}

/// Mixed-radix index of the parent codes of one row.
fn combo_of(row: &[u32], parent_attrs: &[usize], cards: &[u64]) -> u64 {
    let mut key = 0u64;
    for (&p, &card) in parent_attrs.iter().zip(cards) {
        key = key * card + row[p] as u64;
    }
    key
}

fn parent_cards(d: &Dataset, parent_attrs: &[usize]) -> Vec<u64> {
    parent_attrs
        .iter()
        .map(|&p| d.schema().cardinality(p) as u64)
        .collect()
}

fn mi_dense(
    d: &Dataset,
    target_attr: usize,
    parent_attrs: &[usize],
    combo_card: usize,
    cx: usize,
) -> f64 {
    let cards = parent_cards(d, parent_attrs);
    let mut joint = vec![0u32; combo_card * cx];
    let mut c_parent = vec![0u32; combo_card];
    let mut c_x = vec![0u32; cx];
    for row in d.rows() {
        let combo = combo_of(row, parent_attrs, &cards) as usize;
        let x = row[target_attr] as usize;
        joint[combo * cx + x] += 1;
        c_parent[combo] += 1;
        c_x[x] += 1;
    }

    let n = d.len() as f64;
    let mut mi = 0.0;
    for combo in 0..combo_card {
        for x in 0..cx {
            let c_joint = joint[combo * cx + x];
            if c_joint == 0 {
                continue;
            }
            let ratio = (c_joint as f64 * n) / (c_x[x] as f64 * c_parent[combo] as f64);
            mi += (c_joint as f64 / n) * ratio.ln();
        }
    }
    mi.max(0.0)
}

fn mi_sparse(d: &Dataset, target_attr: usize, parent_attrs: &[usize], cx: u64) -> f64 {
    let cards = parent_cards(d, parent_attrs);
    let mut c_x = vec![0u32; cx as usize];
    let mut keys: Vec<u64> = Vec::with_capacity(d.len());
    for row in d.rows() {
        let combo = combo_of(row, parent_attrs, &cards);
        let x = row[target_attr] as u64;
        keys.push(combo * cx + x);
        c_x[x as usize] += 1;
    }
    keys.sort_unstable();

    let n = d.len() as f64;
    let mut mi = 0.0;
    let mut at = 0;
    // Keys sharing a parent combo are adjacent after sorting; each group is
    // scanned once for the combo total and once to emit its cell terms.
    while at < keys.len() {
        let combo = keys[at] / cx;
        let mut end = at;
        while end < keys.len() && keys[end] / cx == combo {
            end += 1;
        }
        let c_parent = (end - at) as f64;

        let mut run = at;
        while run < end {
            let key = keys[run];
            let mut run_end = run;
            while run_end < end && keys[run_end] == key {
                run_end += 1;
            }
            let c_joint = (run_end - run) as f64;
            let x = (key % cx) as usize;
            let ratio = (c_joint * n) / (c_x[x] as f64 * c_parent);
            mi += (c_joint / n) * ratio.ln();
            run = run_end;
        }
        at = end;
    }
    mi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Attribute, AttributeDomain, Provenance, Schema};
    use crate::seed::rng_from;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::HashMap;
    use std::sync::Arc;

    fn schema_with_cards(cards: &[usize]) -> Arc<Schema> {
        let attributes = cards
            .iter()
            .enumerate()
            .map(|(i, &c)| Attribute {
                name: format!("a{}", i),
                domain: AttributeDomain::Categorical {
                    labels: (0..c).map(|v| format!("v{}", v)).collect(),
                },
            })
            .collect();
        Arc::new(Schema::new(attributes).unwrap())
    }

    fn random_table(cards: &[usize], n: usize, seed: u64) -> Dataset {
        let schema = schema_with_cards(cards);
        let mut rng = rng_from(seed);
        let mut ds = Dataset::new(Arc::clone(&schema), Provenance::Real);
        let mut row = vec![0u32; cards.len()];
        for _ in 0..n {
            for (i, c) in row.iter_mut().enumerate() {
                *c = rng.gen_range(0..cards[i] as u32);
            }
            ds.push_row(&row).unwrap();
        }
        ds
    }

    /// Plug-in MI from an explicit HashMap contingency table.
    fn brute_force_mi(d: &Dataset, target: usize, parents: &[usize]) -> f64 {
        let n = d.len() as f64;
        let mut joint: HashMap<(Vec<u32>, u32), u32> = HashMap::new();
        let mut px: HashMap<u32, u32> = HashMap::new();
        let mut pp: HashMap<Vec<u32>, u32> = HashMap::new();
        for row in d.rows() {
            let p: Vec<u32> = parents.iter().map(|&a| row[a]).collect();
            let x = row[target];
            *joint.entry((p.clone(), x)).or_default() += 1;
            *px.entry(x).or_default() += 1;
            *pp.entry(p).or_default() += 1;
        }
        let mut mi = 0.0;
        for ((p, x), &c) in &joint {
            let ratio = (c as f64 * n) / (px[x] as f64 * pp[p] as f64);
            mi += (c as f64 / n) * ratio.ln();
        }
        mi.max(0.0)
    }

    #[test]
    fn independent_attributes_near_zero() {
        let d = random_table(&[2, 2], 10_000, 5);
        let mi = mutual_information(&d, 0, &[1]).unwrap();
        assert!(mi <= 0.01, "mi = {mi}");
    }

    #[test]
    fn identical_binary_attributes_near_ln2() {
        let schema = schema_with_cards(&[2, 2]);
        let mut rng = rng_from(9);
        let mut ds = Dataset::new(schema, Provenance::Real);
        for _ in 0..10_000 {
            let v: u32 = rng.gen_range(0..2);
            ds.push_row(&[v, v]).unwrap();
        }
        let mi = mutual_information(&ds, 0, &[1]).unwrap();
        assert!((mi - 2f64.ln()).abs() <= 0.01, "mi = {mi}");
    }

    #[test]
    fn empty_parent_set_is_zero() {
        let d = random_table(&[3, 3], 100, 1);
        assert_eq!(mutual_information(&d, 0, &[]).unwrap(), 0.0);
    }

    #[test]
    fn empty_dataset_is_zero() {
        let schema = schema_with_cards(&[2, 2]);
        let ds = Dataset::new(schema, Provenance::Real);
        assert_eq!(mutual_information(&ds, 0, &[1]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_attribute_arguments() {
        let d = random_table(&[2, 2, 2], 10, 1);
        assert!(mutual_information(&d, 3, &[0]).is_err());
        assert!(mutual_information(&d, 0, &[0]).is_err());
        assert!(mutual_information(&d, 0, &[1, 1]).is_err());
        assert!(mutual_information(&d, 0, &[5]).is_err());
    }

    #[test]
    fn dense_path_matches_brute_force() {
        let d = random_table(&[3, 4, 5], 500, 7);
        let fast = mutual_information(&d, 2, &[0, 1]).unwrap();
        let slow = brute_force_mi(&d, 2, &[0, 1]);
        assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
    }

    #[test]
    fn sparse_path_matches_brute_force() {
        // 300 * 300 * 4 cells exceeds the dense limit.
        let d = random_table(&[300, 300, 4], 2_000, 13);
        let fast = mutual_information(&d, 2, &[0, 1]).unwrap();
        let slow = brute_force_mi(&d, 2, &[0, 1]);
        assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn nonnegative_and_matches_oracle(seed in 0u64..500, n in 1usize..120) {
            let d = random_table(&[3, 2, 4], n, seed);
            let mi = mutual_information(&d, 1, &[0, 2]).unwrap();
            prop_assert!(mi >= 0.0);
            let oracle = brute_force_mi(&d, 1, &[0, 2]);
            prop_assert!((mi - oracle).abs() <= 1e-9);
        }

        #[test]
        fn adding_a_parent_never_lowers_plugin_mi(seed in 0u64..200, n in 2usize..120) {
            let d = random_table(&[3, 3, 3], n, seed);
            let one = mutual_information(&d, 0, &[1]).unwrap();
            let two = mutual_information(&d, 0, &[1, 2]).unwrap();
            prop_assert!(two >= one - 1e-12, "{two} < {one}");
        }
    }
}
