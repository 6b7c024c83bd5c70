//! Built-in demo table: a census-style population with planted outliers.
//!
//! Everything here is a pure function of `(n, seed)`. Records come from a
//! four-class latent mixture, which gives the synthesizers real attribute
//! correlations to learn. About 0.3% of records are planted outliers: each
//! one combines four rare categorical values (values that do occur
//! elsewhere, so no single cell gives the record away) with two extreme
//! continuous values. Those records sit far from their neighbors and
//! surface at the top of the vulnerability ranking, which makes the table a
//! self-contained target for end-to-end attack runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{load_csv_str, AttributeDecl, Dataset, DeclKind, SchemaDecl};
use crate::error::Result;
use crate::seed::rng_from;

/// Mixture weights of the four latent classes.
const CLASS_WEIGHTS: [f64; 4] = [0.4, 0.3, 0.2, 0.1];

/// Probability a regular record draws its class-preferred category.
const PREFERRED_RATE: f64 = 0.5;

/// Probability a regular record draws the reserved rare category (the last
/// value of each wide categorical domain). Outlier markers are built from
/// these values, so they stay rare but never unique.
const MARKER_RATE: f64 = 0.004;

/// Planted outliers per thousand records, times ten (3 => 0.3%).
const OUTLIERS_PER_MILLE_X10: usize = 3;

const CAT_SPECS: [(&str, &str, usize); 9] = [
    ("workclass", "wc", 6),
    ("education", "ed", 8),
    ("marital_status", "ma", 5),
    ("occupation", "oc", 8),
    ("relationship", "re", 4),
    ("race", "ra", 5),
    ("sex", "sx", 2),
    ("native_region", "co", 8),
    ("income_band", "in", 2),
];

const CONT_NAMES: [&str; 6] = [
    "age",
    "years_schooling",
    "capital_gain",
    "capital_loss",
    "hours_per_week",
    "wealth_index",
];

/// Column order of the emitted CSV: interleaved like a real census extract.
const COLUMN_ORDER: [Col; 15] = [
    Col::Cont(0), // age
    Col::Cat(0),  // workclass
    Col::Cat(1),  // education
    Col::Cont(1), // years_schooling
    Col::Cat(2),  // marital_status
    Col::Cat(3),  // occupation
    Col::Cat(4),  // relationship
    Col::Cat(5),  // race
    Col::Cat(6),  // sex
    Col::Cont(2), // capital_gain
    Col::Cont(3), // capital_loss
    Col::Cont(4), // hours_per_week
    Col::Cat(7),  // native_region
    Col::Cont(5), // wealth_index
    Col::Cat(8),  // income_band
];

#[derive(Clone, Copy)]
enum Col {
    Cat(usize),
    Cont(usize),
}

/// Categorical attributes wide enough to reserve a rare marker value.
/// Indices into `CAT_SPECS`.
const MARKER_ELIGIBLE: [usize; 7] = [0, 1, 2, 3, 4, 5, 7];

/// Schema declaration matching [`demo_csv`] output.
pub fn demo_schema() -> SchemaDecl {
    let attributes = COLUMN_ORDER
        .iter()
        .map(|col| match *col {
            Col::Cat(i) => AttributeDecl {
                name: CAT_SPECS[i].0.into(),
                kind: DeclKind::Categorical,
                domain: None,
            },
            Col::Cont(i) => AttributeDecl {
                name: CONT_NAMES[i].into(),
                kind: DeclKind::Continuous,
                domain: None,
            },
        })
        .collect();
    SchemaDecl {
        attributes,
        missing: vec![String::new(), "?".into()],
    }
}

struct Person {
    cats: [u32; 9],
    conts: [f64; 6],
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn draw_class(rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (z, w) in CLASS_WEIGHTS.iter().enumerate() {
        acc += w;
        if u < acc {
            return z;
        }
    }
    CLASS_WEIGHTS.len() - 1
}

/// Class-conditional draw for a wide categorical attribute: the preferred
/// value gets [`PREFERRED_RATE`], the last value [`MARKER_RATE`], and the
/// rest share what remains.
fn draw_wide_cat(rng: &mut ChaCha8Rng, attr: usize, card: usize, z: usize) -> u32 {
    let preferred = (2 * z + attr) % (card - 1);
    let u: f64 = rng.gen();
    if u < PREFERRED_RATE {
        return preferred as u32;
    }
    if u < PREFERRED_RATE + MARKER_RATE {
        return (card - 1) as u32;
    }
    let others: Vec<u32> = (0..card as u32 - 1)
        .filter(|&v| v != preferred as u32)
        .collect();
    others[rng.gen_range(0..others.len())]
}

fn draw_person(rng: &mut ChaCha8Rng) -> Person {
    let z = draw_class(rng);
    let mut cats = [0u32; 9];
    for (i, &(_, _, card)) in CAT_SPECS.iter().enumerate() {
        cats[i] = match i {
            6 => u32::from(rng.gen_bool([0.35, 0.45, 0.55, 0.65][z])), // sex
            8 => u32::from(rng.gen_bool([0.15, 0.30, 0.50, 0.75][z])), // income_band
            _ => draw_wide_cat(rng, i, card, z),
        };
    }
    let zf = z as f64;
    let age = normal(rng, 28.0 + 7.0 * zf, 9.0).clamp(17.0, 80.0);
    let school = normal(rng, 8.0 + 2.0 * zf, 2.5).clamp(1.0, 20.0);
    let gain = if rng.gen_bool(0.90 - 0.05 * zf) {
        0.0
    } else {
        normal(rng, 7.0 + 0.5 * zf, 1.0)
            .exp()
            .clamp(100.0, 90_000.0)
    };
    let loss = if rng.gen_bool(0.95) {
        0.0
    } else {
        normal(rng, 6.5, 0.7).exp().clamp(50.0, 5_000.0)
    };
    let hours = normal(rng, 34.0 + 4.0 * zf, 7.0).clamp(5.0, 80.0);
    let wealth = normal(rng, 40.0 + 15.0 * zf, 12.0).clamp(0.0, 150.0);
    Person {
        cats,
        conts: [age, school, gain, loss, hours, wealth],
    }
}

/// All 4-subsets of the marker-eligible attributes, in lexicographic order.
fn marker_subsets() -> Vec<[usize; 4]> {
    let m = MARKER_ELIGIBLE.len();
    let mut out = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                for d in (c + 1)..m {
                    out.push([
                        MARKER_ELIGIBLE[a],
                        MARKER_ELIGIBLE[b],
                        MARKER_ELIGIBLE[c],
                        MARKER_ELIGIBLE[d],
                    ]);
                }
            }
        }
    }
    out
}

/// Overwrite a regular person with an outlier signature: four rare
/// categorical values plus two extreme continuous values. `o` is the
/// outlier's ordinal, which varies the signature so outliers stay distinct
/// from one another.
fn plant_outlier(p: &mut Person, o: usize, subsets: &[[usize; 4]]) {
    for &attr in &subsets[o % subsets.len()] {
        p.cats[attr] = (CAT_SPECS[attr].2 - 1) as u32;
    }
    let age_x = 88.0 + (o % 7) as f64;
    let hours_x = 92.0 + (o % 6) as f64;
    let wealth_x = 220.0 + 3.0 * (o % 9) as f64;
    match o % 3 {
        0 => {
            p.conts[0] = age_x;
            p.conts[4] = hours_x;
        }
        1 => {
            p.conts[4] = hours_x;
            p.conts[5] = wealth_x;
        }
        _ => {
            p.conts[0] = age_x;
            p.conts[5] = wealth_x;
        }
    }
}

fn format_cell(p: &Person, col: Col) -> String {
    match col {
        Col::Cat(i) => format!("{}{}", CAT_SPECS[i].1, p.cats[i]),
        Col::Cont(i) => {
            if i == 2 || i == 3 {
                format!("{:.2}", p.conts[i])
            } else {
                format!("{:.1}", p.conts[i])
            }
        }
    }
}

/// Render the demo table as CSV text with a header row.
pub fn demo_csv(n: usize, seed: u64) -> String {
    let subsets = marker_subsets();
    let n_out = (n * OUTLIERS_PER_MILLE_X10 / 1000).max(1);
    let stride = n / n_out;
    let mut rng = rng_from(seed);

    let header: Vec<&str> = COLUMN_ORDER
        .iter()
        .map(|col| match *col {
            Col::Cat(i) => CAT_SPECS[i].0,
            Col::Cont(i) => CONT_NAMES[i],
        })
        .collect();
    let mut out = String::with_capacity(n * 96);
    out.push_str(&header.join(","));
    out.push('\n');

    for row in 0..n {
        let mut p = draw_person(&mut rng);
        if stride > 0 && row % stride == stride / 2 {
            let o = row / stride;
            if o < n_out {
                plant_outlier(&mut p, o, &subsets);
            }
        }
        let cells: Vec<String> = COLUMN_ORDER.iter().map(|&c| format_cell(&p, c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Demo table ingested and quantile-binned, ready for the audit pipeline.
pub fn demo_dataset(n: usize, seed: u64, bins: usize) -> Result<Dataset> {
    let raw = load_csv_str(&demo_csv(n, seed), &demo_schema())?;
    let (ds, _) = raw.encode(bins)?;
    Ok(ds)
}

/// Indices of the planted outliers in a table of `n` rows.
pub fn planted_outliers(n: usize) -> Vec<usize> {
    let n_out = (n * OUTLIERS_PER_MILLE_X10 / 1000).max(1);
    let stride = n / n_out;
    if stride == 0 {
        return Vec::new();
    }
    (0..n_out).map(|o| o * stride + stride / 2).collect()
}

/// Tiny enumerable table: three binary attributes forming a dependency
/// chain. `b` copies `a` with 20% flip noise, `c` copies `b` with 25%.
/// Small enough that the exact joint distribution can be checked by
/// enumeration.
pub fn chain3_dataset(n: usize, seed: u64) -> Dataset {
    use crate::dataset::{Attribute, AttributeDomain, Provenance, Schema};

    let attrs = ["a", "b", "c"]
        .iter()
        .map(|name| Attribute {
            name: (*name).into(),
            domain: AttributeDomain::Categorical {
                labels: vec!["0".into(), "1".into()],
            },
        })
        .collect();
    let schema = Schema::new(attrs).unwrap();
    let mut rng = rng_from(seed);
    let mut flat = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let a = u32::from(rng.gen_bool(0.3));
        let b = if rng.gen_bool(0.2) { 1 - a } else { a };
        let c = if rng.gen_bool(0.25) { 1 - b } else { b };
        flat.extend_from_slice(&[a, b, c]);
    }
    Dataset::from_flat(schema.into(), flat, Provenance::Real).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AttributeDomain;
    use crate::vulnerability::rank_vulnerable;

    #[test]
    fn deterministic_in_n_and_seed() {
        assert_eq!(demo_csv(500, 7), demo_csv(500, 7));
        assert_ne!(demo_csv(500, 7), demo_csv(500, 8));
    }

    #[test]
    fn ingests_with_declared_shape() {
        let raw = load_csv_str(&demo_csv(2000, 1), &demo_schema()).unwrap();
        assert_eq!(raw.len(), 2000);
        assert_eq!(raw.width(), 15);
        assert_eq!(raw.n_dropped, 0);
        let (ds, _) = raw.encode(20).unwrap();
        assert_eq!(ds.len(), 2000);
        let n_cat = ds
            .schema()
            .attributes()
            .iter()
            .filter(|a| matches!(a.domain, AttributeDomain::Categorical { .. }))
            .count();
        assert_eq!(n_cat, 9);
        assert_eq!(ds.width(), 15);
    }

    #[test]
    fn marker_values_are_rare_but_not_unique() {
        let raw = load_csv_str(&demo_csv(20_000, 1), &demo_schema()).unwrap();
        let outliers = planted_outliers(20_000);
        // Spot-check one eligible attribute: its last (marker) label must be
        // carried by several regular records besides the outliers.
        let names = raw.names().to_vec();
        let idx = names.iter().position(|n| n == "education").unwrap();
        if let crate::dataset::RawColumn::Categorical { labels, codes } = &raw.columns()[idx] {
            let marker = (labels.len() - 1) as u32;
            assert_eq!(labels.last().unwrap(), "ed7");
            let carriers = codes.iter().filter(|&&c| c == marker).count();
            assert!(
                carriers > outliers.len(),
                "marker should occur beyond the planted outliers: {carriers}"
            );
            assert!(
                carriers < 20_000 / 50,
                "marker should stay rare: {carriers}"
            );
        } else {
            panic!("education should be categorical");
        }
    }

    #[test]
    fn planted_outliers_dominate_vulnerability_ranking() {
        let ds = demo_dataset(4000, 3, 20).unwrap();
        let outliers = planted_outliers(4000);
        let ranked = rank_vulnerable(&ds, 5, outliers.len()).unwrap();
        for s in ranked.iter().take(3) {
            assert!(
                outliers.contains(&s.index),
                "rank {} is regular record {}",
                s.k,
                s.index
            );
        }
        let hits = ranked
            .iter()
            .filter(|s| outliers.contains(&s.index))
            .count();
        assert!(
            hits * 3 >= outliers.len() * 2,
            "only {hits} of {} planted outliers in the top ranks",
            outliers.len()
        );
    }

    #[test]
    fn chain3_matches_its_nominal_marginal() {
        let d = chain3_dataset(50_000, 9);
        assert_eq!(d.len(), 50_000);
        let p_a = d.rows().filter(|r| r[0] == 1).count() as f64 / 50_000.0;
        assert!((p_a - 0.3).abs() < 0.01, "P(a=1) was {p_a}");
    }
}
