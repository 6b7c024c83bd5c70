//! The audited synthetic-data generators.
//!
//! Two synthesizers with one interface: [`fit`] learns a model from a fully
//! categorical dataset, [`sample`] draws records from it. Both are
//! deterministic given their seeds, and fitted models serialize to JSON
//! with probabilities round-tripping exactly.

mod baynet;
mod cart;
mod mi;

pub use baynet::BayNetModel;
pub use cart::{CartNode, CartSynthModel, CartTree};
pub use mi::mutual_information;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PARENTS: usize = 3;
pub const DEFAULT_MIN_LEAF: usize = 5;
pub const DEFAULT_CART_MAX_DEPTH: usize = 20;

/// Which generator to fit, with its hyperparameters. Hyperparameters left
/// out of a JSON manifest fall back to the module defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    #[serde(rename = "baynet")]
    BayNet {
        #[serde(default = "default_max_parents")]
        max_parents: usize,
    },
    Cart {
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
        #[serde(default = "default_cart_max_depth")]
        max_depth: usize,
    },
}

fn default_max_parents() -> usize {
    DEFAULT_MAX_PARENTS
}

fn default_min_leaf() -> usize {
    DEFAULT_MIN_LEAF
}

fn default_cart_max_depth() -> usize {
    DEFAULT_CART_MAX_DEPTH
}

impl GeneratorSpec {
    pub fn baynet() -> Self {
        GeneratorSpec::BayNet {
            max_parents: DEFAULT_MAX_PARENTS,
        }
    }

    pub fn cart() -> Self {
        GeneratorSpec::Cart {
            min_leaf: DEFAULT_MIN_LEAF,
            max_depth: DEFAULT_CART_MAX_DEPTH,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::BayNet { .. } => "baynet",
            GeneratorSpec::Cart { .. } => "cart",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorSpec::BayNet { max_parents } if max_parents == 0 => {
                Err(Error::Param("max_parents must be >= 1".into()))
            }
            GeneratorSpec::Cart {
                min_leaf,
                max_depth,
            } if min_leaf == 0 || max_depth == 0 => {
                Err(Error::Param("min_leaf and max_depth must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A fitted synthesizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorModel {
    #[serde(rename = "baynet")]
    BayNet(BayNetModel),
    #[serde(rename = "cart")]
    Cart(CartSynthModel),
}

impl GeneratorModel {
    pub fn schema(&self) -> &Arc<Schema> {
        match self {
            GeneratorModel::BayNet(m) => m.schema(),
            GeneratorModel::Cart(m) => m.schema(),
        }
    }
}

/// Fit a generator on a fully categorical dataset.
pub fn fit(spec: &GeneratorSpec, d: &Dataset, seed: u64) -> Result<GeneratorModel> {
    spec.validate()?;
    match *spec {
        GeneratorSpec::BayNet { max_parents } => Ok(GeneratorModel::BayNet(baynet::fit_baynet(
            d,
            max_parents,
            seed,
        )?)),
        GeneratorSpec::Cart {
            min_leaf,
            max_depth,
        } => Ok(GeneratorModel::Cart(cart::fit_cart(
            d, min_leaf, max_depth, seed,
        )?)),
    }
}

/// Draw `m` i.i.d. records from a fitted model.
pub fn sample(model: &GeneratorModel, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::Param("sample size must be >= 1".into()));
    }
    Ok(match model {
        GeneratorModel::BayNet(b) => b.sample(m, seed),
        GeneratorModel::Cart(c) => c.sample(m, seed),
    })
}

pub fn save_model(model: &GeneratorModel, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string(model)?;
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<GeneratorModel> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Total variation distance between the empirical distributions of one
/// attribute in two datasets.
pub fn marginal_tv(a: &Dataset, b: &Dataset, attr: usize) -> Result<f64> {
    if **a.schema() != **b.schema() {
        return Err(Error::SchemaMismatch(
            "marginal comparison across different schemas".into(),
        ));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Eval("marginal of an empty dataset".into()));
    }
    let card = a.schema().cardinality(attr);
    let mut pa = vec![0.0f64; card];
    let mut pb = vec![0.0f64; card];
    for row in a.rows() {
        pa[row[attr] as usize] += 1.0 / a.len() as f64;
    }
    for row in b.rows() {
        pb[row[attr] as usize] += 1.0 / b.len() as f64;
    }
    Ok(pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0)
}
