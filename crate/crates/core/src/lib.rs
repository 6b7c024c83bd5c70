//! Privacy auditing for synthetic tabular data.
//!
//! This crate measures how much a synthetic data release leaks about
//! individual records of the table it was trained on. The unit of
//! measurement is a membership inference attack: a meta-classifier is
//! trained on shadow synthetic datasets to distinguish "target record was
//! in the training data" from "it was not", using only count statistics of
//! the released synthetic records. Accuracy above 50% on balanced test
//! worlds is leakage.
//!
//! Pipeline, in module order:
//!
//! * [`dataset`]: CSV ingestion, quantile discretization, encoded caches.
//! * [`generators`]: the audited synthesizers (Bayesian network, CART).
//! * [`vulnerability`]: outlier scoring to pick attack targets.
//! * [`features`]: random count queries anchored on a target record.
//! * [`metaclassifier`]: a small random forest over query features.
//! * [`attack`]: world construction, shadow training, the four scenarios.
//! * [`report`]: aggregation of prediction logs into summary tables.
//!
//! Everything is deterministic given a master seed: per-task seeds are
//! derived by hashing a structured path (see [`seed`]), so results are
//! identical across runs and across worker counts.

pub mod attack;
pub mod dataset;
pub mod error;
pub mod features;
pub mod fixture;
pub mod generators;
pub mod metaclassifier;
pub mod report;
pub mod seed;
pub mod vulnerability;

pub use dataset::{
    load_csv, load_csv_str, read_cache, split_disjoint, write_cache, Attribute, AttributeDomain,
    BinEdges, BinSpec, Dataset, Provenance, RawColumn, RawDataset, Record, Schema, SchemaDecl,
};
pub use error::{Error, ErrorClass, Result};
