//! Tabular data ingestion and encoding.
//!
//! CSV files are loaded against a declared schema into a [`RawDataset`],
//! whose continuous attributes hold raw numeric values. [`RawDataset::encode`]
//! quantile-bins those attributes so that everything downstream (generators,
//! count queries, neighbor distances) operates on a fully categorical
//! [`Dataset`] of dense integer codes.

mod cache;
mod load;
mod schema;

pub use cache::{read_cache, write_cache};
pub use load::{load_csv, load_csv_str, AttributeDecl, DeclKind, SchemaDecl};
pub use schema::{Attribute, AttributeDomain, BinSpec, Record, Schema};

use std::sync::Arc;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Where a dataset's records came from. Attack code asserts that scenarios
/// which promise to never touch real data only ever see `Synthetic` pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Real,
    Synthetic,
}

/// A fully categorical-encoded table.
///
/// Rows are stored flat in row-major order; records of the same schema can be
/// compared as `&[u32]` slices. Immutable after construction and cheap to
/// share across threads (the schema is behind an `Arc`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    data: Vec<u32>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, provenance: Provenance) -> Self {
        Dataset {
            schema,
            data: Vec::new(),
            provenance,
        }
    }

    /// Build from flat row-major codes, validating every row.
    pub fn from_flat(schema: Arc<Schema>, data: Vec<u32>, provenance: Provenance) -> Result<Self> {
        let f = schema.attribute_count();
        if data.len() % f != 0 {
            return Err(Error::SchemaMismatch(format!(
                "flat data length {} is not a multiple of attribute count {}",
                data.len(),
                f
            )));
        }
        let ds = Dataset {
            schema,
            data,
            provenance,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Flat row-major codes without validation. The caller guarantees the rows
    /// were produced against this schema (samplers, subsetting).
    pub(crate) fn from_flat_unchecked(
        schema: Arc<Schema>,
        data: Vec<u32>,
        provenance: Provenance,
    ) -> Self {
        debug_assert_eq!(data.len() % schema.attribute_count(), 0);
        Dataset {
            schema,
            data,
            provenance,
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.data.len() / self.schema.attribute_count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Attribute count.
    pub fn width(&self) -> usize {
        self.schema.attribute_count()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let f = self.schema.attribute_count();
        &self.data[i * f..(i + 1) * f]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks_exact(self.schema.attribute_count())
    }

    pub fn record(&self, i: usize) -> Record {
        Record::from(self.row(i))
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        self.schema.validate_row(row)?;
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub(crate) fn push_row_unchecked(&mut self, row: &[u32]) {
        debug_assert!(self.schema.validate_row(row).is_ok());
        self.data.extend_from_slice(row);
    }

    /// New dataset holding the rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let f = self.schema.attribute_count();
        let mut data = Vec::with_capacity(indices.len() * f);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Dataset {
            schema: Arc::clone(&self.schema),
            data,
            provenance: self.provenance,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Dataset {
        self.provenance = provenance;
        self
    }

    /// Exact-tuple membership test.
    pub fn contains(&self, codes: &[u32]) -> bool {
        self.rows().any(|r| r == codes)
    }

    pub fn validate(&self) -> Result<()> {
        for row in self.rows() {
            self.schema.validate_row(row)?;
        }
        Ok(())
    }
}

/// Cut points chosen at discretization, one entry per attribute
/// (`None` for attributes that were categorical to begin with).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub per_attribute: Vec<Option<BinSpec>>,
}

/// A loaded table whose continuous attributes still hold raw numeric values.
#[derive(Debug, Clone)]
pub struct RawDataset {
    names: Vec<String>,
    columns: Vec<RawColumn>,
    n_rows: usize,
    /// Rows dropped at ingestion because a cell was missing.
    pub n_dropped: usize,
}

#[derive(Debug, Clone)]
pub enum RawColumn {
    Categorical {
        labels: Vec<String>,
        codes: Vec<u32>,
    },
    Continuous {
        values: Vec<f64>,
    },
}

impl RawDataset {
    pub(crate) fn new(
        names: Vec<String>,
        columns: Vec<RawColumn>,
        n_rows: usize,
        n_dropped: usize,
    ) -> Self {
        RawDataset {
            names,
            columns,
            n_rows,
            n_dropped,
        }
    }

    pub fn len(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn has_continuous(&self) -> bool {
        self.columns
            .iter()
            .any(|c| matches!(c, RawColumn::Continuous { .. }))
    }

    /// Quantile-discretize every continuous attribute into at most `bins`
    /// categories. Attributes with fewer distinct values than `bins` get one
    /// bin per distinct value. Categorical attributes pass through unchanged.
    pub fn discretize(&self, bins: usize) -> Result<(Dataset, BinEdges)> {
        if bins < 2 {
            return Err(Error::Param(format!("bins must be >= 2, got {}", bins)));
        }
        let mut attributes = Vec::with_capacity(self.columns.len());
        let mut edges = Vec::with_capacity(self.columns.len());
        let mut encoded_cols: Vec<&[u32]> = Vec::new();
        let mut owned_cols: Vec<Vec<u32>> = Vec::new();

        for (name, col) in self.names.iter().zip(&self.columns) {
            match col {
                RawColumn::Categorical { labels, codes } => {
                    attributes.push(Attribute {
                        name: name.clone(),
                        domain: AttributeDomain::Categorical {
                            labels: labels.clone(),
                        },
                    });
                    edges.push(None);
                    owned_cols.push(codes.clone());
                }
                RawColumn::Continuous { values } => {
                    let spec = quantile_cuts(values, bins);
                    let codes: Vec<u32> = values.iter().map(|&v| spec.bin_of(v)).collect();
                    attributes.push(Attribute {
                        name: name.clone(),
                        domain: AttributeDomain::Binned(spec.clone()),
                    });
                    edges.push(Some(spec));
                    owned_cols.push(codes);
                }
            }
        }
        encoded_cols.extend(owned_cols.iter().map(|c| c.as_slice()));

        let schema = Arc::new(Schema::new(attributes)?);
        let f = encoded_cols.len();
        let mut data = Vec::with_capacity(self.n_rows * f);
        for r in 0..self.n_rows {
            for col in &encoded_cols {
                data.push(col[r]);
            }
        }
        let dataset = Dataset::from_flat_unchecked(schema, data, Provenance::Real);
        Ok((
            dataset,
            BinEdges {
                per_attribute: edges,
            },
        ))
    }

    /// Encode without binning; errors if any attribute is continuous.
    pub fn try_into_categorical(&self) -> Result<Dataset> {
        if self.has_continuous() {
            let name = self
                .names
                .iter()
                .zip(&self.columns)
                .find(|(_, c)| matches!(c, RawColumn::Continuous { .. }))
                .map(|(n, _)| n.clone())
                .unwrap_or_default();
            return Err(Error::SchemaMismatch(format!(
                "attribute '{}' is continuous; discretize first",
                name
            )));
        }
        let (ds, _) = self.discretize(2)?;
        Ok(ds)
    }

    /// Encode to a fully categorical dataset: discretizes when continuous
    /// attributes are present, otherwise passes categories straight through.
    pub fn encode(&self, bins: usize) -> Result<(Dataset, BinEdges)> {
        if self.has_continuous() {
            self.discretize(bins)
        } else {
            let ds = self.try_into_categorical()?;
            let width = ds.width();
            Ok((
                ds,
                BinEdges {
                    per_attribute: vec![None; width],
                },
            ))
        }
    }
}

/// Quantile cut points for one value column.
///
/// When there are at most `bins` distinct values, every distinct value gets
/// its own bin. Otherwise cuts sit at the j/bins quantiles of the sorted
/// data, deduplicated, with cuts equal to the maximum dropped (the bin above
/// them would be unreachable).
fn quantile_cuts(values: &[f64], bins: usize) -> BinSpec {
    if values.is_empty() {
        return BinSpec {
            cuts: vec![],
            min: 0.0,
            max: 0.0,
        };
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value survived load"));
    let n = sorted.len();
    let min = sorted[0];
    let max = sorted[n - 1];

    let mut distinct = sorted.clone();
    distinct.dedup();

    let mut cuts: Vec<f64>;
    if distinct.len() <= bins {
        // One bin per distinct value: cut below each value except the lowest.
        cuts = distinct[..distinct.len() - 1].to_vec();
    } else {
        cuts = Vec::with_capacity(bins - 1);
        for j in 1..bins {
            // Position of the j/bins quantile in the sorted column.
            let pos = (j * n).div_ceil(bins) - 1;
            cuts.push(sorted[pos]);
        }
        cuts.dedup();
        cuts.retain(|&c| c < max);
    }
    BinSpec { cuts, min, max }
}

/// Draw pairwise-disjoint random subsets of the requested sizes,
/// uniformly without replacement, deterministic for a fixed seed.
pub fn split_disjoint(d: &Dataset, sizes: &[usize], seed: u64) -> Result<Vec<Dataset>> {
    let total: usize = sizes.iter().sum();
    if total > d.len() {
        return Err(Error::Param(format!(
            "requested {} records across splits, dataset has {}",
            total,
            d.len()
        )));
    }
    let mut rng = rng_from(seed);
    let picked = index::sample(&mut rng, d.len(), total).into_vec();
    let mut out = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &size in sizes {
        out.push(d.subset(&picked[offset..offset + size]));
        offset += size;
    }
    Ok(out)
}
