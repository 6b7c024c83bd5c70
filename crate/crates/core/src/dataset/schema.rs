//! Schema types: attribute domains, bin specifications, record validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantile binning of one originally-continuous attribute.
///
/// `cuts` are the interior cut points, strictly increasing. Code `i` covers
/// `(cuts[i-1], cuts[i]]`, with the outermost bins closed by the observed
/// `min` and `max`. A constant attribute has no cuts and a single bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub cuts: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

impl BinSpec {
    pub fn n_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Bin index of a raw value: the number of cuts strictly below it.
    /// Monotone: `a < b` implies `bin_of(a) <= bin_of(b)`.
    pub fn bin_of(&self, value: f64) -> u32 {
        self.cuts.partition_point(|c| value > *c) as u32
    }

    /// Representative raw value for a bin, the midpoint of its edges.
    pub fn midpoint(&self, bin: u32) -> f64 {
        let bin = bin as usize;
        let lo = if bin == 0 {
            self.min
        } else {
            self.cuts[bin - 1]
        };
        let hi = if bin == self.cuts.len() {
            self.max
        } else {
            self.cuts[bin]
        };
        (lo + hi) / 2.0
    }

    /// Full edge vector `[min, cuts..., max]`.
    pub fn edges(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.cuts.len() + 2);
        e.push(self.min);
        e.extend_from_slice(&self.cuts);
        e.push(self.max);
        e
    }

    fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(Error::SchemaMismatch(format!(
                "bin range [{}, {}] is not a finite interval",
                self.min, self.max
            )));
        }
        for w in self.cuts.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::SchemaMismatch(format!(
                    "bin cuts not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let (Some(first), Some(last)) = (self.cuts.first(), self.cuts.last()) {
            if *first < self.min || *last > self.max {
                return Err(Error::SchemaMismatch(
                    "bin cuts fall outside [min, max]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Domain of one attribute in a fully encoded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeDomain {
    /// Labelled categories; the code of a value is its index in `labels`.
    Categorical { labels: Vec<String> },
    /// Quantile-binned continuous values; the code is the bin index.
    Binned(BinSpec),
}

impl AttributeDomain {
    pub fn cardinality(&self) -> usize {
        match self {
            AttributeDomain::Categorical { labels } => labels.len(),
            AttributeDomain::Binned(spec) => spec.n_bins(),
        }
    }

    pub fn is_binned(&self) -> bool {
        matches!(self, AttributeDomain::Binned(_))
    }
}

/// One named attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub domain: AttributeDomain,
}

impl Attribute {
    pub fn cardinality(&self) -> usize {
        self.domain.cardinality()
    }
}

/// Ordered attribute list of a fully categorical-encoded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemaRepr", into = "SchemaRepr")]
pub struct Schema {
    attributes: Vec<Attribute>,
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    attributes: Vec<Attribute>,
}

impl TryFrom<SchemaRepr> for Schema {
    type Error = Error;
    fn try_from(repr: SchemaRepr) -> Result<Self> {
        Schema::new(repr.attributes)
    }
}

impl From<Schema> for SchemaRepr {
    fn from(s: Schema) -> Self {
        SchemaRepr {
            attributes: s.attributes,
        }
    }
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::SchemaMismatch("schema has no attributes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for attr in &attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate attribute name '{}'",
                    attr.name
                )));
            }
            match &attr.domain {
                AttributeDomain::Categorical { labels } => {
                    if labels.is_empty() {
                        return Err(Error::SchemaMismatch(format!(
                            "attribute '{}' has an empty domain",
                            attr.name
                        )));
                    }
                }
                AttributeDomain::Binned(spec) => spec.validate()?,
            }
        }
        Ok(Schema { attributes })
    }

    /// Number of attributes.
    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.attributes[index].cardinality()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Check one row of codes against every attribute domain.
    pub fn validate_row(&self, codes: &[u32]) -> Result<()> {
        if codes.len() != self.attributes.len() {
            return Err(Error::SchemaMismatch(format!(
                "record has {} codes, schema has {} attributes",
                codes.len(),
                self.attributes.len()
            )));
        }
        for (i, (&code, attr)) in codes.iter().zip(&self.attributes).enumerate() {
            if code as usize >= attr.cardinality() {
                return Err(Error::SchemaMismatch(format!(
                    "code {} out of range for attribute {} '{}' (cardinality {})",
                    code,
                    i,
                    attr.name,
                    attr.cardinality()
                )));
            }
        }
        Ok(())
    }
}

/// One fully encoded record: a code per attribute, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record(Vec<u32>);

impl Record {
    pub fn new(codes: Vec<u32>) -> Self {
        Record(codes)
    }

    pub fn codes(&self) -> &[u32] {
        &self.0
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        schema.validate_row(&self.0)
    }
}

impl From<Vec<u32>> for Record {
    fn from(codes: Vec<u32>) -> Self {
        Record(codes)
    }
}

impl From<&[u32]> for Record {
    fn from(codes: &[u32]) -> Self {
        Record(codes.to_vec())
    }
}
