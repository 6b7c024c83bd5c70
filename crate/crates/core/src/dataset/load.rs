//! CSV ingestion against a declared schema.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{RawColumn, RawDataset};

/// Declared kind of one attribute, before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    Categorical,
    Continuous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeDecl {
    pub name: String,
    pub kind: DeclKind,
    /// Optional closed category list. When present, values outside it are
    /// domain errors; when absent the domain is collected from the data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<String>>,
}

/// Schema declaration file: `{"attributes":[{"name":..., "kind":...}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaDecl {
    pub attributes: Vec<AttributeDecl>,
    /// Cell values treated as missing; rows containing one are dropped.
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
}

fn default_missing() -> Vec<String> {
    vec![String::new(), "?".into()]
}

impl SchemaDecl {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let decl: SchemaDecl = serde_json::from_str(&text)?;
        decl.check()?;
        Ok(decl)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let decl: SchemaDecl = serde_json::from_str(text)?;
        decl.check()?;
        Ok(decl)
    }

    fn check(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::SchemaMismatch(
                "schema declaration has no attributes".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate attribute '{}' in schema declaration",
                    a.name
                )));
            }
            if a.kind == DeclKind::Continuous && a.domain.is_some() {
                return Err(Error::SchemaMismatch(format!(
                    "attribute '{}' is continuous but declares a category domain",
                    a.name
                )));
            }
        }
        Ok(())
    }
}

/// Load a CSV file against a schema declaration.
///
/// Rows with missing cells are dropped (the count is kept on the result).
/// Categorical domains not fixed by the declaration are collected from the
/// data and sorted, so the encoding is independent of row order.
pub fn load_csv(path: &Path, decl: &SchemaDecl) -> Result<RawDataset> {
    let file = fs::File::open(path)?;
    load_from_reader(csv::Reader::from_reader(file), decl)
}

/// [`load_csv`] over an in-memory CSV string.
pub fn load_csv_str(text: &str, decl: &SchemaDecl) -> Result<RawDataset> {
    load_from_reader(csv::Reader::from_reader(text.as_bytes()), decl)
}

enum Builder {
    Categorical {
        // label -> code, in first-seen order; remapped to sorted order at the end
        index: HashMap<String, u32>,
        labels: Vec<String>,
        fixed: bool,
        codes: Vec<u32>,
    },
    Continuous {
        values: Vec<f64>,
    },
}

fn load_from_reader<R: std::io::Read>(
    mut reader: csv::Reader<R>,
    decl: &SchemaDecl,
) -> Result<RawDataset> {
    let headers = reader
        .headers()
        .map_err(|e| Error::SchemaMismatch(format!("cannot read CSV header: {}", e)))?
        .clone();
    let header_index: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();

    // Every declared attribute must be present; every CSV column must be declared.
    let mut col_of_attr = Vec::with_capacity(decl.attributes.len());
    for a in &decl.attributes {
        match header_index.get(a.name.as_str()) {
            Some(&i) => col_of_attr.push(i),
            None => {
                return Err(Error::SchemaMismatch(format!(
                    "declared attribute '{}' missing from CSV header",
                    a.name
                )))
            }
        }
    }
    for h in headers.iter() {
        if !decl.attributes.iter().any(|a| a.name == h.trim()) {
            return Err(Error::SchemaMismatch(format!(
                "CSV column '{}' is not declared in the schema",
                h.trim()
            )));
        }
    }

    let mut builders: Vec<Builder> = decl
        .attributes
        .iter()
        .map(|a| match a.kind {
            DeclKind::Categorical => {
                let (labels, fixed) = match &a.domain {
                    Some(d) => (d.clone(), true),
                    None => (Vec::new(), false),
                };
                let index = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.clone(), i as u32))
                    .collect();
                Builder::Categorical {
                    index,
                    labels,
                    fixed,
                    codes: Vec::new(),
                }
            }
            DeclKind::Continuous => Builder::Continuous { values: Vec::new() },
        })
        .collect();

    let mut n_rows = 0usize;
    let mut n_dropped = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 1; // 1-based data row, header excluded
        let record = record?;

        let mut staged: Vec<&str> = Vec::with_capacity(decl.attributes.len());
        let mut drop_row = false;
        for (a, &col) in decl.attributes.iter().zip(&col_of_attr) {
            let cell = record.get(col).ok_or_else(|| Error::Parse {
                row: row_no,
                column: a.name.clone(),
                message: "row is shorter than the header".into(),
            })?;
            let cell = cell.trim();
            if decl.missing.iter().any(|m| m == cell) {
                drop_row = true;
                break;
            }
            staged.push(cell);
        }
        if drop_row {
            n_dropped += 1;
            continue;
        }

        for ((a, builder), &cell) in decl.attributes.iter().zip(&mut builders).zip(&staged) {
            match builder {
                Builder::Categorical {
                    index,
                    labels,
                    fixed,
                    codes,
                } => {
                    let code = match index.get(cell) {
                        Some(&c) => c,
                        None if *fixed => {
                            return Err(Error::Domain {
                                row: row_no,
                                column: a.name.clone(),
                                value: cell.to_string(),
                            })
                        }
                        None => {
                            let c = labels.len() as u32;
                            labels.push(cell.to_string());
                            index.insert(cell.to_string(), c);
                            c
                        }
                    };
                    codes.push(code);
                }
                Builder::Continuous { values } => {
                    let v: f64 = cell.parse().map_err(|_| Error::Parse {
                        row: row_no,
                        column: a.name.clone(),
                        message: format!("'{}' is not a number", cell),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            row: row_no,
                            column: a.name.clone(),
                            message: format!("'{}' is not finite", cell),
                        });
                    }
                    values.push(v);
                }
            }
        }
        n_rows += 1;
    }

    // Collected domains are sorted so codes don't depend on row order.
    let columns = builders
        .into_iter()
        .map(|b| match b {
            Builder::Categorical {
                labels,
                fixed,
                codes,
                ..
            } => {
                if fixed {
                    RawColumn::Categorical { labels, codes }
                } else {
                    let mut sorted = labels.clone();
                    sorted.sort();
                    let remap: HashMap<&str, u32> = sorted
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l.as_str(), i as u32))
                        .collect();
                    let codes = codes
                        .iter()
                        .map(|&c| remap[labels[c as usize].as_str()])
                        .collect();
                    RawColumn::Categorical {
                        labels: sorted,
                        codes,
                    }
                }
            }
            Builder::Continuous { values } => RawColumn::Continuous { values },
        })
        .collect();

    let names = decl.attributes.iter().map(|a| a.name.clone()).collect();
    Ok(RawDataset::new(names, columns, n_rows, n_dropped))
}
