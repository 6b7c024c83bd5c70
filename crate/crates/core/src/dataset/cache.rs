//! On-disk cache for encoded datasets.
//!
//! A cache directory holds `codes.csv` (integer codes, one column per
//! attribute) and `schema.json` (schema including bin cut points, plus
//! provenance). Writing the same dataset twice produces byte-identical
//! files, so caches can be compared and reused across runs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Dataset, Provenance, Schema};

const CODES_FILE: &str = "codes.csv";
const SCHEMA_FILE: &str = "schema.json";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    schema: Schema,
    provenance: Provenance,
}

pub fn write_cache(d: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let sidecar = Sidecar {
        schema: (**d.schema()).clone(),
        provenance: d.provenance(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    fs::write(dir.join(SCHEMA_FILE), json)?;

    let mut w = csv::Writer::from_path(dir.join(CODES_FILE))?;
    let names: Vec<&str> = d
        .schema()
        .attributes()
        .iter()
        .map(|a| a.name.as_str())
        .collect();
    w.write_record(&names)?;
    let mut cells: Vec<String> = Vec::with_capacity(d.width());
    for row in d.rows() {
        cells.clear();
        cells.extend(row.iter().map(|c| c.to_string()));
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cache(dir: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(dir.join(SCHEMA_FILE))?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    let schema = Arc::new(sidecar.schema);
    let f = schema.attribute_count();

    let mut reader = csv::Reader::from_path(dir.join(CODES_FILE))?;
    let headers = reader.headers()?.clone();
    let names: Vec<&str> = schema
        .attributes()
        .iter()
        .map(|a| a.name.as_str())
        .collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != names {
        return Err(Error::SchemaMismatch(format!(
            "cache column header {:?} does not match schema attributes {:?}",
            got, names
        )));
    }

    let mut data: Vec<u32> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != f {
            return Err(Error::Parse {
                row: row_idx + 1,
                column: String::new(),
                message: format!("expected {} cells, found {}", f, record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let code: u32 = cell.parse().map_err(|_| Error::Parse {
                row: row_idx + 1,
                column: schema.attribute(col).name.clone(),
                message: format!("'{}' is not an integer code", cell),
            })?;
            data.push(code);
        }
    }
    Dataset::from_flat(schema, data, sidecar.provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_csv_str, SchemaDecl};

    fn sample_dataset() -> Dataset {
        let decl = SchemaDecl::from_str(
            r#"{"attributes":[
                {"name":"color","kind":"categorical"},
                {"name":"age","kind":"continuous"}]}"#,
        )
        .unwrap();
        let raw =
            load_csv_str("color,age\nred,3\nblue,5\nred,1\nblue,9\ngreen,2\n", &decl).unwrap();
        raw.encode(2).unwrap().0
    }

    #[test]
    fn round_trip_preserves_dataset() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        write_cache(&ds, dir.path()).unwrap();
        let back = read_cache(dir.path()).unwrap();
        assert_eq!(ds, back);
        assert_eq!(back.provenance(), Provenance::Real);
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        write_cache(&ds, dir.path()).unwrap();
        let codes1 = fs::read(dir.path().join(CODES_FILE)).unwrap();
        let schema1 = fs::read(dir.path().join(SCHEMA_FILE)).unwrap();
        write_cache(&ds, dir.path()).unwrap();
        assert_eq!(codes1, fs::read(dir.path().join(CODES_FILE)).unwrap());
        assert_eq!(schema1, fs::read(dir.path().join(SCHEMA_FILE)).unwrap());
    }

    #[test]
    fn corrupt_code_is_rejected() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        write_cache(&ds, dir.path()).unwrap();
        // Codes outside the schema domain must not validate.
        let path = dir.path().join(CODES_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen('1', "99", 1)).unwrap();
        assert!(read_cache(dir.path()).is_err());
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        write_cache(&ds, dir.path()).unwrap();
        let path = dir.path().join(CODES_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("color", "colour")).unwrap();
        assert!(matches!(
            read_cache(dir.path()),
            Err(Error::SchemaMismatch(_))
        ));
    }
}
