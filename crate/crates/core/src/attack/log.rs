//! Prediction logs and the run directory layout.
//!
//! Every evaluated instance becomes one CSV row, flushed as soon as it is
//! computed. The log doubles as the checkpoint: on resume, instances whose
//! rows are already present are skipped, and a torn final line from an
//! interrupted run is ignored. Aggregates are always recomputed from rows,
//! never trusted from memory.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{AttackConfig, Scenario};

pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const CONTROL_FILE: &str = "control_predictions.csv";
pub const CONFIG_FILE: &str = "config.json";

const HEADER: &str = "scenario,target_id,instance_id,truth,prediction,seed";

/// One evaluated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionRow {
    pub scenario: Scenario,
    pub target_id: usize,
    pub instance_id: usize,
    pub truth: bool,
    pub prediction: bool,
    pub seed: u64,
}

impl PredictionRow {
    fn to_line(self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.scenario.as_str(),
            self.target_id,
            self.instance_id,
            u8::from(self.truth),
            u8::from(self.prediction),
            self.seed
        )
    }

    fn parse(line: &str) -> Option<PredictionRow> {
        let mut fields = line.split(',');
        let scenario = Scenario::parse(fields.next()?)?;
        let target_id = fields.next()?.parse().ok()?;
        let instance_id = fields.next()?.parse().ok()?;
        let truth = parse_bit(fields.next()?)?;
        let prediction = parse_bit(fields.next()?)?;
        let seed = fields.next()?.parse().ok()?;
        if fields.next().is_some() {
            return None;
        }
        Some(PredictionRow {
            scenario,
            target_id,
            instance_id,
            truth,
            prediction,
            seed,
        })
    }
}

fn parse_bit(s: &str) -> Option<bool> {
    match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Append-mode prediction log, one flush per appended batch.
pub struct PredictionLog {
    writer: BufWriter<fs::File>,
}

impl PredictionLog {
    /// Open for appending, writing the header when the file is new or empty.
    /// A torn final line left by an interrupted write is truncated away so
    /// the next append starts on a line boundary.
    pub fn open_append(path: &Path) -> Result<PredictionLog> {
        let mut fresh = true;
        if let Ok(text) = fs::read_to_string(path) {
            fresh = text.is_empty();
            if !text.is_empty() && !text.ends_with('\n') {
                let keep = text.rfind('\n').map(|p| p + 1).unwrap_or(0);
                let file = fs::OpenOptions::new().write(true).open(path)?;
                file.set_len(keep as u64)?;
                fresh = keep == 0;
            }
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let mut writer = BufWriter::new(file);
        if fresh {
            writeln!(writer, "{HEADER}")?;
            writer.flush()?;
        }
        Ok(PredictionLog { writer })
    }

    pub fn append(&mut self, rows: &[PredictionRow]) -> Result<()> {
        for row in rows {
            writeln!(self.writer, "{}", row.to_line())?;
        }
        self.writer.flush()?;
        Ok(())
    }
}

/// Read every complete row of a log. A final line that does not parse is
/// treated as an interrupted write and dropped; garbage anywhere else is an
/// error. A missing file reads as empty.
pub fn read_log(path: &Path) -> Result<Vec<PredictionRow>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() {
        return Ok(Vec::new());
    }
    if lines[0] != HEADER {
        return Err(Error::Parse {
            row: 1,
            column: "header".into(),
            message: format!("expected '{HEADER}', found '{}'", lines[0]),
        });
    }
    let mut rows = Vec::with_capacity(lines.len() - 1);
    for (i, line) in lines[1..].iter().enumerate() {
        match PredictionRow::parse(line) {
            Some(row) => rows.push(row),
            None if i == lines.len() - 2 => break,
            None => {
                return Err(Error::Parse {
                    row: i + 2,
                    column: "row".into(),
                    message: format!("unparseable log line '{line}'"),
                })
            }
        }
    }
    Ok(rows)
}

/// Instances already evaluated, keyed by (scenario, target).
pub fn completed_instances(rows: &[PredictionRow]) -> HashMap<(Scenario, usize), BTreeSet<usize>> {
    let mut done: HashMap<(Scenario, usize), BTreeSet<usize>> = HashMap::new();
    for row in rows {
        done.entry((row.scenario, row.target_id))
            .or_default()
            .insert(row.instance_id);
    }
    done
}

/// An experiment's output directory: resolved config echo plus the two logs.
///
/// Reusing a directory resumes the run inside it, which requires the stored
/// config to match the requested one exactly; anything else is refused
/// rather than silently mixing two experiments' rows.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, cfg: &AttackConfig) -> Result<RunDir> {
        fs::create_dir_all(root)?;
        let cfg_path = root.join(CONFIG_FILE);
        let requested = serde_json::to_string_pretty(cfg)?;
        match fs::read_to_string(&cfg_path) {
            Ok(stored) if stored.trim_end() == requested => {}
            Ok(_) => {
                return Err(Error::Config(format!(
                    "{} holds a different experiment config; use a fresh directory",
                    root.display()
                )))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                fs::write(&cfg_path, format!("{requested}\n"))?;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(RunDir {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.root.join(PREDICTIONS_FILE)
    }

    pub fn control_path(&self) -> PathBuf {
        self.root.join(CONTROL_FILE)
    }
}
