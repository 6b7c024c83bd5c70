//! Experiment manifests: one JSON file that pins everything a run needs.
//!
//! The manifest is re-serialized with all defaults filled in and written
//! into the output directory, so every result on disk names the exact
//! configuration that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synthmia::attack::{AttackConfig, Scenario};
use synthmia::generators::GeneratorSpec;
use synthmia::metaclassifier::RfParams;
use synthmia::{Error, Result};

/// Pick targets automatically: the `count` records with the highest
/// nearest-neighbour vulnerability score at the given `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopVulnerable {
    pub count: usize,
    pub k: usize,
}

fn default_bins() -> usize {
    20
}
fn default_d_size() -> usize {
    1000
}
fn default_n_shadow() -> usize {
    2000
}
fn default_n_test() -> usize {
    100
}
fn default_query_budget() -> usize {
    100_000
}
fn default_aux_records() -> usize {
    10_000
}
fn default_test_records() -> usize {
    5_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    /// Experiment name; used in file names and the checkpoint-root override.
    pub name: String,
    /// Raw dataset CSV.
    pub csv: PathBuf,
    /// Schema declaration JSON for the CSV.
    pub schema: PathBuf,
    /// Quantile bins for continuous attributes.
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub generator: GeneratorSpec,
    /// Scenarios to run, each into its own subdirectory.
    pub scenarios: Vec<Scenario>,
    #[serde(default = "default_d_size")]
    pub d_size: usize,
    /// Defaults to `d_size`; the two must be equal.
    #[serde(default)]
    pub n_synthetic: Option<usize>,
    #[serde(default = "default_n_shadow")]
    pub n_shadow: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_query_budget")]
    pub query_budget: usize,
    #[serde(default)]
    pub rf: RfParams,
    #[serde(default)]
    pub master_seed: u64,
    /// Explicit target row indices into the encoded dataset. Leave empty to
    /// use `top_vulnerable`.
    #[serde(default)]
    pub targets: Vec<usize>,
    #[serde(default)]
    pub top_vulnerable: Option<TopVulnerable>,
    /// Records carved out for the attacker's auxiliary split (scenario s0).
    #[serde(default = "default_aux_records")]
    pub aux_records: usize,
    /// Records carved out for hidden test worlds.
    #[serde(default = "default_test_records")]
    pub test_records: usize,
    /// Output directory; `--out` and the checkpoint-root env var override it.
    pub out: PathBuf,
}

impl ExperimentManifest {
    pub fn from_path(path: &Path) -> Result<ExperimentManifest> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        let manifest: ExperimentManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))?;
        Ok(manifest)
    }

    pub fn n_synthetic(&self) -> usize {
        self.n_synthetic.unwrap_or(self.d_size)
    }

    /// Check everything that does not require loading the dataset.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("manifest name must not be empty".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("scenario list must not be empty".into()));
        }
        let mut seen = self.scenarios.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.scenarios.len() {
            return Err(Error::Config("scenario list has duplicates".into()));
        }
        if !self.csv.exists() {
            return Err(Error::Config(format!(
                "dataset CSV {} does not exist",
                self.csv.display()
            )));
        }
        if !self.schema.exists() {
            return Err(Error::Config(format!(
                "schema file {} does not exist",
                self.schema.display()
            )));
        }
        if self.targets.is_empty() && self.top_vulnerable.is_none() {
            return Err(Error::Config("set either targets or top_vulnerable".into()));
        }
        if !self.targets.is_empty() && self.top_vulnerable.is_some() {
            return Err(Error::Config(
                "targets and top_vulnerable are mutually exclusive".into(),
            ));
        }
        if let Some(tv) = self.top_vulnerable {
            if tv.count == 0 || tv.k == 0 {
                return Err(Error::Config(
                    "top_vulnerable count and k must be >= 1".into(),
                ));
            }
        }
        if self.test_records < self.d_size {
            return Err(Error::Config(format!(
                "test_records ({}) must be >= d_size ({}) so test worlds can \
                 be sampled without replacement",
                self.test_records, self.d_size
            )));
        }
        if self.scenarios.contains(&Scenario::S0) && self.aux_records < self.d_size {
            return Err(Error::Config(format!(
                "aux_records ({}) must be >= d_size ({}) for scenario s0",
                self.aux_records, self.d_size
            )));
        }
        // Shape checks shared with the attack config.
        self.to_attack_config(self.scenarios[0], vec![0]).validate()
    }

    /// The attack configuration for one scenario, with targets resolved.
    pub fn to_attack_config(&self, scenario: Scenario, targets: Vec<usize>) -> AttackConfig {
        AttackConfig {
            scenario,
            generator: self.generator,
            d_size: self.d_size,
            n_synthetic: self.n_synthetic(),
            n_shadow: self.n_shadow,
            n_test: self.n_test,
            m: self.m,
            query_budget: self.query_budget,
            rf: self.rf,
            master_seed: self.master_seed,
            targets,
        }
    }

    /// Re-serialize with every default filled in, for echoing into the
    /// output directory.
    pub fn echo_json(&self) -> Result<String> {
        let mut filled = self.clone();
        filled.n_synthetic = Some(self.n_synthetic());
        let mut json = serde_json::to_string_pretty(&filled)?;
        json.push('\n');
        Ok(json)
    }
}
