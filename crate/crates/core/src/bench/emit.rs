//! Result containers and artifact emission: one CSV per trace plus a JSON
//! manifest tying configs, hashes and seeds to the emitted files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::config::ExperimentConfig;
use crate::qcore::{C64, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub m: usize,
    pub n_adapt: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times_i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times_ii: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trotter_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trotter_depth_per_step: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub model_hash: String,
    pub seed: u64,
    /// Bound on |predicted - simulated| fidelity justified by the training
    /// diagnostics; the overlay check in the manifest uses it.
    pub prediction_budget: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionResult {
    /// Result identifier, e.g. `fig3_uniform_m3`.
    pub name: String,
    pub t_grid: Vec<f64>,
    /// Fidelity vs the oracle per method key (`times_i`, `times_ii`,
    /// `trotter`).
    pub fidelity: BTreeMap<String, Vec<f64>>,
    /// Closed-form predictions per variant key.
    pub predicted: BTreeMap<String, Vec<f64>>,
    /// Per-site observable rows (one row per grid point) per method key;
    /// `observable_label` names the quantity.
    pub observables: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable_label: Option<String>,
    pub depth: DepthReport,
    pub provenance: Provenance,
}

impl EvolutionResult {
    pub fn validate(&self) -> Result<()> {
        let n = self.t_grid.len();
        for w in self.t_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("time grid must be strictly increasing".into()));
            }
        }
        for (key, trace) in self.fidelity.iter().chain(&self.predicted) {
            if trace.len() != n {
                return Err(Error::Config(format!(
                    "trace {key} has {} points, grid has {n}",
                    trace.len()
                )));
            }
            if let Some(bad) = trace.iter().find(|f| !(0.0..=1.0 + 1e-9).contains(*f)) {
                return Err(Error::Config(format!(
                    "fidelity {bad} in trace {key} is out of [0, 1]"
                )));
            }
        }
        for (key, rows) in &self.observables {
            if rows.len() != n {
                return Err(Error::Config(format!(
                    "observable {key} has {} rows, grid has {n}",
                    rows.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub results: Vec<ResultSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultSummary {
    pub name: String,
    pub depth: DepthReport,
    pub provenance: Provenance,
    pub files: Vec<String>,
}

fn csv_row(out: &mut String, t: f64, values: &[f64]) {
    write!(out, "{t}").unwrap();
    for v in values {
        write!(out, ",{v}").unwrap();
    }
    out.push('\n');
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::write(dir.join(name), contents)?;
    Ok(name.to_string())
}

/// Writes every trace of every result as CSV and a `manifest.json` that ties
/// them together. Returns the manifest path. Output is byte-deterministic
/// for a fixed config and seed.
pub fn emit(
    cfg: &ExperimentConfig,
    results: &[EvolutionResult],
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut summaries = Vec::with_capacity(results.len());
    for result in results {
        result.validate()?;
        let mut files = Vec::new();
        for (key, trace) in &result.fidelity {
            let mut text = String::from("t,fidelity\n");
            for (t, f) in result.t_grid.iter().zip(trace) {
                csv_row(&mut text, *t, &[*f]);
            }
            files.push(write_file(dir, &format!("{}_fidelity_{key}.csv", result.name), &text)?);
        }
        for (key, trace) in &result.predicted {
            let mut text = String::from("t,predicted_fidelity\n");
            for (t, f) in result.t_grid.iter().zip(trace) {
                csv_row(&mut text, *t, &[*f]);
            }
            files.push(write_file(dir, &format!("{}_predicted_{key}.csv", result.name), &text)?);
        }
        for (key, rows) in &result.observables {
            let label = result.observable_label.as_deref().unwrap_or("value");
            let n_cols = rows.first().map_or(0, Vec::len);
            let mut text = String::from("t");
            for site in 1..=n_cols {
                write!(text, ",{label}_{site}").unwrap();
            }
            text.push('\n');
            for (t, row) in result.t_grid.iter().zip(rows) {
                csv_row(&mut text, *t, row);
            }
            files.push(write_file(dir, &format!("{}_observables_{key}.csv", result.name), &text)?);
        }
        summaries.push(ResultSummary {
            name: result.name.clone(),
            depth: result.depth.clone(),
            provenance: result.provenance.clone(),
            files,
        });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        results: summaries,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Plain JSON statevector exchange format for the CLI: an array of
/// `[re, im]` amplitude pairs whose length fixes the qubit count.
pub fn state_to_json(psi: &StateVector) -> String {
    let pairs: Vec<[f64; 2]> = psi.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    serde_json::to_string(&pairs).expect("amplitudes serialize")
}

pub fn state_from_json(text: &str) -> Result<StateVector> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
    let dim = pairs.len();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "amplitude count {dim} is not a power of two"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    StateVector::from_amplitudes(n, pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}
