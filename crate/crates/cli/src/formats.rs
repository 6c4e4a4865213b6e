//! Input file schemas and their conversion into core types.
//!
//! All indices are 0-based in files, matching the reports.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use lss_core::{Matrix, SwitchedSystem, SwitchingSignal};

/// System description: `dimension`, row-major `matrices`, optional
/// `lyapunov` matrix and per-matrix `labels`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub dimension: usize,
    /// Each matrix as `dimension` rows of `dimension` entries.
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], d: usize, what: &str) -> Result<Matrix> {
    if rows.len() != d {
        bail!("{what}: has {} rows, expected {d}", rows.len());
    }
    let mut m = Matrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            bail!("{what}: row {i} has {} entries, expected {d}", row.len());
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                bail!("{what}: entry ({i}, {j}) is not finite");
            }
            m[(i, j)] = x;
        }
    }
    Ok(m)
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SystemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read system file {}", path.display()))?;
        let file: SystemFile = serde_json::from_str(&text)
            .with_context(|| format!("system file {}: malformed JSON", path.display()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            bail!("field 'dimension': must be positive");
        }
        if self.matrices.is_empty() {
            bail!("field 'matrices': at least one matrix is required");
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.matrices.len() {
                bail!(
                    "field 'labels': {} labels for {} matrices",
                    labels.len(),
                    self.matrices.len()
                );
            }
        }
        Ok(())
    }

    pub fn to_system(&self) -> Result<SwitchedSystem> {
        let d = self.dimension;
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(k, rows)| rows_to_matrix(rows, d, &format!("field 'matrices[{k}]'")))
            .collect::<Result<Vec<_>>>()?;
        let lyapunov = self
            .lyapunov
            .as_ref()
            .map(|rows| rows_to_matrix(rows, d, "field 'lyapunov'"))
            .transpose()?;
        SwitchedSystem::new(mats, lyapunov).map_err(|e| anyhow!("system file: {e}"))
    }
}

/// Signal description, tagged by `type`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignalSpec {
    /// `times` lists `a_0 = 0, …, a_N` plus the trailing horizon, so it is
    /// one longer than `values`.
    Explicit { times: Vec<f64>, values: Vec<usize> },
    Periodic { pattern: Vec<PatternEntry> },
    AverageDwell {
        n0: u32,
        tau_a: f64,
        seed: u64,
        /// Number of modes; defaults to the system's mode count (or 2 when
        /// no system is in play).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modes: Option<usize>,
    },
    Chaotic {
        tau: f64,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modes: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternEntry {
    pub index: usize,
    pub duration: f64,
}

impl SignalSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read signal file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("signal file {}: malformed JSON", path.display()))
    }

    /// Builds the signal. `default_modes` supplies the mode count for
    /// generator specs that omit it; `seed_override` replaces the stored
    /// seed when the user passes `--seed`.
    pub fn to_signal(
        &self,
        default_modes: Option<usize>,
        seed_override: Option<u64>,
    ) -> Result<SwitchingSignal> {
        let built = match self {
            SignalSpec::Explicit { times, values } => {
                SwitchingSignal::explicit(times.clone(), values.clone())
            }
            SignalSpec::Periodic { pattern } => SwitchingSignal::periodic(
                pattern.iter().map(|e| (e.index, e.duration)).collect(),
            ),
            SignalSpec::AverageDwell {
                n0,
                tau_a,
                seed,
                modes,
            } => SwitchingSignal::average_dwell(
                *n0,
                *tau_a,
                modes.or(default_modes).unwrap_or(2),
                seed_override.unwrap_or(*seed),
            ),
            SignalSpec::Chaotic { tau, seed, modes } => SwitchingSignal::chaotic(
                *tau,
                modes.or(default_modes).unwrap_or(2),
                seed_override.unwrap_or(*seed),
            ),
        };
        built.map_err(|e| anyhow!("signal file: {e}"))
    }
}

/// Comma-separated reals, e.g. `--x0 1,0.5,-2`.
pub fn parse_x0(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("x0: '{}' is not a number", s.trim()))
        })
        .collect()
}
