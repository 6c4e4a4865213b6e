//! JSON-serializable mirrors of the library's report types, plus the
//! human-readable rendering and the CSV/atomic-write helpers.
//!
//! Field order in the structs fixes the JSON key order, so identical inputs
//! produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use lss_core::criteria::{
    ConditionC, DimensionVerdict, PlanarClass, PlanarReport, StabilityReport, Statement,
    Theorem7Verdict,
};
use lss_core::signal::{ChaoticVerdict, RegularVerdict};
use lss_core::sim::FlowRecord;
use lss_core::{MatrixAnalysis, SignalClassification, Subspace, SuEstimate};

use crate::formats::matrix_to_rows;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub dim: usize,
    /// Orthonormal basis vectors, each of length `ambient`.
    pub basis: Vec<Vec<f64>>,
}

impl SubspaceJson {
    fn from(s: &Subspace) -> Self {
        SubspaceJson {
            dim: s.dim(),
            basis: s.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixAnalysisJson {
    pub index: usize,
    pub v: SubspaceJson,
    pub k: SubspaceJson,
    pub is_hurwitz: bool,
    pub skew_residual: f64,
    pub complement_spectral_abscissa: f64,
}

impl MatrixAnalysisJson {
    fn from(a: &MatrixAnalysis) -> Self {
        MatrixAnalysisJson {
            index: a.index,
            v: SubspaceJson::from(&a.v),
            k: SubspaceJson::from(&a.k),
            is_hurwitz: a.is_hurwitz,
            skew_residual: a.skew_residual,
            complement_spectral_abscissa: a.complement_spectral_abscissa,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCJson {
    pub holds: bool,
    /// Witness component meeting every subspace, when the condition fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_component: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionVerdictJson {
    pub prerequisite: bool,
    pub conditions: [bool; 4],
    pub pass: bool,
}

impl DimensionVerdictJson {
    fn from(v: &DimensionVerdict) -> Self {
        DimensionVerdictJson {
            prerequisite: v.prerequisite,
            conditions: v.conditions,
            pass: v.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem7Json {
    pub abscissas: [f64; 2],
    pub hurwitz: [bool; 2],
    pub lyapunov_ok: bool,
    pub k_intersection_dim: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarJson {
    pub hypotheses_ok: bool,
    /// Per-mode class: `"zero_and_negative"`, `"hurwitz(k_dim)"`, or
    /// `"inconsistent"`.
    pub classes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub very_particular: Option<usize>,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConclusionJson {
    pub statement: String,
    pub cited: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReportJson {
    pub lyapunov_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_witness: Option<LyapunovWitnessJson>,
    pub per_matrix: Vec<MatrixAnalysisJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_c: Option<ConditionCJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem4: Option<DimensionVerdictJson>,
    pub j: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem6: Option<DimensionVerdictJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem7: Option<Theorem7Json>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarJson>,
    pub conclusion: ConclusionJson,
}

fn statement_text(s: Statement) -> &'static str {
    match s {
        Statement::LyapunovFailed => "common Lyapunov hypothesis fails; no certificate applies",
        Statement::AnyInput => "asymptotically stable for any input",
        Statement::AnyInputWithJ => {
            "asymptotically stable for any input with the stated infinite-occupancy set J"
        }
        Statement::WellDistributed => "asymptotically stable for every well-distributed input",
        Statement::RegularInputs => "asymptotically stable for every regular input",
        Statement::Inconclusive => "inconclusive: no certificate fired",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovWitnessJson {
    pub index: usize,
    pub max_eig: f64,
}

impl StabilityReportJson {
    pub fn from(r: &StabilityReport) -> Self {
        StabilityReportJson {
            lyapunov_ok: r.lyapunov_ok,
            lyapunov_witness: r
                .lyapunov_witness
                .map(|(index, max_eig)| LyapunovWitnessJson { index, max_eig }),
            per_matrix: r.per_matrix.iter().map(MatrixAnalysisJson::from).collect(),
            condition_c: r.condition_c.as_ref().map(|c| match c {
                ConditionC::Holds => ConditionCJson {
                    holds: true,
                    failing_component: None,
                },
                ConditionC::Fails { component } => ConditionCJson {
                    holds: false,
                    failing_component: Some(component.clone()),
                },
            }),
            theorem4: r.theorem4.as_ref().map(DimensionVerdictJson::from),
            j: r.j.clone(),
            theorem6: r.theorem6.as_ref().map(DimensionVerdictJson::from),
            theorem7: r.theorem7.as_ref().map(|t: &Theorem7Verdict| Theorem7Json {
                abscissas: t.abscissas,
                hurwitz: t.hurwitz,
                lyapunov_ok: t.lyapunov_ok,
                k_intersection_dim: t.k_intersection_dim,
                pass: t.pass,
            }),
            planar: r.planar.as_ref().map(|p: &PlanarReport| PlanarJson {
                hypotheses_ok: p.hypotheses_ok,
                classes: p
                    .classes
                    .iter()
                    .map(|c| match c {
                        PlanarClass::ZeroAndNegative => "zero_and_negative".to_string(),
                        PlanarClass::Hurwitz { k_dim } => format!("hurwitz({k_dim})"),
                        PlanarClass::Inconsistent => "inconsistent".to_string(),
                    })
                    .collect(),
                very_particular: p.very_particular,
                certified: p.certified,
            }),
            conclusion: ConclusionJson {
                statement: statement_text(r.conclusion.statement).to_string(),
                cited: r.conclusion.cited.to_string(),
            },
        }
    }

    /// Human-readable rendering for stdout.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if !self.lyapunov_ok {
            let w = self.lyapunov_witness.as_ref().unwrap();
            let _ = writeln!(
                out,
                "lyapunov: FAIL (matrix {} has lambda_max(B'P + PB) = {:.3e})",
                w.index, w.max_eig
            );
            let _ = writeln!(out, "conclusion: {}", self.conclusion.statement);
            return out;
        }
        let _ = writeln!(out, "lyapunov: PASS");
        for a in &self.per_matrix {
            let _ = writeln!(
                out,
                "matrix {}: dim V = {}, dim K = {}, hurwitz = {}",
                a.index, a.v.dim, a.k.dim, a.is_hurwitz
            );
        }
        if let Some(c) = &self.condition_c {
            if c.holds {
                let _ = writeln!(out, "condition (C): holds");
            } else {
                let _ = writeln!(
                    out,
                    "condition (C): fails (component {:?} meets every V_i)",
                    c.failing_component.as_ref().unwrap()
                );
            }
        }
        if let Some(t) = &self.theorem4 {
            let _ = writeln!(
                out,
                "theorem 4: prerequisite = {}, conditions = {:?}, pass = {}",
                t.prerequisite, t.conditions, t.pass
            );
        }
        if let Some(t) = &self.theorem6 {
            let _ = writeln!(
                out,
                "theorem 6 (J = {:?}): prerequisite = {}, conditions = {:?}, pass = {}",
                self.j, t.prerequisite, t.conditions, t.pass
            );
        }
        if let Some(t) = &self.theorem7 {
            let _ = writeln!(
                out,
                "theorem 7: hurwitz = {:?}, dim(K1 ∩ K2) = {}, pass = {}",
                t.hurwitz, t.k_intersection_dim, t.pass
            );
        }
        if let Some(p) = &self.planar {
            let _ = writeln!(
                out,
                "planar: hypotheses = {}, classes = {:?}, very particular = {:?}, certified = {}",
                p.hypotheses_ok, p.classes, p.very_particular, p.certified
            );
        }
        let _ = writeln!(
            out,
            "conclusion: {} ({})",
            self.conclusion.statement, self.conclusion.cited
        );
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuEstimateJson {
    pub matrix: Vec<Vec<f64>>,
    pub rank: usize,
    pub horizon_used: f64,
    pub gram_residual: f64,
    pub converged: bool,
    pub checkpoint_times: Vec<f64>,
}

impl SuEstimateJson {
    pub fn from(e: &SuEstimate) -> Self {
        SuEstimateJson {
            matrix: matrix_to_rows(&e.matrix),
            rank: e.rank,
            horizon_used: e.horizon_used,
            gram_residual: e.gram_residual,
            converged: e.converged,
            checkpoint_times: e.gram_checkpoints.iter().map(|(t, _)| *t).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexClassificationJson {
    pub index: usize,
    pub h_holds: bool,
    pub recurrent_dwell: f64,
    pub occupancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationJson {
    pub per_index: Vec<IndexClassificationJson>,
    pub chaotic: String,
    pub regular: String,
    pub j_estimate: Vec<usize>,
    pub horizon: f64,
}

impl ClassificationJson {
    pub fn from(c: &SignalClassification) -> Self {
        ClassificationJson {
            per_index: c
                .per_index
                .iter()
                .enumerate()
                .map(|(index, ic)| IndexClassificationJson {
                    index,
                    h_holds: ic.h_holds,
                    recurrent_dwell: ic.recurrent_dwell,
                    occupancy: ic.occupancy,
                })
                .collect(),
            chaotic: match c.chaotic {
                ChaoticVerdict::Chaotic => "chaotic",
                ChaoticVerdict::NonChaotic => "non_chaotic",
                ChaoticVerdict::UndecidableFromPrefix => "undecidable_from_prefix",
            }
            .to_string(),
            regular: match c.regular {
                RegularVerdict::Regular => "regular",
                RegularVerdict::NotRegular => "not_regular",
                RegularVerdict::UndecidableFromPrefix => "undecidable_from_prefix",
            }
            .to_string(),
            j_estimate: c.j_estimate.clone(),
            horizon: c.horizon,
        }
    }
}

/// Combined output of the `report` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinedReportJson {
    pub analysis: StabilityReportJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<ClassificationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub su: Option<SuEstimateJson>,
}

/// Writes `bytes` atomically: write to a sibling `.tmp` file, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot rename {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Renders a trajectory record as CSV with the columns
/// `t, norm_x, gram_eig_1..gram_eig_d, active_index`.
pub fn trajectory_csv(record: &FlowRecord, d: usize) -> String {
    let mut out = String::from("t,norm_x");
    for k in 1..=d {
        let _ = write!(out, ",gram_eig_{k}");
    }
    out.push_str(",active_index\n");
    for (row, &t) in record.times.iter().enumerate() {
        let _ = write!(out, "{t}");
        let norm = record.norms.first().map_or(0.0, |n| n[row]);
        let _ = write!(out, ",{norm}");
        let mut eigs: Vec<f64> = record.grams[row]
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for e in eigs {
            let _ = write!(out, ",{e}");
        }
        let _ = writeln!(out, ",{}", record.active[row]);
    }
    out
}
