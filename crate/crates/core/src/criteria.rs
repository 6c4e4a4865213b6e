//! Exact (non-simulation) stability certificates.
//!
//! Condition (C) is evaluated in projective form: each nonzero `𝒱_i`
//! projects to a closed connected subset of projective space, two of them
//! meet iff `𝒱_i ∩ 𝒱_j ≠ {0}`, and the connected components of the union
//! are exactly the chain-equivalence classes of the pairwise-intersection
//! graph. The sphere formulation is equivalent by antipodal symmetry, and
//! the graph form is exact and tolerance-robust: only pairwise
//! intersection dimensions enter.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{
    self, analyze_system, check_common_lyapunov, compute_k, normalize_system, MatrixAnalysis,
    SwitchedSystem,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;

/// Pairwise-intersection graph of a family of subspaces in projective
/// space. Zero-dimensional subspaces have empty sphere trace and carry no
/// edges.
#[derive(Debug, Clone)]
pub struct IntersectionGraph {
    /// Dimension of each subspace, indexed by node.
    pub dims: Vec<usize>,
    /// Pairs `(i, j)` with `i < j` and `dim(V_i ∩ V_j) ≥ 1`.
    pub edges: Vec<(usize, usize)>,
    /// Connected components, each a sorted index set; together they
    /// partition the node set.
    pub components: Vec<Vec<usize>>,
    /// Nodes with `dim = 0`.
    pub zero_nodes: Vec<usize>,
}

fn check_common_ambient(subspaces: &[Subspace]) -> Result<usize> {
    let first = subspaces
        .first()
        .ok_or_else(|| Error::invalid("subspace list must be nonempty"))?;
    let d = first.ambient_dim();
    for s in subspaces {
        if s.ambient_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.ambient_dim(),
            });
        }
    }
    Ok(d)
}

/// Builds the intersection graph of the family.
pub fn intersection_graph(subspaces: &[Subspace]) -> Result<IntersectionGraph> {
    check_common_ambient(subspaces)?;
    let p = subspaces.len();
    let dims: Vec<usize> = subspaces.iter().map(|s| s.dim()).collect();
    let zero_nodes: Vec<usize> = (0..p).filter(|&i| dims[i] == 0).collect();

    let mut edges = Vec::new();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut i = i;
        while parent[i] != r {
            let next = parent[i];
            parent[i] = r;
            i = next;
        }
        r
    }
    for i in 0..p {
        for j in i + 1..p {
            if dims[i] == 0 || dims[j] == 0 {
                continue;
            }
            if subspaces[i].intersect(&subspaces[j])?.dim() >= 1 {
                edges.push((i, j));
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }

    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; p];
    for i in 0..p {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(slot) => components[slot].push(i),
            None => {
                root_slot[r] = Some(components.len());
                components.push(vec![i]);
            }
        }
    }
    Ok(IntersectionGraph {
        dims,
        edges,
        components,
        zero_nodes,
    })
}

/// Verdict of Condition (C): no connected component of the union of the
/// (projectivized) `𝒱_i` meets every `𝒱_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionC {
    Holds,
    /// The witness component, touching every subspace.
    Fails { component: Vec<usize> },
}

impl ConditionC {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionC::Holds)
    }
}

/// Condition (C) over the family. Holds iff some subspace is `{0}` (its
/// sphere trace is empty, so no component can meet all of them) or the
/// intersection graph is disconnected.
pub fn condition_c(subspaces: &[Subspace]) -> Result<ConditionC> {
    let graph = intersection_graph(subspaces)?;
    if !graph.zero_nodes.is_empty() {
        return Ok(ConditionC::Holds);
    }
    if graph.components.len() == 1 {
        return Ok(ConditionC::Fails {
            component: graph.components[0].clone(),
        });
    }
    Ok(ConditionC::Holds)
}

/// Per-condition outcome of the dimension criteria guaranteeing
/// asymptotic stability for every regular input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionVerdict {
    /// `⋂ V_i = {0}`.
    pub prerequisite: bool,
    /// Which of the four sufficient conditions hold, in statement order.
    pub conditions: [bool; 4],
    /// Prerequisite plus at least one condition.
    pub pass: bool,
}

impl DimensionVerdict {
    fn assemble(prerequisite: bool, conditions: [bool; 4]) -> Self {
        DimensionVerdict {
            prerequisite,
            conditions,
            pass: prerequisite && conditions.iter().any(|&c| c),
        }
    }
}

fn intersection_of_all(subspaces: &[Subspace]) -> Result<Subspace> {
    let mut acc = subspaces[0].clone();
    for s in &subspaces[1..] {
        acc = acc.intersect(s)?;
        if acc.dim() == 0 {
            break;
        }
    }
    Ok(acc)
}

fn sum_of_all(subspaces: &[Subspace]) -> Result<Subspace> {
    let mut acc = subspaces[0].clone();
    for s in &subspaces[1..] {
        acc = acc.sum(s)?;
    }
    Ok(acc)
}

/// Some subspace is one-dimensional and contained in no other member of
/// the family.
fn has_free_line(subspaces: &[Subspace]) -> bool {
    subspaces.iter().enumerate().any(|(i, s)| {
        s.dim() == 1
            && subspaces
                .iter()
                .enumerate()
                .all(|(j, t)| j == i || !s.is_subset_of(t, 1e-9))
    })
}

/// `dim(Σ V_i) > Σ dim V_i − p + 1`.
fn dimension_sum_condition(subspaces: &[Subspace]) -> Result<bool> {
    let p = subspaces.len();
    let total: usize = subspaces.iter().map(|s| s.dim()).sum();
    let sum_dim = sum_of_all(subspaces)?.dim();
    Ok(sum_dim + p > total + 1)
}

/// Sufficient dimension conditions over the `𝒱_i`: with `⋂𝒱_i = {0}`,
/// any of
/// (1) some `dim 𝒱_i = 0`,
/// (2) some `dim 𝒱_i = 1` contained in no other `𝒱_j`,
/// (3) `p = 2`,
/// (4) `dim(Σ𝒱_i) > Σ dim 𝒱_i − p + 1`
/// implies asymptotic stability for every regular input.
pub fn theorem4_check(subspaces: &[Subspace]) -> Result<DimensionVerdict> {
    check_common_ambient(subspaces)?;
    let prerequisite = intersection_of_all(subspaces)?.dim() == 0;
    let conditions = [
        subspaces.iter().any(|s| s.dim() == 0),
        has_free_line(subspaces),
        subspaces.len() == 2,
        dimension_sum_condition(subspaces)?,
    ];
    Ok(DimensionVerdict::assemble(prerequisite, conditions))
}

/// The analogue of [`theorem4_check`] over `{𝒦_i : i ∈ J}`: with
/// `⋂_{i∈J}𝒦_i = {0}`, any of
/// (1) `|J| = 2`,
/// (2) `dim(Σ𝒦_i) > Σ dim 𝒦_i − |J| + 1`,
/// (3) some `dim 𝒦_i = 0`,
/// (4) some `dim 𝒦_i = 1` contained in no other `𝒦_j`, `j ∈ J`,
/// certifies asymptotic stability for any input whose infinite-occupancy
/// set is `J` — chaotic inputs included.
pub fn theorem6_check(k_subspaces: &[Subspace], j: &[usize]) -> Result<DimensionVerdict> {
    if j.is_empty() {
        return Err(Error::invalid("index set J must be nonempty"));
    }
    let mut selected = Vec::with_capacity(j.len());
    for &i in j {
        let s = k_subspaces
            .get(i)
            .ok_or_else(|| Error::invalid("index in J out of range"))?;
        selected.push(s.clone());
    }
    check_common_ambient(&selected)?;
    let prerequisite = intersection_of_all(&selected)?.dim() == 0;
    let conditions = [
        selected.len() == 2,
        dimension_sum_condition(&selected)?,
        selected.iter().any(|s| s.dim() == 0),
        has_free_line(&selected),
    ];
    Ok(DimensionVerdict::assemble(prerequisite, conditions))
}

/// Outcome of the two-mode Hurwitz-pair certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem7Verdict {
    /// Spectral abscissa of each normalized mode; both must be below
    /// `−spectral_margin`.
    pub abscissas: [f64; 2],
    pub hurwitz: [bool; 2],
    pub lyapunov_ok: bool,
    pub k_intersection_dim: usize,
    /// Pass certifies asymptotic stability for ANY input.
    pub pass: bool,
}

/// Hurwitz-pair test for `p = 2`: both (normalized) modes Hurwitz, the
/// common Lyapunov condition, and `𝒦₁ ∩ 𝒦₂ = {0}`. A failed prerequisite
/// is inconclusive, never a claim of instability.
pub fn theorem7_pair_check(system: &SwitchedSystem, tol: &Tolerances) -> Result<Theorem7Verdict> {
    if system.num_modes() != 2 {
        return Err(Error::NotApplicable("theorem7 requires exactly two modes"));
    }
    let normalized = normalize_system(system)?;
    let abscissas = [
        linalg::spectral_abscissa(normalized.matrix(0)),
        linalg::spectral_abscissa(normalized.matrix(1)),
    ];
    let hurwitz = [
        abscissas[0] < -tol.spectral_margin,
        abscissas[1] < -tol.spectral_margin,
    ];
    let lyapunov_ok = check_common_lyapunov(&normalized, tol).passed();
    let k1 = compute_k(normalized.matrix(0), tol.rank_rel)?;
    let k2 = compute_k(normalized.matrix(1), tol.rank_rel)?;
    let k_intersection_dim = k1.intersect(&k2)?.dim();
    Ok(Theorem7Verdict {
        abscissas,
        hurwitz,
        lyapunov_ok,
        k_intersection_dim,
        pass: hurwitz[0] && hurwitz[1] && lyapunov_ok && k_intersection_dim == 0,
    })
}

/// Planar class of a single mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanarClass {
    /// `dim 𝒱 = 1`: eigenvalues `{0, α < 0}` and `𝒦 = 𝒱`.
    ZeroAndNegative,
    /// `dim 𝒱 = 0`: Hurwitz, with `dim 𝒦 ∈ {0, 1}`.
    Hurwitz { k_dim: usize },
    /// Spectral/kernel data inconsistent with the planar dichotomy (only
    /// reachable through numerically borderline input).
    Inconsistent,
}

/// Planar (`d = 2`) classification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarReport {
    /// `⋂𝒱_i = {0}` and `dim 𝒱_i ≤ 1` for all `i`.
    pub hypotheses_ok: bool,
    pub classes: Vec<PlanarClass>,
    /// Witness `i₀` of the very particular case: `dim 𝒱_{i₀} = 0`,
    /// `dim 𝒦_{i₀} = 1`, and every `𝒦_i` equals `𝒦_{i₀}`.
    pub very_particular: Option<usize>,
    /// Stability for every well-distributed input (`m{u=i} = ∞` for all
    /// `i`), chaotic or not.
    pub certified: bool,
}

/// Classifies a planar family: under the hypotheses, stability for all
/// well-distributed inputs holds except in the very particular case of a
/// Hurwitz mode whose one-dimensional `𝒦` is shared by every mode.
pub fn planar_classify(
    system: &SwitchedSystem,
    analyses: &[MatrixAnalysis],
    tol: &Tolerances,
) -> Result<PlanarReport> {
    if system.dim() != 2 {
        return Err(Error::NotApplicable("planar classification requires d = 2"));
    }
    if analyses.len() != system.num_modes() {
        return Err(Error::invalid("one analysis per mode required"));
    }
    let vs: Vec<Subspace> = analyses.iter().map(|a| a.v.clone()).collect();
    let hypotheses_ok =
        vs.iter().all(|v| v.dim() <= 1) && intersection_of_all(&vs)?.dim() == 0;

    let classes: Vec<PlanarClass> = analyses
        .iter()
        .map(|a| {
            let b = system.matrix(a.index);
            match a.v.dim() {
                1 => {
                    let eigs = b.clone().complex_eigenvalues();
                    let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
                    re.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    let spectrum_ok = re[0] < -tol.spectral_margin
                        && re[1].abs() <= tol.spectral_margin
                        && eigs.iter().all(|z| z.im.abs() <= tol.spectral_margin);
                    let k_equals_v = a.k.dim() == 1 && a.v.is_subset_of(&a.k, 1e-9);
                    if spectrum_ok && k_equals_v {
                        PlanarClass::ZeroAndNegative
                    } else {
                        PlanarClass::Inconsistent
                    }
                }
                0 => {
                    if a.is_hurwitz && a.k.dim() <= 1 {
                        PlanarClass::Hurwitz { k_dim: a.k.dim() }
                    } else {
                        PlanarClass::Inconsistent
                    }
                }
                _ => PlanarClass::Inconsistent,
            }
        })
        .collect();

    let very_particular = analyses
        .iter()
        .find(|a0| {
            a0.v.dim() == 0
                && a0.k.dim() == 1
                && analyses
                    .iter()
                    .all(|a| a.k.dim() == 1 && a0.k.is_subset_of(&a.k, 1e-9))
        })
        .map(|a0| a0.index);

    let consistent = classes.iter().all(|c| *c != PlanarClass::Inconsistent);
    Ok(PlanarReport {
        hypotheses_ok,
        classes,
        very_particular,
        certified: hypotheses_ok && consistent && very_particular.is_none(),
    })
}

/// The strongest statement a report is entitled to make.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statement {
    /// The common-Lyapunov hypothesis failed; nothing else applies.
    LyapunovFailed,
    /// Asymptotically stable for any input.
    AnyInput,
    /// Asymptotically stable for any input with the given infinite-
    /// occupancy set `J`.
    AnyInputWithJ,
    /// Asymptotically stable for every well-distributed input.
    WellDistributed,
    /// Asymptotically stable for every regular input.
    RegularInputs,
    Inconclusive,
}

/// Conclusion with the single theorem it cites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conclusion {
    pub statement: Statement,
    pub cited: &'static str,
}

/// Aggregated certificate report.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub lyapunov_ok: bool,
    /// `(index, λ_max(B̃ᵀ+B̃))` of the first offending mode when the
    /// Lyapunov check fails.
    pub lyapunov_witness: Option<(usize, f64)>,
    pub per_matrix: Vec<MatrixAnalysis>,
    pub condition_c: Option<ConditionC>,
    pub theorem4: Option<DimensionVerdict>,
    /// The index set the Theorem 6 verdict was evaluated over.
    pub j: Vec<usize>,
    pub theorem6: Option<DimensionVerdict>,
    pub theorem7: Option<Theorem7Verdict>,
    pub planar: Option<PlanarReport>,
    pub conclusion: Conclusion,
}

/// Runs every applicable certificate on the system and assembles the
/// strongest supported conclusion (any-input beats regular-input; exactly
/// one theorem is cited). `j` defaults to all mode indices.
pub fn full_report(
    system: &SwitchedSystem,
    tol: &Tolerances,
    j: Option<&[usize]>,
) -> Result<StabilityReport> {
    let normalized = normalize_system(system)?;
    let verdict = check_common_lyapunov(&normalized, tol);
    if let analysis::LyapunovVerdict::Fail { index, max_eig } = verdict {
        return Ok(StabilityReport {
            lyapunov_ok: false,
            lyapunov_witness: Some((index, max_eig)),
            per_matrix: Vec::new(),
            condition_c: None,
            theorem4: None,
            j: Vec::new(),
            theorem6: None,
            theorem7: None,
            planar: None,
            conclusion: Conclusion {
                statement: Statement::LyapunovFailed,
                cited: "common Lyapunov hypothesis",
            },
        });
    }

    let per_matrix = analyze_system(&normalized, tol)?;
    let vs: Vec<Subspace> = per_matrix.iter().map(|a| a.v.clone()).collect();
    let ks: Vec<Subspace> = per_matrix.iter().map(|a| a.k.clone()).collect();
    let j: Vec<usize> = match j {
        Some(j) => j.to_vec(),
        None => (0..normalized.num_modes()).collect(),
    };

    let condition_c_verdict = condition_c(&vs)?;
    let theorem4 = theorem4_check(&vs)?;
    let theorem6 = theorem6_check(&ks, &j)?;
    let theorem7 = if normalized.num_modes() == 2 {
        Some(theorem7_pair_check(&normalized, tol)?)
    } else {
        None
    };
    let planar = if normalized.dim() == 2 {
        Some(planar_classify(&normalized, &per_matrix, tol)?)
    } else {
        None
    };

    let conclusion = if theorem7.as_ref().is_some_and(|t| t.pass) {
        Conclusion {
            statement: Statement::AnyInput,
            cited: "Theorem 7",
        }
    } else if theorem6.pass {
        Conclusion {
            statement: Statement::AnyInputWithJ,
            cited: "Theorem 6",
        }
    } else if planar.as_ref().is_some_and(|p| p.certified) {
        Conclusion {
            statement: Statement::WellDistributed,
            cited: "planar classification",
        }
    } else if theorem4.pass {
        Conclusion {
            statement: Statement::RegularInputs,
            cited: "Theorem 4",
        }
    } else if condition_c_verdict.holds() {
        Conclusion {
            statement: Statement::RegularInputs,
            cited: "Theorem 3",
        }
    } else {
        Conclusion {
            statement: Statement::Inconclusive,
            cited: "none",
        }
    };

    Ok(StabilityReport {
        lyapunov_ok: true,
        lyapunov_witness: None,
        per_matrix,
        condition_c: Some(condition_c_verdict),
        theorem4: Some(theorem4),
        j,
        theorem6: Some(theorem6),
        theorem7,
        planar,
        conclusion,
    })
}
