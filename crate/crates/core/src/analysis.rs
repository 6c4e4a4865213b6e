//! Common-Lyapunov validation, normalization to `P = I`, and the
//! invariant-subspace decomposition of each mode.
//!
//! For a single matrix with `Bᵀ + B ⪯ 0`, the set
//! `𝒱 = {x : ‖e^{tB}x‖ = ‖x‖ ∀t}` is the largest `B`-invariant subspace of
//! `𝒦 = ker(Bᵀ + B)`; the restriction of `B` to `𝒱` is skew-symmetric and
//! its restriction to `𝒱⊥` is Hurwitz. `𝒱` is computed by the fixpoint
//! iteration `W₀ = 𝒦`, `W_{j+1} = W_j ∩ B⁻¹(W_j)`, which stabilizes in at
//! most `d` steps.

use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::subspace::Subspace;

/// A finite family of modes sharing a quadratic Lyapunov function.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem {
    dim: usize,
    matrices: Vec<Matrix>,
    lyapunov: Option<Matrix>,
    normalized: bool,
    lipschitz: f64,
}

impl SwitchedSystem {
    /// Builds a system from the mode matrices and an optional Lyapunov
    /// matrix `P` (identity when absent).
    pub fn new(matrices: Vec<Matrix>, lyapunov: Option<Matrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::invalid("at least one mode matrix is required"));
        }
        let dim = matrices[0].nrows();
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        for m in &matrices {
            linalg::check_finite(m, "mode matrix")?;
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        if let Some(p) = &lyapunov {
            linalg::check_finite(p, "Lyapunov matrix")?;
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.nrows(),
                });
            }
            let asym = linalg::op_norm(&(p - p.transpose()));
            if asym > 1e-10 * (1.0 + linalg::op_norm(p)) {
                return Err(Error::NotSymmetric { residual: asym });
            }
            let min_eig = linalg::sym_eigenvalues(p)[0];
            if min_eig <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eig });
            }
        }
        let lipschitz = matrices.iter().map(linalg::op_norm).fold(0.0, f64::max);
        let normalized = lyapunov.is_none()
            || lyapunov
                .as_ref()
                .map(|p| linalg::op_norm(&(p - Matrix::identity(dim, dim))) <= 1e-12)
                .unwrap_or(false);
        Ok(SwitchedSystem {
            dim,
            matrices,
            lyapunov,
            normalized,
            lipschitz,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_modes(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &Matrix {
        &self.matrices[i]
    }

    pub fn lyapunov(&self) -> Option<&Matrix> {
        self.lyapunov.as_ref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `λ = max_i ‖B_i‖`, the Lipschitz constant of the flow.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Outcome of the common-Lyapunov test.
#[derive(Debug, Clone, PartialEq)]
pub enum LyapunovVerdict {
    Pass,
    /// First offending mode and the largest eigenvalue of `B̃ᵀ + B̃`.
    Fail { index: usize, max_eig: f64 },
}

impl LyapunovVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, LyapunovVerdict::Pass)
    }
}

/// Checks `λ_max(B̃_iᵀ + B̃_i) ≤ margin` for every mode of the normalized
/// system (normalize first when `P ≠ I`).
pub fn check_common_lyapunov(system: &SwitchedSystem, tol: &Tolerances) -> LyapunovVerdict {
    for (i, b) in system.matrices.iter().enumerate() {
        let max_eig = linalg::sym_max_eigenvalue(&(b + b.transpose()));
        if max_eig > tol.spectral_margin {
            return LyapunovVerdict::Fail { index: i, max_eig };
        }
    }
    LyapunovVerdict::Pass
}

/// Changes coordinates by the symmetric square root of `P`:
/// `B̃_i = P^{1/2} B_i P^{−1/2}`, after which the Lyapunov matrix is the
/// identity. The congruence preserves spectra and transports
/// `B_iᵀP + PB_i ⪯ 0` to `B̃_iᵀ + B̃_i ⪯ 0`.
pub fn normalize_system(system: &SwitchedSystem) -> Result<SwitchedSystem> {
    let p = match &system.lyapunov {
        None => return Ok(system.clone()),
        Some(p) => p,
    };
    let d = system.dim;
    if linalg::op_norm(&(p - Matrix::identity(d, d))) <= 1e-12 {
        let mut out = system.clone();
        out.lyapunov = None;
        out.normalized = true;
        return Ok(out);
    }
    let p_half = linalg::sym_sqrt(p)?;
    let p_half_inv = p_half
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?;
    let matrices: Vec<Matrix> = system
        .matrices
        .iter()
        .map(|b| &p_half * b * &p_half_inv)
        .collect();
    SwitchedSystem::new(matrices, None)
}

/// Preimage subspace `B⁻¹(W) = {x : Bx ∈ W}`, computed as the nullspace of
/// `(I − P_W)·B` so that singular `B` needs no inversion.
fn preimage(b: &Matrix, w: &Subspace, rank_rel: f64) -> Result<Subspace> {
    let d = b.nrows();
    let a = (Matrix::identity(d, d) - w.projector()) * b;
    linalg::nullspace(&a, rank_rel)
}

/// `𝒦 = ker(Bᵀ + B)`: the instantaneous-norm-stationary directions.
pub fn compute_k(b: &Matrix, rank_rel: f64) -> Result<Subspace> {
    linalg::check_finite(b, "mode matrix")?;
    linalg::nullspace(&(b + b.transpose()), rank_rel)
}

/// `𝒱`, the largest `B`-invariant subspace of `ker(Bᵀ + B)`, by fixpoint
/// iteration. Requires `Bᵀ + B ⪯ 0` (to the spectral margin).
pub fn compute_v(b: &Matrix, tol: &Tolerances) -> Result<Subspace> {
    linalg::check_finite(b, "mode matrix")?;
    let max_eig = linalg::sym_max_eigenvalue(&(b + b.transpose()));
    if max_eig > tol.spectral_margin {
        return Err(Error::NotPsd { min_eig: -max_eig });
    }
    let mut w = linalg::nullspace(&(b + b.transpose()), tol.rank_rel)?;
    // Each strict step loses at least one dimension, so d steps suffice.
    for _ in 0..b.nrows() {
        if w.dim() == 0 {
            break;
        }
        let next = w.intersect(&preimage(b, &w, tol.rank_rel)?)?;
        if next.dim() == w.dim() {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// Per-mode decomposition data.
#[derive(Debug, Clone)]
pub struct MatrixAnalysis {
    pub index: usize,
    /// `𝒱_i`: norm-preserving subspace.
    pub v: Subspace,
    /// `𝒦_i = ker(B_iᵀ + B_i)`.
    pub k: Subspace,
    pub is_hurwitz: bool,
    /// Norm of the symmetric part of the restriction of `B` to `𝒱`.
    pub skew_residual: f64,
    /// Largest eigenvalue real part of the restriction of `B` to `𝒱⊥`
    /// (`−∞` when `𝒱 = ℝ^d`).
    pub complement_spectral_abscissa: f64,
}

/// Restriction `QᵀBQ` of `B` to the subspace with orthonormal basis `Q`.
pub fn restrict(b: &Matrix, s: &Subspace) -> Matrix {
    s.basis().transpose() * b * s.basis()
}

/// Bundles `compute_v`, `compute_k`, the Hurwitz test on the `𝒱⊥`
/// restriction, and the skew residual on the `𝒱` restriction.
pub fn analyze_matrix(index: usize, b: &Matrix, tol: &Tolerances) -> Result<MatrixAnalysis> {
    let v = compute_v(b, tol)?;
    let k = compute_k(b, tol.rank_rel)?;
    let restriction_v = restrict(b, &v);
    let skew_residual = if v.dim() == 0 {
        0.0
    } else {
        linalg::op_norm(&((&restriction_v + restriction_v.transpose()) * 0.5))
    };
    let complement = v.complement();
    let complement_spectral_abscissa = if complement.dim() == 0 {
        f64::NEG_INFINITY
    } else {
        linalg::spectral_abscissa(&restrict(b, &complement))
    };
    Ok(MatrixAnalysis {
        index,
        is_hurwitz: v.dim() == 0,
        v,
        k,
        skew_residual,
        complement_spectral_abscissa,
    })
}

/// Analyzes every mode of a normalized system.
pub fn analyze_system(system: &SwitchedSystem, tol: &Tolerances) -> Result<Vec<MatrixAnalysis>> {
    system
        .matrices
        .iter()
        .enumerate()
        .map(|(i, b)| analyze_matrix(i, b, tol))
        .collect()
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use alloc::vec;

    /// The worked three-dimensional example: modes with
    /// `𝒱₁ = {x=0}`, `𝒱₂ = span{e₃}`, `𝒱₃ = span{e₂}`.
    pub fn example_system() -> SwitchedSystem {
        let b1 = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        let b2 = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let b3 = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        SwitchedSystem::new(vec![b1, b2, b3], None).unwrap()
    }

    /// Random matrix with `B + Bᵀ = −2GᵀG ⪯ 0`: skew part plus a negative
    /// semidefinite symmetric part.
    pub fn random_lyapunov_matrix(d: usize, rng: &mut impl rand::Rng) -> Matrix {
        let g = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let a = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let skew = (&a - a.transpose()) * 0.5;
        skew - g.transpose() * &g
    }

    /// Like `random_lyapunov_matrix` but with a nontrivial `𝒱`: the
    /// symmetric part annihilates a rotation-invariant plane.
    pub fn random_matrix_with_v(d: usize, v_dim: usize, rng: &mut impl rand::Rng) -> Matrix {
        use crate::linalg::tests::random_orthogonal;
        assert!(v_dim <= d);
        // Block diagonal in a random orthogonal frame: skew on the first
        // v_dim coordinates, Hurwitz with negative definite symmetric part
        // on the rest.
        let mut block = Matrix::zeros(d, d);
        let skew_small = {
            let a = Matrix::from_fn(v_dim, v_dim, |_, _| rng.gen_range(-1.0..1.0));
            (&a - a.transpose()) * 0.5
        };
        block.view_mut((0, 0), (v_dim, v_dim)).copy_from(&skew_small);
        let m = d - v_dim;
        if m > 0 {
            let g = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let hurwitz = (&a - a.transpose()) * 0.5 - g.transpose() * &g
                - Matrix::identity(m, m) * 0.05;
            block.view_mut((v_dim, v_dim), (m, m)).copy_from(&hurwitz);
        }
        let q = random_orthogonal(d, rng);
        &q * block * q.transpose()
    }
}
