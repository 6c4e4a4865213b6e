//! Centralized numerical tolerances.

/// Tolerance defaults used throughout the crate.
///
/// All rank decisions are relative to the largest singular value of the
/// matrix at hand; matrices are O(1) in norm once the system is normalized,
/// so relative and absolute thresholds coincide in practice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank and nullspace decisions.
    pub rank_rel: f64,
    /// Allowed asymmetry `‖A − Aᵀ‖` for matrices required to be symmetric.
    pub symmetry: f64,
    /// Margin for spectral tests: eigenvalues within `±spectral_margin` of
    /// zero are treated as on the boundary (never certified Hurwitz).
    pub spectral_margin: f64,
    /// Operator-norm tolerance for declaring Gram-matrix convergence.
    pub convergence: f64,
    /// Hard cap on simulation horizons when estimating `S_u`.
    pub horizon_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-9,
            symmetry: 1e-10,
            spectral_margin: 1e-9,
            convergence: 1e-8,
            horizon_cap: 1e4,
        }
    }
}
