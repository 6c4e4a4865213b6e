//! Stability analysis of linear switched systems `ẋ = B_{u(t)} x` whose
//! subsystems share a common, possibly non-strict, quadratic Lyapunov
//! function.
//!
//! Under the normalized hypothesis `B_iᵀ + B_i ⪯ 0` the flow
//! `Φ_u(t) = e^{(t−a_n)B_{u_n}} ⋯ e^{δ_0 B_{u_0}}` is a contraction for
//! every switching signal `u`, and the Gram matrix `Φ_u(t)ᵀΦ_u(t)` decreases
//! to a limit `S_u²`. The switched system is asymptotically stable for the
//! input `u` if and only if `S_u = 0`.
//!
//! The crate provides:
//!
//! - [`linalg`]: dense matrix primitives (exponential, polar decomposition,
//!   symmetric square root, nullspace) and orthonormal [`Subspace`] algebra;
//! - [`analysis`]: Lyapunov-hypothesis checking, normalization to `P = I`,
//!   and the invariant-subspace decomposition `𝒱_i ⊆ 𝒦_i` of each mode;
//! - [`signal`]: switching-signal construction (explicit, periodic,
//!   average-dwell, random-dwell, chaotic) and classification;
//! - [`sim`]: flow evaluation, `S_u` estimation, and empirical limit-set
//!   sampling;
//! - [`criteria`]: exact geometric stability certificates (Condition (C),
//!   dimension conditions, Hurwitz pairs, planar classification).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod config;
pub mod criteria;
pub mod error;
pub mod linalg;
pub mod signal;
pub mod sim;
pub mod subspace;

pub use analysis::{MatrixAnalysis, SwitchedSystem};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use signal::{SignalClassification, SwitchingSignal};
pub use sim::{FlowRecord, OmegaSample, SuEstimate};
pub use subspace::Subspace;
