//! Flow evaluation and limit-set estimation.
//!
//! The flow of the switched system is the left-ordered product of segment
//! exponentials
//! `Φ_u(t) = e^{(t−a_n)B_{u_n}} e^{δ_{n−1}B_{u_{n−1}}} ⋯ e^{δ_0 B_{u_0}}`.
//! For a normalized system it is a contraction; its Gram `Φᵀ Φ = S(t)²`
//! decreases (in Loewner order) to `S_u²`, and `S_u = 0` is equivalent to
//! asymptotic stability for the input at hand.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{MatrixAnalysis, SwitchedSystem};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::signal::{RegularVerdict, SignalClassification, SwitchingSignal};
use crate::subspace::Subspace;

/// Incremental flow evaluator: caches `Φ_u(a_n)` at every switching time it
/// has passed, so advancing time costs one exponential per new segment.
pub struct FlowSampler<'a> {
    system: &'a SwitchedSystem,
    /// `(start, end, mode)` segments covering `[0, horizon)`.
    segments: Vec<(f64, f64, usize)>,
    /// `Φ_u(start)` for each segment; grown on demand.
    at_segment_start: Vec<Matrix>,
}

impl<'a> FlowSampler<'a> {
    /// Prepares a sampler able to evaluate `Φ_u(t)` for `t ∈ [0, horizon]`.
    /// The signal prefix must already cover the horizon.
    pub fn new(
        system: &'a SwitchedSystem,
        signal: &SwitchingSignal,
        horizon: f64,
    ) -> Result<Self> {
        signal.check_compatible(system.num_modes())?;
        if horizon > signal.horizon() {
            return Err(Error::OutOfRange {
                t: horizon,
                horizon: signal.horizon(),
            });
        }
        let d = system.dim();
        let mut segments = signal.segments_until(horizon);
        if segments.is_empty() {
            // Degenerate horizon 0: a single zero-length segment.
            segments.push((0.0, horizon, signal.index_at(0.0)?));
        }
        Ok(FlowSampler {
            system,
            segments,
            at_segment_start: vec![Matrix::identity(d, d)],
        })
    }

    fn segment_for(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(Error::invalid("flow time must be nonnegative"));
        }
        let last = self.segments.last().expect("nonempty");
        if t > last.1 {
            return Err(Error::OutOfRange { t, horizon: last.1 });
        }
        let n = self
            .segments
            .partition_point(|&(start, _, _)| start <= t)
            .saturating_sub(1);
        Ok(n)
    }

    fn fill_cache_to(&mut self, n: usize) -> Result<()> {
        while self.at_segment_start.len() <= n {
            let k = self.at_segment_start.len() - 1;
            let (start, end, mode) = self.segments[k];
            let step = linalg::expm(self.system.matrix(mode), end - start)?;
            let next = &step * &self.at_segment_start[k];
            self.at_segment_start.push(next);
        }
        Ok(())
    }

    /// `Φ_u(t)`.
    pub fn at(&mut self, t: f64) -> Result<Matrix> {
        let n = self.segment_for(t)?;
        self.fill_cache_to(n)?;
        let (start, _, mode) = self.segments[n];
        Ok(linalg::expm(self.system.matrix(mode), t - start)? * &self.at_segment_start[n])
    }

    /// Active mode at `t` (clamped to the final segment at the horizon).
    pub fn mode_at(&self, t: f64) -> Result<usize> {
        Ok(self.segments[self.segment_for(t)?].2)
    }

    /// The switching times strictly inside `(0, horizon)`, with the mode
    /// active immediately after each.
    pub fn interior_switches(&self) -> Vec<(f64, usize)> {
        self.segments
            .iter()
            .skip(1)
            .map(|&(start, _, mode)| (start, mode))
            .collect()
    }
}

/// `Φ_u(t)` as a product of segment exponentials.
pub fn flow(system: &SwitchedSystem, signal: &mut SwitchingSignal, t: f64) -> Result<Matrix> {
    signal.ensure_horizon(t)?;
    FlowSampler::new(system, signal, t)?.at(t)
}

/// Sampled flow data along a uniform grid.
#[derive(Debug, Clone)]
pub struct FlowRecord {
    pub times: Vec<f64>,
    pub flows: Vec<Matrix>,
    /// `S(t)² = Φᵀ Φ` (symmetrized).
    pub grams: Vec<Matrix>,
    /// Orthogonal polar factors `O(t)`.
    pub orthogonal_factors: Vec<Matrix>,
    /// Active mode per grid point.
    pub active: Vec<usize>,
    /// Per tracked initial condition, the norms `‖Φ(t_j) x‖`.
    pub norms: Vec<Vec<f64>>,
}

/// Samples the flow on `steps + 1` uniform grid points over `[0, horizon]`.
pub fn record_flow(
    system: &SwitchedSystem,
    signal: &mut SwitchingSignal,
    horizon: f64,
    steps: usize,
    tracked: &[Vector],
) -> Result<FlowRecord> {
    if !(horizon >= 0.0) {
        return Err(Error::invalid("horizon must be nonnegative"));
    }
    for x in tracked {
        if x.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: x.len(),
            });
        }
    }
    signal.ensure_horizon(horizon)?;
    let mut sampler = FlowSampler::new(system, signal, horizon)?;
    let n = steps.max(1);
    let mut rec = FlowRecord {
        times: Vec::with_capacity(n + 1),
        flows: Vec::with_capacity(n + 1),
        grams: Vec::with_capacity(n + 1),
        orthogonal_factors: Vec::with_capacity(n + 1),
        active: Vec::with_capacity(n + 1),
        norms: vec![Vec::with_capacity(n + 1); tracked.len()],
    };
    for j in 0..=n {
        let t = if horizon == 0.0 {
            0.0
        } else {
            horizon * j as f64 / n as f64
        };
        let phi = sampler.at(t)?;
        let gram = linalg::symmetrize(&(phi.transpose() * &phi));
        let (o, _) = linalg::polar_decompose(&phi)?;
        rec.times.push(t);
        rec.active.push(sampler.mode_at(t)?);
        for (i, x) in tracked.iter().enumerate() {
            rec.norms[i].push((&phi * x).norm());
        }
        rec.grams.push(gram);
        rec.orthogonal_factors.push(o);
        rec.flows.push(phi);
        if horizon == 0.0 {
            break;
        }
    }
    Ok(rec)
}

/// Estimate of the limit `S_u` of the symmetric polar factor.
#[derive(Debug, Clone)]
pub struct SuEstimate {
    /// The estimated `S_u` (symmetric PSD).
    pub matrix: Matrix,
    /// Rank of the estimate at the absolute threshold `1e-6`.
    pub rank: usize,
    pub horizon_used: f64,
    /// Operator-norm difference of the final two checkpoint Grams.
    pub gram_residual: f64,
    pub converged: bool,
    /// `(t, S(t)²)` at the geometric checkpoints, for diagnostics.
    pub gram_checkpoints: Vec<(f64, Matrix)>,
}

/// Singular-value threshold below which directions of `S_u` count as zero.
pub const SU_RANK_TOL: f64 = 1e-6;

/// Estimates `S_u` by driving the Gram `S(t)²` along geometric checkpoints
/// `t₀, 2t₀, 4t₀, …` until two consecutive checkpoints agree to
/// `tol.convergence` in operator norm, or the horizon cap is hit.
///
/// Non-convergence is reported through `converged = false`, never as an
/// error.
pub fn estimate_su(
    system: &SwitchedSystem,
    signal: &mut SwitchingSignal,
    max_horizon: f64,
    tol: &Tolerances,
) -> Result<SuEstimate> {
    let horizon = max_horizon.min(tol.horizon_cap);
    if !(horizon > 0.0) {
        return Err(Error::invalid("estimation horizon must be positive"));
    }
    signal.ensure_horizon(horizon)?;
    let mut sampler = FlowSampler::new(system, signal, horizon)?;

    let mut checkpoints = Vec::new();
    let mut t = 1.0_f64.min(horizon);
    loop {
        checkpoints.push(t);
        if t >= horizon {
            break;
        }
        t = (t * 2.0).min(horizon);
    }

    let mut grams: Vec<(f64, Matrix)> = Vec::new();
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut used = *checkpoints.last().unwrap();
    for &t in &checkpoints {
        let phi = sampler.at(t)?;
        let gram = linalg::symmetrize(&(phi.transpose() * &phi));
        if let Some((_, prev)) = grams.last() {
            residual = linalg::op_norm(&(&gram - prev));
            if residual <= tol.convergence {
                grams.push((t, gram));
                converged = true;
                used = t;
                break;
            }
        }
        grams.push((t, gram));
    }

    let final_gram = grams.last().unwrap().1.clone();
    let matrix = linalg::sym_sqrt(&final_gram)?;
    let rank = matrix
        .clone()
        .singular_values()
        .iter()
        .filter(|&&s| s > SU_RANK_TOL)
        .count();
    Ok(SuEstimate {
        matrix,
        rank,
        horizon_used: used,
        gram_residual: residual,
        converged,
        gram_checkpoints: grams,
    })
}

/// Verifies the integral identity
/// `S(T)² = I + ∫₀ᵀ Φᵀ(s)(B_{u(s)}ᵀ + B_{u(s)})Φ(s) ds`
/// by independent per-segment adaptive Simpson quadrature, returning the
/// operator-norm residual between the two sides.
pub fn su_integral_check(
    system: &SwitchedSystem,
    signal: &mut SwitchingSignal,
    horizon: f64,
) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(Error::invalid("horizon must be nonnegative"));
    }
    let d = system.dim();
    if horizon == 0.0 {
        return Ok(0.0);
    }
    signal.ensure_horizon(horizon)?;
    let mut sampler = FlowSampler::new(system, signal, horizon)?;
    let segments = signal.segments_until(horizon);

    let mut integral = Matrix::zeros(d, d);
    for (start, end, mode) in segments {
        let sym_part = system.matrix(mode) + system.matrix(mode).transpose();
        let mut f = |s: f64| -> Result<Matrix> {
            let phi = sampler.at(s)?;
            Ok(phi.transpose() * &sym_part * &phi)
        };
        let fa = f(start)?;
        let fb = f(end)?;
        integral += adaptive_simpson(&mut f, start, end, fa, fb, 1e-10 * (end - start), 24)?;
    }

    let phi_t = sampler.at(horizon)?;
    let gram = phi_t.transpose() * &phi_t;
    Ok(linalg::op_norm(
        &(Matrix::identity(d, d) + integral - gram),
    ))
}

fn adaptive_simpson<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: Matrix,
    fb: Matrix,
    tol: f64,
    depth: u32,
) -> Result<Matrix>
where
    F: FnMut(f64) -> Result<Matrix>,
{
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    simpson_step(f, a, b, &fa, &fm, &fb, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: &Matrix,
    fm: &Matrix,
    fb: &Matrix,
    tol: f64,
    depth: u32,
) -> Result<Matrix>
where
    F: FnMut(f64) -> Result<Matrix>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let h = b - a;
    let whole = (fa + fm * 4.0 + fb) * (h / 6.0);
    let left = (fa + &flm * 4.0 + fm) * (h / 12.0);
    let right = (fm + &frm * 4.0 + fb) * (h / 12.0);
    let refined = &left + &right;
    let err = (&refined - &whole).norm();
    if depth == 0 || err <= 15.0 * tol {
        return Ok(&refined + (&refined - &whole) / 15.0);
    }
    let l = simpson_step(f, a, m, fa, &flm, fm, tol * 0.5, depth - 1)?;
    let r = simpson_step(f, m, b, fm, &frm, fb, tol * 0.5, depth - 1)?;
    Ok(l + r)
}

/// Empirical samples of the limit sets `Ω_u`, `ω_u`, and `𝒪_u`.
#[derive(Debug, Clone)]
pub struct OmegaSample {
    /// Tracked initial condition.
    pub x0: Vector,
    /// Late general samples `(t, Φ_u(t))`.
    pub matrix_points: Vec<(f64, Matrix)>,
    /// Late switch-time samples `(mode active after the switch, a_n,
    /// Φ_u(a_n))`, the candidates for `ω_u` grouped by constant mode.
    pub switch_points: Vec<(usize, f64, Matrix)>,
    /// Orthogonal polar factors of the late general samples.
    pub orthogonal_cluster: Vec<Matrix>,
    /// Mean of `‖Φ(t) x0‖` over the late samples (the sphere radius).
    pub radius: f64,
    /// Max − min of those norms.
    pub radius_spread: f64,
}

/// Sampling budget for [`sample_omega`].
#[derive(Debug, Clone, Copy)]
pub struct OmegaBudget {
    pub horizon: f64,
    /// Number of general late-time samples in `[horizon/2, horizon]`.
    pub samples: usize,
    /// Cap on retained late switch-time samples.
    pub max_switch_points: usize,
}

impl Default for OmegaBudget {
    fn default() -> Self {
        OmegaBudget {
            horizon: 200.0,
            samples: 64,
            max_switch_points: 256,
        }
    }
}

/// Collects late-time flow samples: general grid points over the second
/// half of the horizon, switch-time points grouped by their active mode,
/// and the orthogonal polar factors.
pub fn sample_omega(
    system: &SwitchedSystem,
    signal: &mut SwitchingSignal,
    x0: &Vector,
    budget: &OmegaBudget,
) -> Result<OmegaSample> {
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: x0.len(),
        });
    }
    let horizon = budget.horizon;
    signal.ensure_horizon(horizon)?;
    let mut sampler = FlowSampler::new(system, signal, horizon)?;
    let t_lo = horizon / 2.0;

    let mut matrix_points = Vec::with_capacity(budget.samples);
    let mut orthogonal_cluster = Vec::with_capacity(budget.samples);
    let mut norms = Vec::with_capacity(budget.samples);
    for j in 0..budget.samples {
        let t = t_lo + (horizon - t_lo) * j as f64 / (budget.samples.max(2) - 1) as f64;
        let phi = sampler.at(t)?;
        let (o, _) = linalg::polar_decompose(&phi)?;
        norms.push((&phi * x0).norm());
        matrix_points.push((t, phi));
        orthogonal_cluster.push(o);
    }

    let late_switches: Vec<(f64, usize)> = sampler
        .interior_switches()
        .into_iter()
        .filter(|&(a, _)| a >= t_lo)
        .collect();
    let stride = (late_switches.len() / budget.max_switch_points.max(1)).max(1);
    let mut switch_points = Vec::new();
    for (a, mode) in late_switches.into_iter().step_by(stride) {
        let phi = sampler.at(a)?;
        switch_points.push((mode, a, phi));
    }

    let radius = norms.iter().sum::<f64>() / norms.len().max(1) as f64;
    let spread = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - norms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OmegaSample {
        x0: x0.clone(),
        matrix_points,
        switch_points,
        orthogonal_cluster,
        radius,
        radius_spread: spread.max(0.0),
    })
}

/// Empirical verdicts for the limit-set inclusion theorems.
#[derive(Debug, Clone)]
pub struct InclusionReport {
    /// Max over late samples of the distance from `Φ(t)x₀` to the union of
    /// the switch-point cluster and the `𝒱_i` (the `Ω_u x ⊆ ω_u x ∪ ⋃𝒱_i`
    /// inclusion).
    pub omega_max_distance: f64,
    /// Max over late samples of the distance from `Φ(t)x₀` to
    /// `F_u = ⋃_{i∈J} 𝒦_i`.
    pub fu_max_distance: f64,
    /// For each `i ∈ J`, the min over samples of the distance to `𝒦_i`
    /// (evidence that `Ω_u(x)` meets every `𝒦_i`).
    pub per_k_min_distance: Vec<(usize, f64)>,
    /// `rank(S_u) ≤ min_i dim 𝒱_i`, evaluated for regular signals.
    pub rank_bound: Option<RankBoundCheck>,
}

#[derive(Debug, Clone, Copy)]
pub struct RankBoundCheck {
    pub su_rank: usize,
    pub min_v_dim: usize,
    pub holds: bool,
}

/// Evaluates the empirical inclusions against the analyzed subspaces.
pub fn inclusion_checks(
    analyses: &[MatrixAnalysis],
    su: &SuEstimate,
    samples: &OmegaSample,
    classification: &SignalClassification,
) -> InclusionReport {
    let x0 = &samples.x0;
    let switch_images: Vec<Vector> = samples
        .switch_points
        .iter()
        .map(|(_, _, m)| m * x0)
        .collect();

    let j: Vec<usize> = classification
        .j_estimate
        .iter()
        .copied()
        .filter(|&i| i < analyses.len())
        .collect();

    let mut omega_max: f64 = 0.0;
    let mut fu_max: f64 = 0.0;
    let mut per_k_min: Vec<(usize, f64)> =
        j.iter().map(|&i| (i, f64::INFINITY)).collect();
    for (_, m) in &samples.matrix_points {
        let l = m * x0;
        let dist_v = analyses
            .iter()
            .map(|a| a.v.distance(&l))
            .fold(f64::INFINITY, f64::min);
        let dist_cluster = switch_images
            .iter()
            .map(|s| (&l - s).norm())
            .fold(f64::INFINITY, f64::min);
        omega_max = omega_max.max(dist_v.min(dist_cluster));

        let mut dist_fu = f64::INFINITY;
        for (slot, &(i, _)) in per_k_min.clone().iter().enumerate() {
            let dk = analyses[i].k.distance(&l);
            dist_fu = dist_fu.min(dk);
            if dk < per_k_min[slot].1 {
                per_k_min[slot].1 = dk;
            }
        }
        if dist_fu.is_finite() {
            fu_max = fu_max.max(dist_fu);
        }
    }

    let rank_bound = if classification.regular == RegularVerdict::Regular {
        let min_v_dim = analyses.iter().map(|a| a.v.dim()).min().unwrap_or(0);
        Some(RankBoundCheck {
            su_rank: su.rank,
            min_v_dim,
            holds: su.rank <= min_v_dim,
        })
    } else {
        None
    };

    InclusionReport {
        omega_max_distance: omega_max,
        fu_max_distance: fu_max,
        per_k_min_distance: per_k_min,
        rank_bound,
    }
}

/// Distance from a vector to the union of a family of subspaces.
pub fn distance_to_union(subspaces: &[&Subspace], x: &Vector) -> f64 {
    subspaces
        .iter()
        .map(|s| s.distance(x))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::test_fixtures::{example_system, random_lyapunov_matrix};
    use crate::analysis::{analyze_system, SwitchedSystem};
    use crate::signal::example_signal;
    use core::f64::consts::PI;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    // Φ(2π) = e^{(π/2)B₃} e^{(π/2)B₁} e^{(π/2)B₂} e^{(π/2)B₁}: the two
    // quarter-turns of the y–z rotation flip the sign of both surviving
    // block entries, so Φ(2π) = diag(e^{−2π}, −1, −e^{−π}); squaring over
    // two periods still drives the Gram to diag(0, 1, 0).
    fn example_limit_matrix() -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(vec![
            libm::exp(-2.0 * PI),
            -1.0,
            -libm::exp(-PI),
        ]))
    }

    #[test]
    fn flow_at_zero_is_identity() {
        let sys = example_system();
        let mut sig = example_signal();
        let phi = flow(&sys, &mut sig, 0.0).unwrap();
        assert!(linalg::op_norm(&(&phi - Matrix::identity(3, 3))) <= 1e-15);
    }

    #[test]
    fn flow_one_period_of_example() {
        let sys = example_system();
        let mut sig = example_signal();
        let phi = flow(&sys, &mut sig, 2.0 * PI).unwrap();
        assert!(linalg::op_norm(&(&phi - example_limit_matrix())) <= 1e-10);
    }

    /// Dense RK4 integration of `Φ' = B_{u(t)}Φ`, restarted at each switch;
    /// the independent oracle for the product-of-exponentials flow.
    fn flow_ode_oracle(
        sys: &SwitchedSystem,
        sig: &SwitchingSignal,
        t_end: f64,
        h: f64,
    ) -> Matrix {
        let d = sys.dim();
        let mut phi = Matrix::identity(d, d);
        for (start, end, mode) in sig.segments_until(t_end) {
            let b = sys.matrix(mode);
            let len = end - start;
            let steps = (len / h).ceil().max(1.0) as usize;
            let dt = len / steps as f64;
            for _ in 0..steps {
                let k1 = b * &phi;
                let k2 = b * (&phi + &k1 * (dt / 2.0));
                let k3 = b * (&phi + &k2 * (dt / 2.0));
                let k4 = b * (&phi + &k3 * dt);
                phi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
        }
        phi
    }

    fn random_system(d: usize, p: usize, rng: &mut impl Rng) -> SwitchedSystem {
        let mats = (0..p).map(|_| random_lyapunov_matrix(d, rng)).collect();
        SwitchedSystem::new(mats, None).unwrap()
    }

    #[test]
    fn flow_matches_ode_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for trial in 0..5 {
            let sys = random_system(3, 2, &mut rng);
            let mut sig = SwitchingSignal::dwell_random(0.2, 1.0, vec![1.0, 1.0], trial).unwrap();
            let t = 4.0;
            let phi = flow(&sys, &mut sig, t).unwrap();
            let oracle = flow_ode_oracle(&sys, &sig, t, 1e-3);
            assert!(linalg::op_norm(&(&phi - &oracle)) <= 1e-7);
            assert!(linalg::op_norm(&phi) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn record_flow_monotonicity_and_lipschitz() {
        let sys = example_system();
        let mut sig = example_signal();
        let x = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let rec = record_flow(&sys, &mut sig, 4.0 * PI, 400, &[x]).unwrap();
        for j in 0..rec.times.len() - 1 {
            assert!(rec.norms[0][j + 1] <= rec.norms[0][j] + 1e-10);
            // Loewner monotonicity of the Gram.
            let diff = &rec.grams[j + 1] - &rec.grams[j];
            assert!(linalg::sym_max_eigenvalue(&diff) <= 1e-9);
            // λ-Lipschitz in operator norm.
            let dphi = linalg::op_norm(&(&rec.flows[j + 1] - &rec.flows[j]));
            let dt = rec.times[j + 1] - rec.times[j];
            assert!(dphi <= sys.lipschitz() * dt + 1e-9);
        }
        assert!(rec.flows.iter().all(|m| linalg::op_norm(m) <= 1.0 + 1e-9));
    }

    #[test]
    fn semigroup_restart_consistency() {
        let sys = example_system();
        let mut sig = example_signal();
        let t = 3.3;
        let phi = flow(&sys, &mut sig, t).unwrap();
        // Restart at the switch a_2 = π: Φ(t) = Φ_restarted(t − π)·Φ(π)
        // where the restarted signal is the tail of u.
        let a = PI;
        let phi_a = flow(&sys, &mut sig, a).unwrap();
        let tail = SwitchingSignal::periodic(alloc::vec![
            (0, core::f64::consts::FRAC_PI_2),
            (2, core::f64::consts::FRAC_PI_2),
            (0, core::f64::consts::FRAC_PI_2),
            (1, core::f64::consts::FRAC_PI_2),
        ])
        .unwrap();
        let mut tail = tail;
        let phi_tail = flow(&sys, &mut tail, t - a).unwrap();
        assert!(linalg::op_norm(&(&phi_tail * &phi_a - &phi)) <= 1e-12);
    }

    #[test]
    fn estimate_su_example() {
        let sys = example_system();
        let mut sig = example_signal();
        let est = estimate_su(&sys, &mut sig, 40.0 * PI, &Tolerances::default()).unwrap();
        assert!(est.converged);
        let expected = Matrix::from_diagonal(&Vector::from_vec(vec![0.0, 1.0, 0.0]));
        assert!(linalg::op_norm(&(&est.matrix - &expected)) <= 1e-6);
        assert_eq!(est.rank, 1);
    }

    #[test]
    fn estimate_su_strict_family_vanishes() {
        // Hurwitz modes with a strict common Lyapunov function: −I + skew.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let d = 3;
        let mats: Vec<Matrix> = (0..2)
            .map(|_| {
                let a = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
                (&a - a.transpose()) * 0.5 - Matrix::identity(d, d)
            })
            .collect();
        let sys = SwitchedSystem::new(mats, None).unwrap();
        let mut sig = SwitchingSignal::dwell_random(0.1, 0.5, vec![1.0, 1.0], 4).unwrap();
        let est = estimate_su(&sys, &mut sig, 100.0, &Tolerances::default()).unwrap();
        assert!(est.converged);
        assert!(linalg::op_norm(&est.matrix) <= 1e-6);
        assert_eq!(est.rank, 0);
    }

    #[test]
    fn estimate_su_single_mode() {
        // For the constant signal on B_1, S(t)² = diag(e^{−2t}, 1, 1):
        // S_u = diag(0, 1, 1).
        let sys = example_system();
        let mut sig = SwitchingSignal::constant(0);
        let est = estimate_su(&sys, &mut sig, 100.0, &Tolerances::default()).unwrap();
        let expected = Matrix::from_diagonal(&Vector::from_vec(vec![0.0, 1.0, 1.0]));
        assert!(linalg::op_norm(&(&est.matrix - &expected)) <= 1e-6);
        assert_eq!(est.rank, 2);
    }

    #[test]
    fn estimate_su_gram_checkpoints_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for trial in 0..5 {
            let sys = random_system(3, 3, &mut rng);
            let mut sig =
                SwitchingSignal::dwell_random(0.1, 1.0, vec![1.0, 1.0, 1.0], trial).unwrap();
            let est = estimate_su(&sys, &mut sig, 200.0, &Tolerances::default()).unwrap();
            for w in est.gram_checkpoints.windows(2) {
                let diff = &w[1].1 - &w[0].1;
                assert!(linalg::sym_max_eigenvalue(&diff) <= 1e-9);
            }
        }
    }

    #[test]
    fn integral_identity() {
        let sys = example_system();
        let mut sig = example_signal();
        assert_eq!(su_integral_check(&sys, &mut sig, 0.0).unwrap(), 0.0);
        let r = su_integral_check(&sys, &mut sig, 2.0 * PI).unwrap();
        assert!(r <= 1e-6, "residual {r}");

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for trial in 0..5 {
            let sys = random_system(3, 2, &mut rng);
            let mut sig =
                SwitchingSignal::dwell_random(0.2, 1.2, vec![1.0, 1.0], 100 + trial).unwrap();
            let r = su_integral_check(&sys, &mut sig, 10.0).unwrap();
            assert!(r <= 1e-6, "residual {r}");
        }
    }

    #[test]
    fn omega_samples_of_example() {
        let sys = example_system();
        let mut sig = example_signal();
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let budget = OmegaBudget {
            horizon: 200.0,
            samples: 48,
            max_switch_points: 128,
        };
        let samples = sample_omega(&sys, &mut sig, &x0, &budget).unwrap();
        // All samples inside the closed unit ball.
        for (_, m) in &samples.matrix_points {
            assert!(linalg::op_norm(m) <= 1.0 + 1e-9);
        }
        // The limit set lies in one sphere: here the radius is 1 (the y
        // component survives with |y| = 1 on the limit cycle).
        assert!(samples.radius_spread <= 1e-3);
        assert!((samples.radius - 1.0).abs() <= 1e-3);

        // Every late sample of Φ(t)x₀ is near 𝒱₁ = {x = 0}.
        let tol = Tolerances::default();
        let analyses = analyze_system(&sys, &tol).unwrap();
        for (_, m) in &samples.matrix_points {
            let l = m * &x0;
            assert!(analyses[0].v.distance(&l) <= 1e-3);
        }
    }

    #[test]
    fn omega_sample_hurwitz_shrinks_to_origin() {
        let sys =
            SwitchedSystem::new(vec![Matrix::identity(2, 2) * -1.0], None).unwrap();
        let mut sig = SwitchingSignal::constant(0);
        let x0 = Vector::from_vec(vec![1.0, -2.0]);
        let samples = sample_omega(
            &sys,
            &mut sig,
            &x0,
            &OmegaBudget {
                horizon: 60.0,
                samples: 16,
                max_switch_points: 16,
            },
        )
        .unwrap();
        assert!(samples.radius <= 1e-6);
    }

    #[test]
    fn inclusion_checks_example() {
        let sys = example_system();
        let tol = Tolerances::default();
        let analyses = analyze_system(&sys, &tol).unwrap();
        let mut sig = example_signal();
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let su = estimate_su(&sys, &mut sig, 40.0 * PI, &tol).unwrap();
        let samples = sample_omega(&sys, &mut sig, &x0, &OmegaBudget::default()).unwrap();
        let class = crate::signal::classify(&sig, sig.horizon().min(200.0)).unwrap();
        let report = inclusion_checks(&analyses, &su, &samples, &class);
        assert!(report.omega_max_distance <= 1e-3);
        assert!(report.fu_max_distance <= 1e-3);
        if let Some(rb) = report.rank_bound {
            assert!(rb.holds);
            assert_eq!(rb.su_rank, 1);
            assert_eq!(rb.min_v_dim, 1);
        } else {
            panic!("example signal should classify as regular");
        }
    }
}
