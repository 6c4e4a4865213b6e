//! Switching signals `u = (a_n, u_n)`: piecewise-constant, right-continuous
//! maps from `[0, ∞)` into the mode set, with generators for the signal
//! classes studied in the analysis (periodic, average-dwell, random-dwell,
//! chaotic) and an evidence-based classifier.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Generator metadata and state. Generated prefixes are deterministic
/// functions of the construction parameters, and extension continues the
/// same stream, so a longer prefix is always an extension of a shorter one.
#[derive(Debug, Clone)]
enum Generator {
    /// Fixed prefix; requests past the horizon are errors.
    Explicit,
    /// Repeats `pattern` forever.
    Periodic { pattern: Vec<(usize, f64)> },
    /// Token bucket: capacity `n0`, refill rate `1/tau_a`, one token per
    /// switch, so every window satisfies `N_u(T, T+t) ≤ N_0 + t/τ_a`.
    AverageDwell {
        n0: u32,
        tau_a: f64,
        num_modes: usize,
        tokens: f64,
        rng: ChaCha8Rng,
    },
    /// Uniform dwell in `[min_dwell, max_dwell]`, weighted random next mode.
    DwellRandom {
        min_dwell: f64,
        max_dwell: f64,
        weights: Vec<f64>,
        rng: ChaCha8Rng,
    },
    /// Recurring windows of length `tau` whose internal dwells shrink to
    /// zero, separated by unit-dwell stretches.
    Chaotic {
        tau: f64,
        num_modes: usize,
        /// Index of the next shrinking window to emit.
        window: usize,
        /// Remaining segments of the current phase (separator or window).
        phase: ChaoticPhase,
    },
}

#[derive(Debug, Clone)]
enum ChaoticPhase {
    Separator { remaining: usize },
    Window { remaining: usize, dwell: f64 },
}

/// Number of unit-dwell separator segments between chaotic windows.
const CHAOTIC_SEPARATOR_SEGMENTS: usize = 2;

/// A switching signal with a stored finite prefix.
///
/// `times[n]` is the switching time `a_n` (`a_0 = 0`); `values[n]` is the
/// active mode on `[a_n, a_{n+1})`, the last one extending to `horizon`.
/// Consecutive values always differ: a "switch" to the same mode is merged.
#[derive(Debug, Clone)]
pub struct SwitchingSignal {
    times: Vec<f64>,
    values: Vec<usize>,
    horizon: f64,
    num_modes: usize,
    generator: Generator,
}

impl SwitchingSignal {
    /// Explicit signal: `times` lists `a_0 = 0, …, a_N` followed by the
    /// horizon (end of the last segment), so `times.len() == values.len()+1`.
    pub fn explicit(times: Vec<f64>, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() || times.len() != values.len() + 1 {
            return Err(Error::invalid(
                "explicit signal needs times = values + trailing horizon",
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("a_0 must be 0"));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::invalid("switching times must strictly increase"));
            }
        }
        // Merge consecutive identical values.
        let horizon = *times.last().unwrap();
        let mut m_times = vec![times[0]];
        let mut m_values = vec![values[0]];
        for n in 1..values.len() {
            if values[n] != *m_values.last().unwrap() {
                m_times.push(times[n]);
                m_values.push(values[n]);
            }
        }
        let num_modes = m_values.iter().copied().max().unwrap() + 1;
        Ok(SwitchingSignal {
            times: m_times,
            values: m_values,
            horizon,
            num_modes,
            generator: Generator::Explicit,
        })
    }

    /// Constant signal `u ≡ index`.
    pub fn constant(index: usize) -> Self {
        SwitchingSignal {
            times: vec![0.0],
            values: vec![index],
            horizon: 0.0,
            num_modes: index + 1,
            generator: Generator::Periodic {
                pattern: vec![(index, 1.0)],
            },
        }
    }

    /// Periodic signal repeating `pattern` (mode, duration) forever.
    ///
    /// A single-entry pattern denotes the constant signal; otherwise
    /// consecutive entries (cyclically) must switch modes.
    pub fn periodic(pattern: Vec<(usize, f64)>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::invalid("empty periodic pattern"));
        }
        for &(_, d) in &pattern {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::invalid("pattern durations must be positive"));
            }
        }
        if pattern.len() == 1 {
            return Ok(SwitchingSignal::constant(pattern[0].0));
        }
        for i in 0..pattern.len() {
            let j = (i + 1) % pattern.len();
            if pattern[i].0 == pattern[j].0 {
                return Err(Error::invalid(
                    "consecutive pattern entries must switch modes",
                ));
            }
        }
        let num_modes = pattern.iter().map(|&(i, _)| i).max().unwrap() + 1;
        Ok(SwitchingSignal {
            times: vec![0.0],
            values: vec![pattern[0].0],
            horizon: 0.0,
            num_modes,
            generator: Generator::Periodic { pattern },
        })
    }

    /// Average-dwell-time signal over `p` modes: the number of switches in
    /// any window `[T, T+t]` of the generated prefix is at most
    /// `N_0 + t/τ_a`.
    pub fn average_dwell(n0: u32, tau_a: f64, p: usize, seed: u64) -> Result<Self> {
        if n0 < 1 || !(tau_a > 0.0) {
            return Err(Error::invalid("need N_0 ≥ 1 and τ_a > 0"));
        }
        if p < 2 {
            return Err(Error::invalid("need at least two modes to switch"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = rng.gen_range(0..p);
        Ok(SwitchingSignal {
            times: vec![0.0],
            values: vec![first],
            horizon: 0.0,
            num_modes: p,
            generator: Generator::AverageDwell {
                n0,
                tau_a,
                num_modes: p,
                tokens: 0.0,
                rng,
            },
        })
    }

    /// Random-dwell signal: dwell uniform in `[min_dwell, max_dwell]`, next
    /// mode drawn from `weights` (renormalized over the modes other than the
    /// current one).
    pub fn dwell_random(
        min_dwell: f64,
        max_dwell: f64,
        weights: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if !(min_dwell > 0.0) || !(max_dwell >= min_dwell) {
            return Err(Error::invalid("need 0 < min_dwell ≤ max_dwell"));
        }
        if weights.len() < 2 || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("need ≥ 2 nonnegative weights"));
        }
        if weights.iter().filter(|&&w| w > 0.0).count() < 2 {
            return Err(Error::invalid("need ≥ 2 modes with positive weight"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = weighted_pick(&weights, None, &mut rng);
        let num_modes = weights.len();
        Ok(SwitchingSignal {
            times: vec![0.0],
            values: vec![first],
            horizon: 0.0,
            num_modes,
            generator: Generator::DwellRandom {
                min_dwell,
                max_dwell,
                weights,
                rng,
            },
        })
    }

    /// Chaotic signal: windows `[t_k, t_k+τ]` with all internal dwells at
    /// most `ε_k = τ/(k+2)` (cyclic mode alternation), separated by
    /// unit-dwell stretches. `ε_k` strictly decreases to zero, so the
    /// generated input is chaotic by construction.
    pub fn chaotic(tau: f64, p: usize, seed: u64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid("need τ > 0"));
        }
        if p < 2 {
            return Err(Error::invalid("a chaotic signal needs p ≥ 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = rng.gen_range(0..p);
        Ok(SwitchingSignal {
            times: vec![0.0],
            values: vec![first],
            horizon: 0.0,
            num_modes: p,
            generator: Generator::Chaotic {
                tau,
                num_modes: p,
                window: 0,
                phase: ChaoticPhase::Separator {
                    remaining: CHAOTIC_SEPARATOR_SEGMENTS,
                },
            },
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// Largest time covered by the stored prefix.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Switching times `a_0, …, a_N` of the stored prefix.
    pub fn switch_times(&self) -> &[f64] {
        &self.times
    }

    /// Mode values `u_0, …, u_N` of the stored prefix.
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.generator, Generator::Explicit)
    }

    /// Extends the stored prefix to cover `[0, t]`. Explicit signals error
    /// past their horizon.
    pub fn ensure_horizon(&mut self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("horizon must be finite and nonnegative"));
        }
        if matches!(self.generator, Generator::Explicit) {
            if t > self.horizon {
                return Err(Error::OutOfRange {
                    t,
                    horizon: self.horizon,
                });
            }
            return Ok(());
        }
        while self.horizon < t {
            self.extend_one_segment();
        }
        Ok(())
    }

    /// Appends one generated segment (the dwell finishes the previously
    /// announced segment and the next mode begins).
    fn extend_one_segment(&mut self) {
        let last_value = *self.values.last().unwrap();
        let last_time = *self.times.last().unwrap();
        let (dwell, next) = match &mut self.generator {
            Generator::Explicit => unreachable!("explicit signals are not extended"),
            Generator::Periodic { pattern } => {
                let n = self.values.len() - 1;
                let cur = n % pattern.len();
                let nxt = (n + 1) % pattern.len();
                (pattern[cur].1, pattern[nxt].0)
            }
            Generator::AverageDwell {
                n0,
                tau_a,
                num_modes,
                tokens,
                rng,
            } => {
                let desired = rng.gen_range(0.2..1.2) * *tau_a;
                // A switch needs a full token; wait for the refill if short.
                let shortfall = if *tokens + desired / *tau_a < 1.0 {
                    (1.0 - *tokens) * *tau_a - desired
                } else {
                    0.0
                };
                let dwell = desired + shortfall.max(0.0);
                *tokens = (*tokens + dwell / *tau_a).min(f64::from(*n0)) - 1.0;
                let next = pick_other(*num_modes, last_value, rng);
                (dwell, next)
            }
            Generator::DwellRandom {
                min_dwell,
                max_dwell,
                weights,
                rng,
            } => {
                let dwell = if max_dwell > min_dwell {
                    rng.gen_range(*min_dwell..*max_dwell)
                } else {
                    *min_dwell
                };
                let next = weighted_pick(weights, Some(last_value), rng);
                (dwell, next)
            }
            Generator::Chaotic {
                tau,
                num_modes,
                window,
                phase,
            } => {
                let next = (last_value + 1) % *num_modes;
                let dwell = match phase {
                    ChaoticPhase::Separator { remaining } => {
                        if *remaining > 1 {
                            *remaining -= 1;
                        } else {
                            let segments = *window + 2;
                            *phase = ChaoticPhase::Window {
                                remaining: segments,
                                dwell: *tau / segments as f64,
                            };
                            *window += 1;
                        }
                        1.0
                    }
                    ChaoticPhase::Window { remaining, dwell } => {
                        let d = *dwell;
                        if *remaining > 1 {
                            *remaining -= 1;
                        } else {
                            *phase = ChaoticPhase::Separator {
                                remaining: CHAOTIC_SEPARATOR_SEGMENTS,
                            };
                        }
                        d
                    }
                };
                (dwell, next)
            }
        };
        debug_assert!(dwell > 0.0);
        // Extend from the covered horizon: for merged (constant) stretches
        // the segment start lags behind the horizon.
        let end = self.horizon.max(last_time) + dwell;
        if next != last_value {
            self.times.push(end);
            self.values.push(next);
        }
        // Same mode again: the current segment simply grows to `end`.
        self.horizon = end;
    }

    /// `u(t)`: the active mode at `t ∈ [0, horizon)`, right-continuous at
    /// the switching times.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t >= self.horizon && !(t == 0.0 && self.horizon == 0.0) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let n = match self
            .times
            .binary_search_by(|a| a.partial_cmp(&t).unwrap())
        {
            Ok(n) => n,
            Err(ins) => ins - 1,
        };
        Ok(self.values[n])
    }

    /// The segments `(start, end, mode)` covering `[0, min(t, horizon))`.
    pub fn segments_until(&self, t: f64) -> Vec<(f64, f64, usize)> {
        let end_cap = t.min(self.horizon);
        let mut out = Vec::new();
        for n in 0..self.values.len() {
            let start = self.times[n];
            if start >= end_cap {
                break;
            }
            let end = if n + 1 < self.times.len() {
                self.times[n + 1]
            } else {
                self.horizon
            };
            out.push((start, end.min(end_cap), self.values[n]));
        }
        out
    }

    /// Occupancy measure `m_i(T)` of each mode on `[0, T]`, `T ≤ horizon`.
    pub fn occupancy(&self, up_to: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.num_modes];
        for (start, end, idx) in self.segments_until(up_to) {
            m[idx] += end - start;
        }
        m
    }

    /// Number of switching discontinuities `a_n` (n ≥ 1) in the window
    /// `(from, to]`.
    pub fn switches_in_window(&self, from: f64, to: f64) -> usize {
        self.times[1..]
            .iter()
            .filter(|&&a| a > from && a <= to)
            .count()
    }

    /// Checks that every mode value is admissible for a system with `p`
    /// modes.
    pub fn check_compatible(&self, p: usize) -> Result<()> {
        if self.num_modes > p {
            return Err(Error::invalid(format!(
                "signal uses mode {} but the system has only {} modes",
                self.num_modes - 1,
                p
            )));
        }
        Ok(())
    }
}

fn pick_other(p: usize, current: usize, rng: &mut ChaCha8Rng) -> usize {
    let r = rng.gen_range(0..p - 1);
    if r >= current {
        r + 1
    } else {
        r
    }
}

fn weighted_pick(weights: &[f64], exclude: Option<usize>, rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(_, &w)| w)
        .sum();
    let mut x = rng.gen_range(0.0..1.0) * total;
    let mut fallback = 0;
    for (i, &w) in weights.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        if w > 0.0 {
            fallback = i;
            if x < w {
                return i;
            }
            x -= w;
        }
    }
    fallback
}

/// Per-mode classification evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexClassification {
    /// Whether the recurrence hypothesis `H(i)` (infinitely many visits to
    /// `i` with dwell bounded below) is supported.
    pub h_holds: bool,
    /// The dwell lower bound exhibited by the supporting visits (0 when
    /// `h_holds` is false).
    pub recurrent_dwell: f64,
    /// Occupancy measure of the mode over the classified horizon.
    pub occupancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChaoticVerdict {
    Chaotic,
    NonChaotic,
    /// A finite prefix cannot decide chaoticity in general.
    UndecidableFromPrefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularVerdict {
    Regular,
    NotRegular,
    UndecidableFromPrefix,
}

/// Classification of a signal prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalClassification {
    pub per_index: Vec<IndexClassification>,
    pub chaotic: ChaoticVerdict,
    pub regular: RegularVerdict,
    /// Modes whose occupancy keeps growing over the prefix: the estimate of
    /// `J_u = {i : m{u = i} = ∞}`.
    pub j_estimate: Vec<usize>,
    pub horizon: f64,
}

/// Classifies a signal over `[0, horizon]`.
///
/// Verdicts come from generator metadata when the generator class decides
/// them (periodic and bounded-dwell generators are non-chaotic, the chaotic
/// generator is chaotic); for explicit prefixes the outcome is
/// evidence-based and falls back to `UndecidableFromPrefix` rather than
/// overclaiming.
pub fn classify(signal: &SwitchingSignal, horizon: f64) -> Result<SignalClassification> {
    if horizon > signal.horizon {
        return Err(Error::OutOfRange {
            t: horizon,
            horizon: signal.horizon,
        });
    }
    let p = signal.num_modes;
    let occupancy = signal.occupancy(horizon);

    // H(i) evidence: enough recurrent visits with a uniform dwell bound.
    let needed = (horizon / 20.0).max(10.0) as usize;
    let segments = signal.segments_until(horizon);
    let mut per_index = Vec::with_capacity(p);
    for i in 0..p {
        let mut dwells: Vec<f64> = segments
            .iter()
            .filter(|&&(_, _, idx)| idx == i)
            .map(|&(s, e, _)| e - s)
            .collect();
        dwells.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let metadata_h = generator_guarantees_h(signal, i);
        let (h_holds, recurrent_dwell) = if metadata_h.is_some() {
            (true, metadata_h.unwrap())
        } else if dwells.len() >= needed {
            (true, dwells[needed - 1])
        } else {
            (false, 0.0)
        };
        per_index.push(IndexClassification {
            h_holds,
            recurrent_dwell,
            occupancy: occupancy[i],
        });
    }

    let chaotic = match &signal.generator {
        Generator::Periodic { .. }
        | Generator::AverageDwell { .. }
        | Generator::DwellRandom { .. } => ChaoticVerdict::NonChaotic,
        Generator::Chaotic { .. } => ChaoticVerdict::Chaotic,
        Generator::Explicit => explicit_chaotic_heuristic(&segments),
    };

    // J_u estimate: occupancy still accumulating over the last half of the
    // prefix (or implied by the generator).
    let mut j_estimate = Vec::new();
    let half = signal.occupancy(horizon / 2.0);
    for i in 0..p {
        let recent = occupancy[i] - half[i];
        let keeps_growing = recent > 1e-3 * (horizon / 2.0).max(1.0) / p as f64;
        let metadata = generator_guarantees_h(signal, i).is_some();
        if keeps_growing || (metadata && occupancy[i] > 0.0) {
            j_estimate.push(i);
        }
    }

    let all_h = per_index.iter().all(|c| c.h_holds);
    let some_index_impossible = match &signal.generator {
        // A periodic pattern that never plays mode i rules H(i) out.
        Generator::Periodic { pattern } => {
            (0..p).any(|i| !pattern.iter().any(|&(j, _)| j == i))
        }
        _ => false,
    };
    let regular = match chaotic {
        ChaoticVerdict::Chaotic => RegularVerdict::NotRegular,
        ChaoticVerdict::NonChaotic => {
            if all_h {
                RegularVerdict::Regular
            } else if some_index_impossible {
                RegularVerdict::NotRegular
            } else {
                RegularVerdict::UndecidableFromPrefix
            }
        }
        ChaoticVerdict::UndecidableFromPrefix => RegularVerdict::UndecidableFromPrefix,
    };

    Ok(SignalClassification {
        per_index,
        chaotic,
        regular,
        j_estimate,
        horizon,
    })
}

/// Dwell bound guaranteed for mode `i` by the generator class, if any.
fn generator_guarantees_h(signal: &SwitchingSignal, i: usize) -> Option<f64> {
    match &signal.generator {
        Generator::Periodic { pattern } => pattern
            .iter()
            .filter(|&&(j, _)| j == i)
            .map(|&(_, d)| d)
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |a| a.min(d)))
            }),
        Generator::DwellRandom {
            min_dwell, weights, ..
        } => {
            if weights.get(i).copied().unwrap_or(0.0) > 0.0 {
                Some(*min_dwell)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Windowed scan over an explicit prefix: reports `Chaotic` only when the
/// maximal dwell inside successive windows decreases strongly towards zero,
/// otherwise stays undecided. A finite prefix can never certify
/// non-chaoticity.
fn explicit_chaotic_heuristic(segments: &[(f64, f64, usize)]) -> ChaoticVerdict {
    if segments.len() < 16 {
        return ChaoticVerdict::UndecidableFromPrefix;
    }
    let horizon = segments.last().unwrap().1;
    let quarter = horizon / 4.0;
    let mut max_dwell = [0.0_f64; 4];
    for &(s, e, _) in segments {
        let q = ((s / quarter) as usize).min(3);
        max_dwell[q] = max_dwell[q].max(e - s);
    }
    let decreasing = max_dwell.windows(2).all(|w| w[1] < w[0] * 0.75);
    if decreasing && max_dwell[3] < 0.05 * max_dwell[0] {
        ChaoticVerdict::Chaotic
    } else {
        ChaoticVerdict::UndecidableFromPrefix
    }
}

/// The periodic signal of the worked three-dimensional example:
/// `a_n = nπ/2` with the mode pattern `(1, 2, 1, 3)` in the paper's 1-based
/// labels, i.e. `(0, 1, 0, 2)` here.
pub fn example_signal() -> SwitchingSignal {
    let q = core::f64::consts::FRAC_PI_2;
    SwitchingSignal::periodic(vec![(0, q), (1, q), (0, q), (2, q)]).unwrap()
}
