//! Trajectory simulator for the engine cycle.
//!
//! Each cycle consumes two uniforms in a fixed order: first the measurement
//! jump draw, then the laziness draw. The laziness draw is consumed even when
//! the feedback would be a no-op. Trajectory `i` of an ensemble is seeded with
//! `base_seed ^ splitmix64(i)` into a ChaCha8 generator, so results do not
//! depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::first_passage::{FptQuery, FptSummary, MomentValue, Snr};
use crate::params::{EngineParams, QubitTag};
use crate::propagators::{DistTable, EngineState};

/// SplitMix64 finalizer.
pub fn splitmix64(i: u64) -> u64 {
    let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `i` in an ensemble.
pub fn trajectory_seed(base_seed: u64, i: u64) -> u64 {
    base_seed ^ splitmix64(i)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One cycle. `u_jump` decides whether the measurement flips the effective
/// state, `u_lazy` whether the outcome is ignored.
pub fn step(state: EngineState, params: &EngineParams, u_jump: f64, u_lazy: f64) -> EngineState {
    let jumped = u_jump < params.p_jump();
    let outcome_minus = jumped ^ (state.tag == QubitTag::MinusTheta);
    let lazy = u_lazy < params.p_lazy();
    if outcome_minus && lazy {
        EngineState::new(state.n - 1, QubitTag::MinusTheta)
    } else {
        EngineState::new(state.n + 1, QubitTag::PlusTheta)
    }
}

fn draw_step(state: EngineState, params: &EngineParams, rng: &mut ChaCha8Rng) -> (EngineState, bool) {
    let u_jump: f64 = rng.random();
    let u_lazy: f64 = rng.random();
    (step(state, params, u_jump, u_lazy), u_lazy < params.p_lazy())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    /// `states[t]` is the state after `t` cycles.
    pub states: Vec<EngineState>,
    /// `laziness_draws[k - 1]` is `ℓ_k` for `k = 1..=t_max + 1`.
    pub laziness_draws: Vec<bool>,
    /// Cycles `k <= t_max` whose outcome must be erased (`ℓ_{k+1} = false`).
    pub erasure_count: u64,
}

impl Trajectory {
    pub fn t_max(&self) -> usize {
        self.states.len() - 1
    }

    /// Lengths of completed dwells: `(tag, extra cycles spent in it)`. The
    /// initial and the final, unfinished, dwell are excluded.
    pub fn dwells(&self) -> Vec<(QubitTag, u64)> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for t in 1..self.states.len() {
            let changed = self.states[t].tag != self.states[t - 1].tag;
            if changed {
                if let Some(s) = start {
                    out.push((self.states[s].tag, (t - 1 - s) as u64));
                }
                start = Some(t);
            }
        }
        out
    }
}

pub fn run_trajectory(params: &EngineParams, t_max: usize, seed: u64) -> Trajectory {
    let mut rng = rng_for(seed);
    let mut states = Vec::with_capacity(t_max + 1);
    let mut laziness_draws = Vec::with_capacity(t_max + 1);
    let mut state = EngineState::new(params.n0(), QubitTag::PlusTheta);
    states.push(state);
    for _ in 0..t_max {
        let (next, lazy) = draw_step(state, params, &mut rng);
        debug_assert_eq!((next.n - state.n).abs(), 1);
        debug_assert_eq!(next.tag, QubitTag::from_step(next.n - state.n));
        state = next;
        states.push(state);
        laziness_draws.push(lazy);
    }
    let u_lazy: f64 = rng.random();
    laziness_draws.push(u_lazy < params.p_lazy());
    let erasure_count = laziness_draws[1..].iter().filter(|&&l| !l).count() as u64;
    Trajectory {
        seed,
        states,
        laziness_draws,
        erasure_count,
    }
}

/// Per-time ensemble statistics of `n_t` and `(n_t - n0)²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub n_samples: u64,
    pub mean_n: Vec<f64>,
    pub mean_n_se: Vec<f64>,
    pub msd: Vec<f64>,
    pub msd_se: Vec<f64>,
    pub final_histogram: DistTable,
}

#[derive(Clone)]
struct Sums {
    disp: Vec<i64>,
    disp2: Vec<i128>,
    disp4: Vec<i128>,
    final_counts: Vec<u64>,
}

impl Sums {
    fn new(t_max: usize) -> Self {
        Self {
            disp: vec![0; t_max + 1],
            disp2: vec![0; t_max + 1],
            disp4: vec![0; t_max + 1],
            final_counts: vec![0; 2 * t_max + 1],
        }
    }

    fn merge(mut self, other: Sums) -> Sums {
        for (a, b) in self.disp.iter_mut().zip(other.disp) {
            *a += b;
        }
        for (a, b) in self.disp2.iter_mut().zip(other.disp2) {
            *a += b;
        }
        for (a, b) in self.disp4.iter_mut().zip(other.disp4) {
            *a += b;
        }
        for (a, b) in self.final_counts.iter_mut().zip(other.final_counts) {
            *a += b;
        }
        self
    }
}

/// Mean and standard error from exact sums `Σx`, `Σx²`.
fn mean_and_se(sum: i128, sum_sq: i128, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let n = n as i128;
    let spread = (n * sum_sq - sum * sum) as f64;
    let var = spread / (nf * (nf - 1.0));
    (mean, (var.max(0.0) / nf).sqrt())
}

pub fn run_ensemble(params: &EngineParams, t_max: usize, n_samples: u64, base_seed: u64) -> Result<EnsembleStats> {
    if n_samples == 0 {
        return Err(Error::Domain {
            name: "n_samples",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    let sums = (0..n_samples)
        .into_par_iter()
        .fold(
            || Sums::new(t_max),
            |mut acc, i| {
                let mut rng = rng_for(trajectory_seed(base_seed, i));
                let mut state = EngineState::new(params.n0(), QubitTag::PlusTheta);
                for t in 1..=t_max {
                    state = draw_step(state, params, &mut rng).0;
                    let d = state.n - params.n0();
                    let d2 = (d * d) as i128;
                    acc.disp[t] += d;
                    acc.disp2[t] += d2;
                    acc.disp4[t] += d2 * d2;
                }
                acc.final_counts[(state.n - params.n0() + t_max as i64) as usize] += 1;
                acc
            },
        )
        .reduce(|| Sums::new(t_max), Sums::merge);

    let n0 = params.n0() as f64;
    let mut stats = EnsembleStats {
        n_samples,
        mean_n: Vec::with_capacity(t_max + 1),
        mean_n_se: Vec::with_capacity(t_max + 1),
        msd: Vec::with_capacity(t_max + 1),
        msd_se: Vec::with_capacity(t_max + 1),
        final_histogram: DistTable {
            support_offset: params.n0() - t_max as i64,
            masses: sums.final_counts.iter().map(|&c| c as f64 / n_samples as f64).collect(),
            total_mass: 1.0,
            censored_mass: 0.0,
        },
    };
    for t in 0..=t_max {
        let (m, m_se) = mean_and_se(sums.disp[t] as i128, sums.disp2[t], n_samples);
        let (q, q_se) = mean_and_se(sums.disp2[t], sums.disp4[t], n_samples);
        stats.mean_n.push(n0 + m);
        stats.mean_n_se.push(m_se);
        stats.msd.push(q);
        stats.msd_se.push(q_se);
    }
    Ok(stats)
}

/// Cycles needed to first reach `n_target`, or `None` if `t_cap` passes first.
pub fn first_passage_time(query: &FptQuery, seed: u64) -> Option<u64> {
    let mut rng = rng_for(seed);
    let mut state = EngineState::new(query.n0, QubitTag::PlusTheta);
    for t in 1..=query.t_cap {
        state = draw_step(state, &query.params, &mut rng).0;
        if state.n == query.n_target {
            return Some(t);
        }
    }
    None
}

/// Empirical first-passage statistics over `n_samples` trajectories. The
/// moments use uncensored samples only; the censored fraction is reported
/// in the table's `censored_mass`.
pub fn sample_fpt(query: &FptQuery, n_samples: u64, base_seed: u64) -> Result<(FptSummary, DistTable)> {
    if n_samples == 0 {
        return Err(Error::Domain {
            name: "n_samples",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    let cap = query.t_cap as usize;
    let counts = (0..n_samples)
        .into_par_iter()
        .fold(
            || vec![0u64; cap + 2],
            |mut acc, i| {
                match first_passage_time(query, trajectory_seed(base_seed, i)) {
                    Some(t) => acc[t as usize] += 1,
                    None => acc[cap + 1] += 1,
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; cap + 2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let censored = counts[cap + 1];
    let hits = n_samples - censored;
    let (mut s1, mut s2) = (0u128, 0u128);
    for (t, &c) in counts[..=cap].iter().enumerate() {
        let (t, c) = (t as u128, c as u128);
        s1 += c * t;
        s2 += c * t * t;
    }
    let nf = n_samples as f64;
    let table = DistTable {
        support_offset: 0,
        masses: counts[..=cap].iter().map(|&c| c as f64 / nf).collect(),
        total_mass: hits as f64 / nf,
        censored_mass: censored as f64 / nf,
    };
    let summary = if hits == 0 {
        FptSummary {
            mean: MomentValue::Divergent,
            second_moment: MomentValue::Divergent,
            snr: Snr::Vanishing,
            analytic: false,
            n_samples,
            censored,
        }
    } else {
        let h = hits as f64;
        let mean = s1 as f64 / h;
        let second = s2 as f64 / h;
        let spread = (hits as u128 * s2).abs_diff(s1 * s1) as f64 / (h * h);
        FptSummary {
            mean: MomentValue::Finite(mean),
            second_moment: MomentValue::Finite(second),
            snr: if spread == 0.0 {
                Snr::Infinite
            } else {
                Snr::Finite(mean * mean / spread)
            },
            analytic: false,
            n_samples,
            censored,
        }
    };
    Ok((summary, table))
}
