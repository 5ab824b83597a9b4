//! First passage of the work index to a threshold `n_T > n0`, starting from
//! `(n0, +θ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{EngineParams, QubitTag};
use crate::propagators::DistTable;
use crate::transforms::{cpow, invert_series, ordered_roots, FnGf, InversionOptions};

pub const DEFAULT_T_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FptQuery {
    pub n_target: i64,
    pub n0: i64,
    pub params: EngineParams,
    pub t_cap: u64,
}

impl FptQuery {
    pub fn new(n_target: i64, n0: i64, params: EngineParams) -> Result<Self> {
        if n_target <= n0 {
            return Err(Error::Domain {
                name: "n_target",
                value: n_target as f64,
                domain: "(n0, inf)",
            });
        }
        Ok(Self {
            n_target,
            n0,
            params,
            t_cap: DEFAULT_T_CAP,
        })
    }

    pub fn with_t_cap(mut self, t_cap: u64) -> Self {
        self.t_cap = t_cap;
        self
    }

    /// Distance to the threshold, `n_T - n0`.
    pub fn distance(&self) -> i64 {
        self.n_target - self.n0
    }
}

/// Moment that is either finite or divergent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MomentValue {
    Finite(f64),
    Divergent,
}

impl MomentValue {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Divergent => None,
        }
    }

    /// Finite values as is, divergent ones as `+inf`.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Snr {
    Finite(f64),
    /// Deterministic stopping time: zero variance.
    Infinite,
    /// The mean diverges faster than the spread.
    Vanishing,
}

impl Snr {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Snr::Finite(v) => v,
            Snr::Infinite => f64::INFINITY,
            Snr::Vanishing => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FptSummary {
    pub mean: MomentValue,
    pub second_moment: MomentValue,
    pub snr: Snr,
    pub analytic: bool,
    pub n_samples: u64,
    pub censored: u64,
}

enum Kind {
    /// Reaches the threshold in exactly `Δ` steps.
    Ballistic,
    /// Oscillates below the start forever.
    Trapped,
    Lazy,
    Blind,
}

fn kind(params: &EngineParams) -> Kind {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    if pl == 0.0 || pj == 0.0 {
        Kind::Ballistic
    } else if pj * pl == 1.0 {
        Kind::Trapped
    } else if pl == 1.0 {
        Kind::Blind
    } else {
        Kind::Lazy
    }
}

fn outer_root_power(u: Complex64, delta: i64, params: &EngineParams) -> Result<Complex64> {
    let (_, zo) = ordered_roots(u, params.p_jump(), params.p_lazy())?;
    Ok(cpow(zo, -delta))
}

/// `Σ_T u^T F_T`, equal to `χ^{-Δ} z_u^{Δ}`. Written as `z_out^{-Δ}` with
/// `z_out = χ / z_u` so that the `χ = 0` and `p_l = 0` cases need no
/// separate branch.
pub fn fpt_gf(u: Complex64, query: &FptQuery) -> Result<Complex64> {
    if !(u.norm() <= 1.0) {
        return Err(Error::Domain {
            name: "|u|",
            value: u.norm(),
            domain: "[0, 1]",
        });
    }
    let delta = query.distance();
    match kind(&query.params) {
        Kind::Ballistic => Ok(cpow(u, delta)),
        Kind::Trapped => Ok(Complex64::new(0.0, 0.0)),
        Kind::Lazy | Kind::Blind => {
            if u.norm() == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            outer_root_power(u, delta, &query.params)
        }
    }
}

/// `F_T`, the probability that the threshold is first reached at cycle `T`.
pub fn fpt_pmf(t: u64, query: &FptQuery, opts: &InversionOptions) -> Result<f64> {
    let delta = query.distance();
    let ti = t as i64;
    if ti < delta || (ti - delta) % 2 != 0 {
        return Ok(0.0);
    }
    match kind(&query.params) {
        Kind::Ballistic => Ok(if ti == delta { 1.0 } else { 0.0 }),
        Kind::Trapped => Ok(0.0),
        Kind::Lazy | Kind::Blind => {
            let gf = FnGf::new(|u| fpt_gf(u, query)).with_constant(0.0);
            invert_series(&gf, t, opts)
        }
    }
}

/// `F_T` for `T = 0..=t_cap`; the mass beyond the cap is reported as
/// censored.
pub fn fpt_table(query: &FptQuery, opts: &InversionOptions) -> Result<DistTable> {
    let masses: Vec<f64> = (0..=query.t_cap)
        .into_par_iter()
        .map(|t| fpt_pmf(t, query, opts))
        .collect::<Result<_>>()?;
    Ok(DistTable::censored(0, masses))
}

/// `⟨T⟩ = Δ (1 - p_l + 2 p_j p_l) / (1 - p_l)`.
pub fn mfpt(query: &FptQuery) -> MomentValue {
    let (pj, pl) = (query.params.p_jump(), query.params.p_lazy());
    let delta = query.distance() as f64;
    match kind(&query.params) {
        Kind::Ballistic => MomentValue::Finite(delta),
        Kind::Trapped | Kind::Blind => MomentValue::Divergent,
        Kind::Lazy => MomentValue::Finite(delta * (1.0 - pl + 2.0 * pj * pl) / (1.0 - pl)),
    }
}

/// `⟨T²⟩`.
pub fn fpt_second_moment(query: &FptQuery) -> MomentValue {
    let (pj, pl) = (query.params.p_jump(), query.params.p_lazy());
    let delta = query.distance() as f64;
    match kind(&query.params) {
        Kind::Ballistic => MomentValue::Finite(delta * delta),
        Kind::Trapped | Kind::Blind => MomentValue::Divergent,
        Kind::Lazy => {
            let m = 1.0 - pl;
            let extra = 4.0 * pj * delta * pl * (m + pj * pl) * ((delta - 1.0) * m - 2.0 * pj * pl + 2.0) / m.powi(3);
            MomentValue::Finite(delta * delta + extra)
        }
    }
}

/// `⟨T⟩² / Var T`.
pub fn fpt_snr(query: &FptQuery) -> Snr {
    let (pj, pl) = (query.params.p_jump(), query.params.p_lazy());
    let delta = query.distance() as f64;
    match kind(&query.params) {
        Kind::Ballistic => Snr::Infinite,
        Kind::Trapped | Kind::Blind => Snr::Vanishing,
        Kind::Lazy => {
            let m = 1.0 - pl;
            let num = m * delta * (m + 2.0 * pj * pl).powi(2);
            let den = 4.0 * pj * pl * (m + pj * pl) * (1.0 + pl - 2.0 * pj * pl);
            Snr::Finite(num / den)
        }
    }
}

pub fn fpt_summary(query: &FptQuery) -> FptSummary {
    FptSummary {
        mean: mfpt(query),
        second_moment: fpt_second_moment(query),
        snr: fpt_snr(query),
        analytic: true,
        n_samples: 0,
        censored: 0,
    }
}

/// Radius of convergence of the first-passage generating function, i.e. the
/// branch point nearest to the origin on the positive axis.
pub fn branch_radius(params: &EngineParams) -> f64 {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let c = ((1.0 - pj) * pl * (1.0 - pj * pl)).sqrt();
    1.0 / (c + (pl * pj * (1.0 - pl + pj * pl)).sqrt())
}

/// Upper bound on `Σ_{T > cap} T^k F_T` from `F_T s^T <= F̃(s)` at a real
/// `s > 1` inside the radius of convergence. `None` when no such `s` exists
/// (`p_l = 1`).
pub fn fpt_tail_bound(query: &FptQuery, cap: u64, k: i32) -> Option<f64> {
    let delta = query.distance();
    match kind(&query.params) {
        Kind::Ballistic => {
            return Some(if (cap as i64) >= delta {
                0.0
            } else {
                (delta as f64).powi(k)
            })
        }
        Kind::Trapped => return Some(0.0),
        Kind::Blind => return None,
        Kind::Lazy => {}
    }
    let ub = branch_radius(&query.params);
    if !(ub > 1.0) {
        return None;
    }
    let s = 1.0 + (ub - 1.0) / 2.0;
    let gf_s = outer_root_power(Complex64::new(s, 0.0), delta, &query.params).ok()?.re;
    let ln_s = s.ln();
    let term = |t: u64| (k as f64 * (t as f64).ln() - t as f64 * ln_s).exp();
    // Past t0 successive terms shrink by at least s^{-1/2}.
    let first = cap + 1;
    let t0 = first.max((2.0 * k.max(0) as f64 / ln_s).ceil() as u64);
    let head: f64 = (first..t0).map(term).sum();
    let rest = term(t0) / (1.0 - s.powf(-0.5));
    Some(gf_s * (head + rest))
}

/// Dwell length distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Dwell {
    Pmf(f64),
    /// The stay probability is one; the dwell never ends.
    NeverLeaves,
}

/// Probability that a dwell in `from_tag` lasts exactly `k` extra cycles
/// (`k = 0`: the tag changes at the next cycle).
pub fn waiting_time_pmf(k: u64, from_tag: QubitTag, params: &EngineParams) -> Dwell {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let stay = match from_tag {
        QubitTag::PlusTheta => 1.0 - pj * pl,
        QubitTag::MinusTheta => (1.0 - pj) * pl,
    };
    if stay == 1.0 {
        return Dwell::NeverLeaves;
    }
    let stay_k = if k == 0 { 1.0 } else { stay.powf(k as f64) };
    Dwell::Pmf(stay_k * (1.0 - stay))
}
