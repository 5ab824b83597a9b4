//! Closed-form moments of the work index for a walker started in `(n0, +θ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::EngineParams;

/// `base^k` computed as `sign · exp(k ln|base|)` so that large `k` neither
/// overflows nor loses the sign of a negative base.
pub fn signed_pow(base: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if base == 0.0 {
        return 0.0;
    }
    let sign = if base < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    sign * (k as f64 * base.abs().ln()).exp()
}

enum Branch {
    /// Every step is +1.
    Ballistic,
    /// No feedback at all, `p_l = 1` with `p_j > 0`.
    Blind,
    Lazy,
}

fn branch(params: &EngineParams) -> Branch {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    if pl == 0.0 || pj == 0.0 {
        Branch::Ballistic
    } else if pl == 1.0 {
        Branch::Blind
    } else {
        Branch::Lazy
    }
}

/// `⟨n_t⟩`.
pub fn mean_n(t: u64, params: &EngineParams) -> f64 {
    let (pj, pl, n0) = (params.p_jump(), params.p_lazy(), params.n0() as f64);
    let tf = t as f64;
    match branch(params) {
        Branch::Ballistic => n0 + tf,
        Branch::Blind => n0 - 1.0 + (1.0 - signed_pow(1.0 - 2.0 * pj, t + 1)) / (2.0 * pj),
        Branch::Lazy => {
            let d = 1.0 - pl + 2.0 * pj * pl;
            let decay = signed_pow((1.0 - 2.0 * pj) * pl, t + 1);
            n0 - 1.0 + (1.0 - pl) * (tf + 1.0) / d + 2.0 * pj * pl * (1.0 - decay) / (d * d)
        }
    }
}

/// `⟨n_t²⟩`.
pub fn second_moment_n(t: u64, params: &EngineParams) -> f64 {
    let (pj, pl, n0) = (params.p_jump(), params.p_lazy(), params.n0() as f64);
    let tf = t as f64;
    match branch(params) {
        Branch::Ballistic => (n0 + tf).powi(2),
        Branch::Blind => {
            let decay = signed_pow(1.0 - 2.0 * pj, t + 1);
            (n0 - 1.0).powi(2) + (1.0 - pj) * (tf + 1.0) / pj + (1.0 - 2.0 * pj * n0) * (decay - 1.0) / (2.0 * pj * pj)
        }
        Branch::Lazy => {
            let d = 1.0 - pl + 2.0 * pj * pl;
            let q = (1.0 - 2.0 * pj) * pl;
            let decay = signed_pow(q, t + 1);
            let lead = (n0 - 1.0).powi(2)
                + 2.0 * n0 * (1.0 - pl) * (tf + 1.0) / d
                + (1.0 - pl).powi(2) * (tf + 1.0) * (tf + 2.0) / (d * d);
            let echo = 4.0 * pj * (1.0 - pl) * decay * pl * (tf + 1.0) / d.powi(3);
            let drift = (tf + 1.0) * (3.0 - 3.0 * pl + 2.0 * pj * pl) * (1.0 - 2.0 * pl + q * q) / d.powi(3);
            let bracket = n0 * d * d + 2.0 * pl * (pj + pl - 2.0 * pj * pl) - 2.0;
            let relax = 4.0 * pj * pl * bracket * (1.0 - decay) / d.powi(4);
            lead + echo - drift + relax
        }
    }
}

/// `⟨(n_t - n0)²⟩`; independent of `n0`.
pub fn msd(t: u64, params: &EngineParams) -> f64 {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let tf = t as f64;
    match branch(params) {
        Branch::Ballistic => tf * tf,
        Branch::Blind => {
            1.0 + (signed_pow(1.0 - 2.0 * pj, t + 1) - 1.0) / (2.0 * pj * pj) + (tf + 1.0) * (1.0 - pj) / pj
        }
        Branch::Lazy => {
            let d = 1.0 - pl + 2.0 * pj * pl;
            let m = 1.0 - pl;
            let decay = signed_pow((1.0 - 2.0 * pj) * pl, t + 1);
            let growth = m.powi(4) * (tf * tf - 1.0);
            let linear = 4.0
                * pj
                * (tf + 1.0)
                * pl
                * (m * m * (m * (tf - 3.0) + 3.0) + pj * pl * m * (m * (tf - 10.0) + 8.0)
                    - 4.0 * pj.powi(3) * pl.powi(3)
                    - 4.0 * pj * pj * (2.0 - 3.0 * pl) * pl * pl);
            let transient = 4.0
                * pj
                * pl
                * (2.0 * ((2.0 * pj - 1.0) * m * m - (3.0 * pj - 2.0) * m + pj) * (1.0 - decay)
                    - m * (tf + 1.0) * d * decay);
            1.0 + (growth + linear - transient) / d.powi(4)
        }
    }
}

/// `α(t) = ln MSD(t) / ln t`, defined for `t >= 2`.
pub fn anomalous_alpha(t: u64, params: &EngineParams) -> Result<f64> {
    if t < 2 {
        return Err(Error::Domain {
            name: "t",
            value: t as f64,
            domain: "[2, inf)",
        });
    }
    let m = msd(t, params);
    if !(m > 0.0) {
        return Err(Error::Domain {
            name: "msd",
            value: m,
            domain: "(0, inf)",
        });
    }
    Ok(m.ln() / (t as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub t: u64,
    pub mean_n: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub msd: f64,
    pub alpha: Option<f64>,
}

impl MomentReport {
    pub fn new(t: u64, params: &EngineParams) -> Self {
        let mean = mean_n(t, params);
        let second = second_moment_n(t, params);
        Self {
            t,
            mean_n: mean,
            second_moment: second,
            variance: (second - mean * mean).max(0.0),
            msd: msd(t, params).max(0.0),
            alpha: anomalous_alpha(t, params).ok(),
        }
    }
}
