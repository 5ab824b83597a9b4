//! Erasure cost, work increments, steady-state power and the optimal
//! laziness. Powers are in units of Ω·k_B T; work increments in ħω₀/2.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::signed_pow;
use crate::params::{clamp_probability, jump_probability, shannon_binary, EngineParams};

const COS_FALLBACK: f64 = 1e-6;
const GOLDEN_TOLERANCE: f64 = 1e-9;

fn check_open_angle(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            domain: "(0, pi)",
        });
    }
    Ok(())
}

/// Landauer cost per cycle, `(1 - p_l) S(p_j)` in k_B T.
pub fn info_cost(p_jump: f64, p_lazy: f64) -> Result<f64> {
    let p_lazy = clamp_probability("p_lazy", p_lazy)?;
    Ok((1.0 - p_lazy) * shannon_binary(p_jump)?)
}

/// `⟨δW_t⟩` for `t >= 1`, in units of ħω₀/2.
pub fn mean_work_increment(t: u64, params: &EngineParams) -> Result<f64> {
    if t == 0 {
        return Err(Error::Domain {
            name: "t",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let w = params.work_quantum();
    let d = 1.0 - pl + 2.0 * pj * pl;
    if d == 0.0 {
        return Ok(w);
    }
    let echo = 2.0 * pj * pl * signed_pow((1.0 - 2.0 * pj) * pl, t);
    Ok(w * ((1.0 - pl) + echo) / d)
}

/// `lim_{t→∞} ⟨δW_t⟩ = W_θ (1 - p_l) / (1 - p_l + 2 p_j p_l)`.
pub fn steady_state_increment(params: &EngineParams) -> f64 {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let d = 1.0 - pl + 2.0 * pj * pl;
    if d == 0.0 {
        return params.work_quantum();
    }
    params.work_quantum() * (1.0 - pl) / d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerReport {
    pub theta: f64,
    pub p_lazy: f64,
    pub ratio_r: f64,
    pub gross_rate: f64,
    pub info_rate: f64,
    pub net_power: f64,
}

impl PowerReport {
    pub fn new(theta: f64, p_lazy: f64, ratio_r: f64) -> Result<Self> {
        check_open_angle(theta)?;
        let p_lazy = clamp_probability("p_lazy", p_lazy)?;
        let m = 1.0 - p_lazy;
        let gross_rate = m / theta * (ratio_r / 2.0) * theta.sin() / (1.0 - p_lazy * theta.cos());
        let info_rate = m / theta * shannon_binary(jump_probability(theta)?)?;
        Ok(Self {
            theta,
            p_lazy,
            ratio_r,
            gross_rate,
            info_rate,
            net_power: gross_rate - info_rate,
        })
    }
}

/// Net steady-state power
/// `((1 - p_l)/θ) [ (r/2) sin θ / (1 - p_l cos θ) - S(sin²(θ/2)) ]`.
pub fn power_ss(theta: f64, p_lazy: f64, ratio_r: f64) -> Result<f64> {
    PowerReport::new(theta, p_lazy, ratio_r).map(|r| r.net_power)
}

/// `∂ power_ss / ∂ p_l`.
pub fn power_derivative(theta: f64, p_lazy: f64, ratio_r: f64) -> Result<f64> {
    check_open_angle(theta)?;
    let pj = jump_probability(theta)?;
    let d = 1.0 - p_lazy * theta.cos();
    Ok((shannon_binary(pj)? - ratio_r * theta.sin() * pj / (d * d)) / theta)
}

/// Unconstrained zero of [`power_derivative`],
/// `(1 - sqrt(r sin θ sin²(θ/2) / S)) / cos θ`.
pub fn stationary_laziness(theta: f64, ratio_r: f64) -> Result<f64> {
    check_open_angle(theta)?;
    let pj = jump_probability(theta)?;
    let root = (ratio_r * theta.sin() * pj / shannon_binary(pj)?).sqrt();
    Ok((1.0 - root) / theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumMethod {
    ClosedForm,
    GoldenSection,
}

impl OptimumMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimumMethod::ClosedForm => "closed_form",
            OptimumMethod::GoldenSection => "golden_section",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub p_lazy: f64,
    pub power: f64,
    /// Unclamped stationary point, absent when `cos θ ≈ 0`.
    pub p_stationary: Option<f64>,
    pub method: OptimumMethod,
}

/// Maximizes `f` on `[a, b]`, returning `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn best_of(candidates: &[f64], theta: f64, ratio_r: f64) -> Result<(f64, f64)> {
    let mut best = (candidates[0], power_ss(theta, candidates[0], ratio_r)?);
    for &p in &candidates[1..] {
        let v = power_ss(theta, p, ratio_r)?;
        if v > best.1 {
            best = (p, v);
        }
    }
    Ok(best)
}

/// Laziness in `[0, 1]` maximizing the steady-state power. The stationary
/// point is compared against both endpoints, since it can leave `[0, 1]` or
/// be a minimum when `cos θ < 0`.
pub fn optimal_laziness(theta: f64, ratio_r: f64) -> Result<Optimum> {
    check_open_angle(theta)?;
    if !(ratio_r > 0.0 && ratio_r.is_finite()) {
        return Err(Error::Domain {
            name: "ratio_r",
            value: ratio_r,
            domain: "(0, inf)",
        });
    }
    if theta.cos().abs() < COS_FALLBACK {
        let (x, _) = golden_section_max(
            |p| power_ss(theta, p, ratio_r).unwrap_or(f64::NEG_INFINITY),
            0.0,
            1.0,
            GOLDEN_TOLERANCE,
        );
        let (p_lazy, power) = best_of(&[x, 0.0, 1.0], theta, ratio_r)?;
        return Ok(Optimum {
            p_lazy,
            power,
            p_stationary: None,
            method: OptimumMethod::GoldenSection,
        });
    }
    let stationary = stationary_laziness(theta, ratio_r)?;
    let (p_lazy, power) = best_of(&[stationary.clamp(0.0, 1.0), 0.0, 1.0], theta, ratio_r)?;
    Ok(Optimum {
        p_lazy,
        power,
        p_stationary: Some(stationary),
        method: OptimumMethod::ClosedForm,
    })
}

/// Separatrix ratio `ħω₀ / k_B T = ln 4`.
pub fn critical_ratio() -> f64 {
    4f64.ln()
}
