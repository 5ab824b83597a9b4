//! Engine parameters, unit conventions and the elementary quantities every
//! other module builds on.
//!
//! Internally ħ = k_B = 1. Work quanta are measured in ħω₀/2 (so a quantum is
//! `sin θ`), energetic costs in k_B T and power in Ω·k_B T. The only bridge
//! between the two energy scales is the ratio `r = ħω₀ / k_B T`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed on probability boundaries before a value is rejected.
pub const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnit {
    /// ħω₀/2, the unit of work quanta.
    HalfHbarOmega,
    /// k_B T, the unit of erasure costs.
    KbT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnitConvention {
    pub energy_unit: EnergyUnit,
    pub note: &'static str,
}

impl UnitConvention {
    pub const WORK: UnitConvention = UnitConvention {
        energy_unit: EnergyUnit::HalfHbarOmega,
        note: "hbar = k_B = 1; work quanta in hbar*omega0/2",
    };
    pub const ENERGETICS: UnitConvention = UnitConvention {
        energy_unit: EnergyUnit::KbT,
        note: "hbar = k_B = 1; costs in k_B T, power in Omega*k_B T",
    };

    /// Converts an energy between the two conventions using `ratio_r`.
    pub fn convert(value: f64, from: EnergyUnit, to: EnergyUnit, ratio_r: f64) -> f64 {
        match (from, to) {
            (EnergyUnit::HalfHbarOmega, EnergyUnit::KbT) => value * ratio_r / 2.0,
            (EnergyUnit::KbT, EnergyUnit::HalfHbarOmega) => value * 2.0 / ratio_r,
            _ => value,
        }
    }
}

/// Qubit state at the end of a cycle; plays the role of the velocity of the
/// run-and-tumble walker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitTag {
    PlusTheta,
    MinusTheta,
}

impl QubitTag {
    pub const ALL: [QubitTag; 2] = [QubitTag::PlusTheta, QubitTag::MinusTheta];

    /// Tag implied by the direction of the step that produced it.
    pub fn from_step(step: i64) -> Self {
        if step > 0 {
            QubitTag::PlusTheta
        } else {
            QubitTag::MinusTheta
        }
    }
}

/// Validates a probability, snapping values within [`PROB_TOLERANCE`] of the
/// boundary onto it.
pub fn clamp_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || !(-PROB_TOLERANCE..=1.0 + PROB_TOLERANCE).contains(&value) {
        return Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        });
    }
    Ok(value.clamp(0.0, 1.0))
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_nan() || !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            domain: "[0, pi]",
        });
    }
    Ok(())
}

/// Probability that the measurement flips the effective state, `sin²(θ/2)`.
pub fn jump_probability(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    let s = (theta / 2.0).sin();
    Ok(s * s)
}

/// Work gained (or lost) per cycle in units of ħω₀/2.
pub fn work_quantum(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    Ok(theta.sin())
}

/// Product of the two roots of the propagator denominator,
/// `(1 - p_j) p_l / (1 - p_j p_l)`.
pub fn chi(p_jump: f64, p_lazy: f64) -> Result<f64> {
    let denom = 1.0 - p_jump * p_lazy;
    if denom == 0.0 {
        return Err(Error::SpecialCaseRequired("oscillating (p_j p_l = 1)"));
    }
    Ok((1.0 - p_jump) * p_lazy / denom)
}

/// Binary Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_binary(p: f64) -> Result<f64> {
    let p = clamp_probability("p", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.ln() - (1.0 - p) * (1.0 - p).ln())
}

/// Protocol and physics configuration of the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineParams {
    theta: Option<f64>,
    p_jump: f64,
    p_lazy: f64,
    ratio_r: f64,
    coupling_omega: f64,
    n0: i64,
}

impl EngineParams {
    /// Parameters from a work-extraction angle; `p_jump` is derived.
    pub fn from_theta(theta: f64, p_lazy: f64) -> Result<Self> {
        Ok(Self {
            theta: Some(theta),
            p_jump: jump_probability(theta)?,
            p_lazy: clamp_probability("p_lazy", p_lazy)?,
            ratio_r: 1.0,
            coupling_omega: 1.0,
            n0: 0,
        })
    }

    /// Abstract run-and-tumble parameters with no angle attached.
    pub fn from_jump(p_jump: f64, p_lazy: f64) -> Result<Self> {
        Ok(Self {
            theta: None,
            p_jump: clamp_probability("p_jump", p_jump)?,
            p_lazy: clamp_probability("p_lazy", p_lazy)?,
            ratio_r: 1.0,
            coupling_omega: 1.0,
            n0: 0,
        })
    }

    /// Both an angle and a jump probability; they must agree to 1e-12.
    pub fn from_theta_and_jump(theta: f64, p_jump: f64, p_lazy: f64) -> Result<Self> {
        let params = Self::from_theta(theta, p_lazy)?;
        if (params.p_jump - p_jump).abs() > PROB_TOLERANCE {
            return Err(Error::Domain {
                name: "p_jump",
                value: p_jump,
                domain: "sin^2(theta/2) for the supplied theta",
            });
        }
        Ok(params)
    }

    pub fn with_ratio(mut self, ratio_r: f64) -> Result<Self> {
        if !(ratio_r > 0.0 && ratio_r.is_finite()) {
            return Err(Error::Domain {
                name: "ratio_r",
                value: ratio_r,
                domain: "(0, inf)",
            });
        }
        self.ratio_r = ratio_r;
        Ok(self)
    }

    pub fn with_coupling(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain {
                name: "coupling_omega",
                value: omega,
                domain: "(0, inf)",
            });
        }
        self.coupling_omega = omega;
        Ok(self)
    }

    pub fn with_n0(mut self, n0: i64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn with_p_lazy(mut self, p_lazy: f64) -> Result<Self> {
        self.p_lazy = clamp_probability("p_lazy", p_lazy)?;
        Ok(self)
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn p_jump(&self) -> f64 {
        self.p_jump
    }

    pub fn p_lazy(&self) -> f64 {
        self.p_lazy
    }

    /// `p_r = 1 - p_j`.
    pub fn p_stay(&self) -> f64 {
        1.0 - self.p_jump
    }

    pub fn ratio_r(&self) -> f64 {
        self.ratio_r
    }

    pub fn coupling_omega(&self) -> f64 {
        self.coupling_omega
    }

    pub fn n0(&self) -> i64 {
        self.n0
    }

    pub fn chi(&self) -> Result<f64> {
        chi(self.p_jump, self.p_lazy)
    }

    /// Work quantum `sin θ`; without an angle it is recovered from
    /// `sin θ = 2 sqrt(p_j (1 - p_j))` on `[0, π]`.
    pub fn work_quantum(&self) -> f64 {
        match self.theta {
            Some(theta) => theta.sin(),
            None => 2.0 * (self.p_jump * (1.0 - self.p_jump)).sqrt(),
        }
    }

    /// Cycle duration `τ = θ / Ω`, when an angle is known.
    pub fn cycle_duration(&self) -> Option<f64> {
        self.theta.map(|theta| theta / self.coupling_omega)
    }
}
