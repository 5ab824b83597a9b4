//! Joint propagator `P_t(n, s | n0, s0)` of the work index and qubit tag,
//! both as a generating function in `u` and as time-domain tables.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{EngineParams, QubitTag};
use crate::transforms::{cpow, invert_series, ordered_roots, FnGf, InversionOptions};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EngineState {
    pub n: i64,
    pub tag: QubitTag,
}

impl EngineState {
    pub fn new(n: i64, tag: QubitTag) -> Self {
        Self { n, tag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagatorQuery {
    pub n: i64,
    pub tag: QubitTag,
    pub n0: i64,
    pub tag0: QubitTag,
    pub marginal_over_tag: bool,
}

impl PropagatorQuery {
    pub fn joint(n: i64, tag: QubitTag, n0: i64, tag0: QubitTag) -> Self {
        Self {
            n,
            tag,
            n0,
            tag0,
            marginal_over_tag: false,
        }
    }

    pub fn marginal(n: i64, n0: i64, tag0: QubitTag) -> Self {
        Self {
            n,
            tag: QubitTag::PlusTheta,
            n0,
            tag0,
            marginal_over_tag: true,
        }
    }

    fn with_tag(self, tag: QubitTag) -> Self {
        Self {
            tag,
            marginal_over_tag: false,
            ..self
        }
    }
}

/// Which closed form applies to a parameter set and starting tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Every step goes up: `p_l = 0`, or `p_j = 0` starting from `+θ`.
    Ballistic,
    /// `p_j = p_l = 1`: the walker alternates between two sites.
    Oscillating,
    /// `(1 - p_j) p_l = 0` with `p_l > 0`: one root of the denominator is zero.
    SingleRoot,
    Generic,
}

pub fn regime(params: &EngineParams, tag0: QubitTag) -> Regime {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    if pl == 0.0 || (pj == 0.0 && tag0 == QubitTag::PlusTheta) {
        Regime::Ballistic
    } else if pj * pl == 1.0 {
        Regime::Oscillating
    } else if (1.0 - pj) * pl == 0.0 {
        Regime::SingleRoot
    } else {
        Regime::Generic
    }
}

fn initial_mass(q: &PropagatorQuery) -> f64 {
    if q.n == q.n0 && (q.marginal_over_tag || q.tag == q.tag0) {
        1.0
    } else {
        0.0
    }
}

fn ballistic_pmf(t: u64, q: &PropagatorQuery) -> f64 {
    if t == 0 {
        return initial_mass(q);
    }
    let hit = q.n - q.n0 == t as i64;
    if hit && (q.marginal_over_tag || q.tag == QubitTag::PlusTheta) {
        1.0
    } else {
        0.0
    }
}

/// Partner site of the two-site oscillation.
fn oscillation_partner(n0: i64, tag0: QubitTag) -> EngineState {
    match tag0 {
        QubitTag::PlusTheta => EngineState::new(n0 - 1, QubitTag::MinusTheta),
        QubitTag::MinusTheta => EngineState::new(n0 + 1, QubitTag::PlusTheta),
    }
}

fn oscillating_pmf(t: u64, q: &PropagatorQuery) -> f64 {
    let partner = oscillation_partner(q.n0, q.tag0);
    let at_start = q.n == q.n0 && (q.marginal_over_tag || q.tag == q.tag0);
    let at_partner = q.n == partner.n && (q.marginal_over_tag || q.tag == partner.tag);
    match (t.is_multiple_of(2), at_start, at_partner) {
        (true, true, _) | (false, _, true) => 1.0,
        _ => 0.0,
    }
}

fn ballistic_gf(q: &PropagatorQuery, u: Complex64) -> Complex64 {
    let delta = q.n - q.n0;
    let mut value = Complex64::new(initial_mass(q), 0.0);
    if delta >= 1 && (q.marginal_over_tag || q.tag == QubitTag::PlusTheta) {
        value += cpow(u, delta);
    }
    value
}

fn oscillating_gf(q: &PropagatorQuery, u: Complex64) -> Complex64 {
    let partner = oscillation_partner(q.n0, q.tag0);
    let denom = 1.0 - u * u;
    let mut value = Complex64::new(0.0, 0.0);
    if q.n == q.n0 && (q.marginal_over_tag || q.tag == q.tag0) {
        value += 1.0 / denom;
    }
    if q.n == partner.n && (q.marginal_over_tag || q.tag == partner.tag) {
        value += u / denom;
    }
    value
}

/// Generic and single-root forms. `C(m)` is the coefficient of `z^m` in the
/// Laurent expansion of `1 / D(z)` on the annulus between the two roots.
fn two_root_gf(tag: QubitTag, tag0: QubitTag, delta: i64, u: Complex64, params: &EngineParams) -> Result<Complex64> {
    let (pj, pl) = (params.p_jump(), params.p_lazy());
    let pr = 1.0 - pj;
    let (zi, zo) = ordered_roots(u, pj, pl)?;
    let lead = u * (1.0 - pj * pl);
    let gap = (zi - zo) * lead;
    let c = |m: i64| -> Complex64 {
        if m >= 0 {
            cpow(zo, -(m + 1)) / gap
        } else {
            cpow(zi, -m - 1) / gap
        }
    };
    Ok(match (tag, tag0) {
        (QubitTag::PlusTheta, QubitTag::PlusTheta) => pr * pl * u * c(delta) - c(delta - 1),
        (QubitTag::MinusTheta, QubitTag::PlusTheta) => -u * pj * pl * c(delta),
        (QubitTag::PlusTheta, QubitTag::MinusTheta) => -(1.0 - pr * pl) * u * c(delta - 2),
        (QubitTag::MinusTheta, QubitTag::MinusTheta) => (1.0 - pj * pl) * u * c(delta - 2) - c(delta - 1),
    })
}

/// `Σ_t u^t P_t(n, s | n0, s0)` for `|u| < 1`.
pub fn propagator_gf(query: PropagatorQuery, u: Complex64, params: &EngineParams) -> Result<Complex64> {
    if !(u.norm() < 1.0) {
        return Err(Error::Domain {
            name: "|u|",
            value: u.norm(),
            domain: "[0, 1)",
        });
    }
    if query.marginal_over_tag {
        return Ok(propagator_gf(query.with_tag(QubitTag::PlusTheta), u, params)?
            + propagator_gf(query.with_tag(QubitTag::MinusTheta), u, params)?);
    }
    if u.norm() == 0.0 {
        return Ok(Complex64::new(initial_mass(&query), 0.0));
    }
    match regime(params, query.tag0) {
        Regime::Ballistic => Ok(ballistic_gf(&query, u)),
        Regime::Oscillating => Ok(oscillating_gf(&query, u)),
        Regime::SingleRoot | Regime::Generic => two_root_gf(query.tag, query.tag0, query.n - query.n0, u, params),
    }
}

/// True when the state cannot be occupied at time `t` for parity or range
/// reasons.
fn unreachable(t: u64, q: &PropagatorQuery) -> bool {
    let delta = q.n - q.n0;
    let t = t as i64;
    if delta.abs() > t || (t - delta).rem_euclid(2) != 0 {
        return true;
    }
    if t >= 1 && !q.marginal_over_tag {
        // the extreme sites are only reachable by an all-up or all-down path
        if delta == t && q.tag == QubitTag::MinusTheta {
            return true;
        }
        if delta == -t && q.tag == QubitTag::PlusTheta {
            return true;
        }
    }
    false
}

/// `P_t(n, s | n0, s0)`.
pub fn propagator_pmf(t: u64, query: PropagatorQuery, params: &EngineParams, opts: &InversionOptions) -> Result<f64> {
    if unreachable(t, &query) {
        return Ok(0.0);
    }
    if t == 0 {
        return Ok(initial_mass(&query));
    }
    match regime(params, query.tag0) {
        Regime::Ballistic => Ok(ballistic_pmf(t, &query)),
        Regime::Oscillating => Ok(oscillating_pmf(t, &query)),
        Regime::SingleRoot | Regime::Generic => {
            if query.marginal_over_tag {
                let plus = propagator_pmf(t, query.with_tag(QubitTag::PlusTheta), params, opts)?;
                let minus = propagator_pmf(t, query.with_tag(QubitTag::MinusTheta), params, opts)?;
                return Ok(plus + minus);
            }
            let gf = FnGf::new(|u| propagator_gf(query, u, params)).with_constant(initial_mass(&query));
            invert_series(&gf, t, opts)
        }
    }
}

/// Probability table over a contiguous integer support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistTable {
    pub support_offset: i64,
    pub masses: Vec<f64>,
    pub total_mass: f64,
    pub censored_mass: f64,
}

impl DistTable {
    /// Builds a table whose censored mass is whatever the masses leave out
    /// of one.
    pub fn censored(support_offset: i64, masses: Vec<f64>) -> Self {
        let total_mass: f64 = masses.iter().sum();
        Self {
            support_offset,
            masses,
            total_mass,
            censored_mass: (1.0 - total_mass).max(0.0),
        }
    }

    pub fn get(&self, index: i64) -> f64 {
        let i = index - self.support_offset;
        if i < 0 {
            return 0.0;
        }
        self.masses.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.support_offset + i as i64, m))
    }

    /// Raw moment `Σ index^k mass` over the tabulated support.
    pub fn moment(&self, k: i32) -> f64 {
        self.iter().map(|(i, m)| (i as f64).powi(k) * m).sum()
    }

    pub fn check_integrity(&self) -> Result<()> {
        if let Some((i, m)) = self.iter().find(|(_, m)| !(0.0..=1.0).contains(m)) {
            return Err(Error::Integrity(format!("mass {m} at index {i} is not a probability")));
        }
        let gap = (self.total_mass + self.censored_mass - 1.0).abs();
        if gap > NORMALIZATION_TOLERANCE {
            return Err(Error::Integrity(format!(
                "total {} + censored {} differs from 1 by {gap:e}",
                self.total_mass, self.censored_mass
            )));
        }
        Ok(())
    }
}

/// Time-`t` table over `[n0 - t, n0 + t]`, split by tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    pub t: u64,
    pub support_offset: i64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl JointTable {
    pub fn get(&self, n: i64, tag: QubitTag) -> f64 {
        let i = n - self.support_offset;
        if i < 0 {
            return 0.0;
        }
        let column = match tag {
            QubitTag::PlusTheta => &self.plus,
            QubitTag::MinusTheta => &self.minus,
        };
        column.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn marginal(&self) -> DistTable {
        let masses: Vec<f64> = self.plus.iter().zip(&self.minus).map(|(a, b)| a + b).collect();
        let total_mass = masses.iter().sum();
        DistTable {
            support_offset: self.support_offset,
            masses,
            total_mass,
            censored_mass: 0.0,
        }
    }
}

pub fn joint_table(
    t: u64,
    n0: i64,
    tag0: QubitTag,
    params: &EngineParams,
    opts: &InversionOptions,
) -> Result<JointTable> {
    let width = 2 * t as i64 + 1;
    let lo = n0 - t as i64;
    let column = |tag: QubitTag| -> Result<Vec<f64>> {
        (0..width)
            .into_par_iter()
            .map(|i| propagator_pmf(t, PropagatorQuery::joint(lo + i, tag, n0, tag0), params, opts))
            .collect()
    };
    Ok(JointTable {
        t,
        support_offset: lo,
        plus: column(QubitTag::PlusTheta)?,
        minus: column(QubitTag::MinusTheta)?,
    })
}

/// Marginal distribution of `n_t` over the reachable support, checked for
/// normalization.
pub fn pmf_table(t: u64, n0: i64, tag0: QubitTag, params: &EngineParams, opts: &InversionOptions) -> Result<DistTable> {
    let table = joint_table(t, n0, tag0, params, opts)?.marginal();
    table.check_integrity()?;
    Ok(table)
}
