//! Roots of the propagator denominator and numerical extraction of power
//! series coefficients from a generating function.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const TIE_TOLERANCE: f64 = 1e-12;
const CLAMP_THRESHOLD: f64 = 1e-8;
const ZERO_THRESHOLD: f64 = 1e-15;
const MAX_RADIUS_RETRIES: usize = 3;
const PARALLEL_MIN_POINTS: u64 = 256;

/// Both roots of `z² - z s(u) + χ = 0` at a given `u`, where
/// `s(u) = [1 + (1 - 2p_j) p_l u²] / [u (1 - p_j p_l)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub product_chi: f64,
    pub at_u: Complex64,
    sum: Complex64,
}

impl RootPair {
    /// Relative residuals of the product and sum identities.
    pub fn vieta_residuals(&self) -> (f64, f64) {
        let prod = self.z_plus * self.z_minus;
        let chi = Complex64::new(self.product_chi, 0.0);
        let prod_res = (prod - chi).norm() / self.product_chi.abs().max(f64::MIN_POSITIVE);
        let sum_res = (self.z_plus + self.z_minus - self.sum).norm() / self.sum.norm().max(1.0);
        (prod_res, sum_res)
    }

    /// Expected root sum.
    pub fn sum(&self) -> Complex64 {
        self.sum
    }
}

fn check_u(u: Complex64) -> Result<()> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular(u));
    }
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::Singular(u));
    }
    Ok(())
}

fn quadratic_coefficients(u: Complex64, p_jump: f64, p_lazy: f64) -> (Complex64, f64) {
    let lead = u * (1.0 - p_jump * p_lazy);
    let mid = 1.0 + (1.0 - 2.0 * p_jump) * p_lazy * u * u;
    let chi = (1.0 - p_jump) * p_lazy / (1.0 - p_jump * p_lazy);
    (mid / lead, chi)
}

/// Both roots of the denominator, using the stable solve: the larger-modulus
/// root comes from the closed form and the other is `χ / larger`.
pub fn quadratic_roots(u: Complex64, p_jump: f64, p_lazy: f64) -> Result<RootPair> {
    check_u(u)?;
    if p_jump * p_lazy == 1.0 {
        return Err(Error::SpecialCaseRequired("oscillating (p_j p_l = 1)"));
    }
    if (1.0 - p_jump) * p_lazy == 0.0 {
        return Err(Error::SpecialCaseRequired("single-root ((1 - p_j) p_l = 0)"));
    }
    let (sum, chi) = quadratic_coefficients(u, p_jump, p_lazy);
    let half = sum / 2.0;
    let disc = (half * half - chi).sqrt();
    let plus = half + disc;
    let minus = half - disc;
    let (z_plus, z_minus) = if plus.norm() >= minus.norm() {
        (plus, chi / plus)
    } else {
        (chi / minus, minus)
    };
    let pair = RootPair {
        z_plus,
        z_minus,
        product_chi: chi,
        at_u: u,
        sum,
    };
    debug_assert!({
        let (p, s) = pair.vieta_residuals();
        p < 1e-10 && s < 1e-10
    });
    Ok(pair)
}

/// The root of smaller modulus, which lies inside the unit disk for `|u| < 1`.
pub fn inner_root(u: Complex64, p_jump: f64, p_lazy: f64) -> Result<Complex64> {
    let pair = quadratic_roots(u, p_jump, p_lazy)?;
    let (a, b) = (pair.z_plus.norm(), pair.z_minus.norm());
    if (a - b).abs() <= TIE_TOLERANCE * a.max(b) {
        return Err(Error::TieBreak(u));
    }
    Ok(if a < b { pair.z_plus } else { pair.z_minus })
}

/// `(inner, outer)` roots. Unlike [`quadratic_roots`] this also covers
/// `χ = 0`, where the inner root collapses to zero and the outer one is
/// `(1 - p_l u²) / (u (1 - p_l))` (or `1/u` when `p_l = 0`).
pub fn ordered_roots(u: Complex64, p_jump: f64, p_lazy: f64) -> Result<(Complex64, Complex64)> {
    check_u(u)?;
    if p_jump * p_lazy == 1.0 {
        return Err(Error::SpecialCaseRequired("oscillating (p_j p_l = 1)"));
    }
    if (1.0 - p_jump) * p_lazy == 0.0 {
        let (sum, _) = quadratic_coefficients(u, p_jump, p_lazy);
        return Ok((Complex64::new(0.0, 0.0), sum));
    }
    let pair = quadratic_roots(u, p_jump, p_lazy)?;
    let (a, b) = (pair.z_plus.norm(), pair.z_minus.norm());
    if (a - b).abs() <= TIE_TOLERANCE * a.max(b) {
        return Err(Error::TieBreak(u));
    }
    Ok(if a < b {
        (pair.z_plus, pair.z_minus)
    } else {
        (pair.z_minus, pair.z_plus)
    })
}

/// Integer power of a complex number, negative exponents included.
pub fn cpow(z: Complex64, k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if let Ok(k32) = i32::try_from(k) {
        return z.powi(k32);
    }
    (z.ln() * k as f64).exp()
}

/// A power-series generating function `G(u) = Σ_t c_t u^t`.
///
/// Implementations must be stateless so they can be evaluated from several
/// threads at once.
pub trait SeriesGf: Sync {
    fn eval(&self, u: Complex64) -> Result<Complex64>;

    /// `c_0`. Override when the closed form is singular at `u = 0`.
    fn constant_term(&self) -> Result<f64> {
        self.eval(Complex64::new(0.0, 0.0)).map(|c| c.re)
    }
}

/// Closure-backed generating function.
pub struct FnGf<F> {
    f: F,
    constant: Option<f64>,
}

impl<F> FnGf<F>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f, constant: None }
    }

    pub fn with_constant(mut self, c0: f64) -> Self {
        self.constant = Some(c0);
        self
    }
}

impl<F> SeriesGf for FnGf<F>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    fn eval(&self, u: Complex64) -> Result<Complex64> {
        (self.f)(u)
    }

    fn constant_term(&self) -> Result<f64> {
        match self.constant {
            Some(c) => Ok(c),
            None => (self.f)(Complex64::new(0.0, 0.0)).map(|c| c.re),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionOptions {
    /// Digits of aliasing accuracy γ.
    pub target_digits: f64,
    pub max_terms: u64,
    pub radius_override: Option<f64>,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            target_digits: 10.0,
            max_terms: 1_000_000,
            radius_override: None,
        }
    }
}

impl InversionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_digits > 0.0 && self.target_digits.is_finite()) {
            return Err(Error::Domain {
                name: "target_digits",
                value: self.target_digits,
                domain: "(0, inf)",
            });
        }
        if let Some(r) = self.radius_override {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Domain {
                    name: "radius_override",
                    value: r,
                    domain: "(0, 1)",
                });
            }
        }
        Ok(())
    }

    /// Contour radius used for coefficient `t >= 1`.
    pub fn radius(&self, t: u64) -> f64 {
        self.radius_override
            .unwrap_or_else(|| 10f64.powf(-self.target_digits / (2.0 * t as f64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionReport {
    pub value: f64,
    pub radius: f64,
    pub aliasing_bound: f64,
    /// Set when the aliasing bound exceeds `10^(-γ/2)`.
    pub accuracy_warning: bool,
    pub retries: usize,
}

fn trapezoid(gf: &dyn SeriesGf, t: u64, rho: f64) -> Result<f64> {
    let tf = t as f64;
    let sign = |k: u64| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let point = |k: u64| -> Result<f64> {
        let u = Complex64::from_polar(rho, std::f64::consts::PI * k as f64 / tf);
        Ok(sign(k) * gf.eval(u)?.re)
    };
    let interior: Vec<f64> = if t >= PARALLEL_MIN_POINTS {
        (1..t).into_par_iter().map(point).collect::<Result<_>>()?
    } else {
        (1..t).map(point).collect::<Result<_>>()?
    };
    let edges = gf.eval(Complex64::new(rho, 0.0))?.re + sign(t) * gf.eval(Complex64::new(-rho, 0.0))?.re;
    let total = edges + 2.0 * interior.iter().sum::<f64>();
    Ok(total / (2.0 * tf * rho.powf(tf)))
}

fn raw_coefficient(gf: &dyn SeriesGf, t: u64, opts: &InversionOptions) -> Result<InversionReport> {
    opts.validate()?;
    if t > opts.max_terms {
        return Err(Error::TooManyTerms {
            t,
            max_terms: opts.max_terms,
        });
    }
    if t == 0 {
        return Ok(InversionReport {
            value: gf.constant_term()?,
            radius: 0.0,
            aliasing_bound: 0.0,
            accuracy_warning: false,
            retries: 0,
        });
    }
    let mut rho = opts.radius(t);
    let mut retries = 0;
    loop {
        match trapezoid(gf, t, rho) {
            Ok(value) => {
                let r2t = rho.powf(2.0 * t as f64);
                let aliasing_bound = r2t / (1.0 - r2t);
                return Ok(InversionReport {
                    value,
                    radius: rho,
                    aliasing_bound,
                    accuracy_warning: aliasing_bound > 10f64.powf(-opts.target_digits / 2.0),
                    retries,
                });
            }
            Err(Error::TieBreak(_)) if retries < MAX_RADIUS_RETRIES => {
                rho *= 0.99;
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Coefficient `t` of a probability generating function, with the
/// diagnostics of the contour used.
pub fn invert_series_report(gf: &dyn SeriesGf, t: u64, opts: &InversionOptions) -> Result<InversionReport> {
    let mut report = raw_coefficient(gf, t, opts)?;
    let v = report.value;
    if !(-CLAMP_THRESHOLD..=1.0 + CLAMP_THRESHOLD).contains(&v) || v.is_nan() {
        return Err(Error::Inversion { t, value: v });
    }
    report.value = if v.abs() < ZERO_THRESHOLD {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    };
    Ok(report)
}

/// Coefficient `t` of a probability generating function.
pub fn invert_series(gf: &dyn SeriesGf, t: u64, opts: &InversionOptions) -> Result<f64> {
    invert_series_report(gf, t, opts).map(|r| r.value)
}

/// Coefficient `t` of an arbitrary real-coefficient series; no clamping.
pub fn invert_coefficient(gf: &dyn SeriesGf, t: u64, opts: &InversionOptions) -> Result<f64> {
    raw_coefficient(gf, t, opts).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn roots_at_unit_u() {
        let pair = quadratic_roots(c(1.0), 0.25, 0.5).unwrap();
        assert!((pair.z_plus - c(1.0)).norm() < 1e-12);
        assert!((pair.z_minus - c(0.428_571_428_571_428_6)).norm() < 1e-12);
    }

    #[test]
    fn roots_at_point_nine() {
        let pair = quadratic_roots(c(0.9), 0.25, 0.5).unwrap();
        assert!((pair.z_plus.re - 1.1563).abs() < 1e-4);
        assert!((pair.z_minus.re - 0.37062).abs() < 1e-5);
        assert!(((pair.z_plus * pair.z_minus).re - 0.428_571_4).abs() < 1e-7);
        let inner = inner_root(c(0.9), 0.25, 0.5).unwrap();
        assert!((inner.re - 0.37062).abs() < 1e-5);
    }

    #[test]
    fn degenerate_roots_at_full_laziness() {
        let pair = quadratic_roots(c(1.0), 0.3, 1.0).unwrap();
        assert!((pair.z_plus - c(1.0)).norm() < 1e-7);
        assert!((pair.z_minus - c(1.0)).norm() < 1e-7);
        assert!(matches!(inner_root(c(1.0), 0.3, 1.0), Err(Error::TieBreak(_))));
    }

    #[test]
    fn special_cases_rejected() {
        assert!(matches!(
            quadratic_roots(c(0.5), 1.0, 1.0),
            Err(Error::SpecialCaseRequired(_))
        ));
        assert!(matches!(
            quadratic_roots(c(0.5), 0.2, 0.0),
            Err(Error::SpecialCaseRequired(_))
        ));
        assert!(matches!(
            quadratic_roots(c(0.5), 1.0, 0.4),
            Err(Error::SpecialCaseRequired(_))
        ));
        assert!(matches!(quadratic_roots(c(0.0), 0.2, 0.4), Err(Error::Singular(_))));
    }

    #[test]
    fn ordered_roots_single_root_case() {
        let u = c(0.7);
        let (zi, zo) = ordered_roots(u, 1.0, 0.4).unwrap();
        assert_eq!(zi, c(0.0));
        let expected = (1.0 - 0.4 * 0.49) / (0.7 * 0.6);
        assert!((zo.re - expected).abs() < 1e-14);
        let (zi, zo) = ordered_roots(u, 0.3, 0.0).unwrap();
        assert_eq!(zi, c(0.0));
        assert!((zo.re - 1.0 / 0.7).abs() < 1e-14);
    }

    #[test]
    fn inner_root_tends_to_chi() {
        let z = inner_root(c(1.0 - 1e-9), 0.25, 0.5).unwrap();
        assert!((z.re - 0.428_571_428_6).abs() < 1e-8);
    }

    #[test]
    fn invert_geometric() {
        let gf = FnGf::new(|u: Complex64| Ok(1.0 / (1.0 - u)));
        for t in [0u64, 1, 2, 5, 17, 100, 400] {
            let v = invert_series(&gf, t, &InversionOptions::default()).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "t={t} v={v}");
        }
    }

    #[test]
    fn invert_monomial() {
        for k in [0i64, 1, 3, 8] {
            let gf = FnGf::new(move |u: Complex64| Ok(cpow(u, k)));
            for t in 0..12u64 {
                let v = invert_series(&gf, t, &InversionOptions::default()).unwrap();
                let expected = if t as i64 == k { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-8, "k={k} t={t} v={v}");
            }
        }
    }

    #[test]
    fn invert_binomial_unclamped() {
        let gf = FnGf::new(|u: Complex64| Ok(1.0 / ((1.0 - u) * (1.0 - u))));
        for t in [0u64, 1, 4, 30, 150] {
            let v = invert_coefficient(&gf, t, &InversionOptions::default()).unwrap();
            assert!((v - (t as f64 + 1.0)).abs() < 1e-8 * (t as f64 + 1.0), "t={t} v={v}");
        }
        assert!(matches!(
            invert_series(&gf, 4, &InversionOptions::default()),
            Err(Error::Inversion { .. })
        ));
    }

    #[test]
    fn max_terms_enforced() {
        let gf = FnGf::new(|u: Complex64| Ok(1.0 / (1.0 - u)));
        let opts = InversionOptions {
            max_terms: 10,
            ..Default::default()
        };
        assert!(matches!(invert_series(&gf, 11, &opts), Err(Error::TooManyTerms { .. })));
    }

    #[test]
    fn tie_break_retries_then_fails() {
        let gf = FnGf::new(|u: Complex64| Err(Error::TieBreak(u)));
        assert!(matches!(
            invert_series(&gf, 3, &InversionOptions::default()),
            Err(Error::TieBreak(_))
        ));
        let flaky = FnGf::new(|u: Complex64| {
            let r = u.norm();
            if r > 0.985 * 10f64.powf(-10.0 / 6.0) {
                Err(Error::TieBreak(u))
            } else {
                Ok(1.0 / (1.0 - u))
            }
        });
        let report = invert_series_report(&flaky, 3, &InversionOptions::default()).unwrap();
        assert_eq!(report.retries, 2);
        assert!((report.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn radius_override_warns() {
        let gf = FnGf::new(|u: Complex64| Ok(u * u));
        let opts = InversionOptions {
            radius_override: Some(0.9),
            ..Default::default()
        };
        let report = invert_series_report(&gf, 5, &opts).unwrap();
        assert!(report.accuracy_warning);
        assert!(invert_series(
            &gf,
            5,
            &InversionOptions {
                radius_override: Some(1.5),
                ..Default::default()
            }
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn vieta_identities(pj in 0.0..0.999f64, pl in 0.001..=1.0f64, r in 0.05..0.999f64, phi in 0.0..std::f64::consts::TAU) {
                let u = Complex64::from_polar(r, phi);
                let pair = quadratic_roots(u, pj, pl).unwrap();
                let (p, s) = pair.vieta_residuals();
                prop_assert!(p < 1e-10 && s < 1e-10);
            }

            #[test]
            fn real_roots_straddle_one(pj in 0.0..0.999f64, pl in 0.001..0.999f64, u in 0.01..0.999f64) {
                let pair = quadratic_roots(c(u), pj, pl).unwrap();
                prop_assert!(pair.z_plus.im.abs() < 1e-12 && pair.z_minus.im.abs() < 1e-12);
                prop_assert!(0.0 < pair.z_minus.re && pair.z_minus.re < 1.0 && 1.0 < pair.z_plus.re);
            }

            #[test]
            fn exactly_one_root_inside(pj in 0.0..0.999f64, pl in 0.001..=1.0f64, r in 0.05..0.99f64, phi in 0.0..std::f64::consts::TAU) {
                let u = Complex64::from_polar(r, phi);
                let (zi, zo) = ordered_roots(u, pj, pl).unwrap();
                prop_assert!(zi.norm() < 1.0 && zo.norm() > 1.0);
            }
        }
    }
}
