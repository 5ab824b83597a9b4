mod common;

use common::absorbed_fpt;
use lqme::first_passage::{
    branch_radius, fpt_gf, fpt_pmf, fpt_second_moment, fpt_table, fpt_tail_bound, mfpt, FptQuery,
};
use lqme::propagators::{propagator_gf, PropagatorQuery};
use lqme::transforms::InversionOptions;
use lqme::{EngineParams, QubitTag};
use num_complex::Complex64;

fn query(pj: f64, pl: f64, target: i64, n0: i64) -> FptQuery {
    FptQuery::new(target, n0, EngineParams::from_jump(pj, pl).unwrap()).unwrap()
}

const GRID: [(f64, f64); 8] = [
    (0.1, 0.3),
    (0.1, 0.5),
    (0.1, 0.7),
    (0.4, 0.9),
    (0.8, 0.2),
    (1.0, 0.5),
    (0.3, 1.0),
    (0.0, 0.5),
];

#[test]
fn pmf_matches_absorbing_chain() {
    let opts = InversionOptions::default();
    for (pj, pl) in GRID {
        for delta in [1i64, 4, 7] {
            let exact = absorbed_fpt(pj, pl, delta, 150);
            let q = query(pj, pl, delta + 2, 2);
            for (t, &want) in exact.iter().enumerate() {
                let got = fpt_pmf(t as u64, &q, &opts).unwrap();
                assert!(
                    (got - want).abs() < 1e-9,
                    "pj={pj} pl={pl} delta={delta} T={t}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn renewal_ratio_independent_of_end_point() {
    let us = [
        Complex64::new(0.5, 0.0),
        Complex64::from_polar(0.8, 1.1),
        Complex64::from_polar(0.95, -2.5),
    ];
    for (pj, pl) in GRID {
        let p = EngineParams::from_jump(pj, pl).unwrap();
        let (n0, n_t) = (-1i64, 3i64);
        let q = FptQuery::new(n_t, n0, p).unwrap();
        for u in us {
            let f = fpt_gf(u, &q).unwrap();
            for n_prime in [n_t + 1, n_t + 3, n_t + 7] {
                let from_start =
                    propagator_gf(PropagatorQuery::marginal(n_prime, n0, QubitTag::PlusTheta), u, &p).unwrap();
                let from_target =
                    propagator_gf(PropagatorQuery::marginal(n_prime, n_t, QubitTag::PlusTheta), u, &p).unwrap();
                let renewal = f * from_target;
                assert!(
                    (renewal - from_start).norm() < 1e-9 * from_start.norm().max(1.0),
                    "pj={pj} pl={pl} n'={n_prime} u={u}: {renewal} vs {from_start}"
                );
            }
        }
    }
}

/// Left-sided derivatives of a real function at 1 by Richardson-extrapolated
/// backward differences.
fn derivatives_at_one(f: impl Fn(f64) -> f64, h1: f64, h2: f64) -> (f64, f64) {
    let d1 = |h: f64| (f(1.0) - f(1.0 - h)) / h;
    let d2 = |h: f64| (f(1.0) - 2.0 * f(1.0 - h) + f(1.0 - 2.0 * h)) / (h * h);
    let rich = |d: &dyn Fn(f64) -> f64, h: f64| {
        let (a, b, c) = (d(h), d(h / 2.0), d(h / 4.0));
        let ab = 2.0 * b - a;
        let bc = 2.0 * c - b;
        (4.0 * bc - ab) / 3.0
    };
    (rich(&d1, h1), rich(&d2, h2))
}

#[test]
fn moments_match_gf_derivatives() {
    for (pj, pl) in GRID {
        if pl == 1.0 || pj * pl == 0.0 {
            continue;
        }
        let q = query(pj, pl, 4, 0);
        let f = |u: f64| fpt_gf(Complex64::new(u, 0.0), &q).unwrap().re;
        let h2 = (0.02 * (branch_radius(&q.params) - 1.0)).min(1e-3);
        let (d1, d2) = derivatives_at_one(f, 1e-5, h2);
        let m1 = mfpt(&q).finite().unwrap();
        let m2 = fpt_second_moment(&q).finite().unwrap();
        assert!(((d1 - m1) / m1).abs() < 1e-5, "pj={pj} pl={pl}: {d1} vs {m1}");
        assert!(
            ((d2 + d1 - m2) / m2).abs() < 1e-5,
            "pj={pj} pl={pl}: {} vs {m2}",
            d2 + d1
        );
    }
}

#[test]
fn gf_tends_to_one_at_unit_argument() {
    for (pj, pl) in GRID {
        if pl == 1.0 {
            continue;
        }
        let q = query(pj, pl, 5, 1);
        let g = fpt_gf(Complex64::new(1.0 - 1e-12, 0.0), &q).unwrap();
        assert!((g.re - 1.0).abs() < 1e-8 && g.im.abs() < 1e-12, "pj={pj} pl={pl}: {g}");
    }
}

#[test]
fn tail_bound_dominates_true_tail() {
    for &(pj, pl) in &[(0.1, 0.5), (0.4, 0.9), (0.8, 0.2), (0.5, 0.97)] {
        let exact = absorbed_fpt(pj, pl, 3, 6000);
        let q = query(pj, pl, 3, 0);
        for cap in [10u64, 40, 150] {
            for k in 0..=2 {
                let tail: f64 = exact
                    .iter()
                    .enumerate()
                    .skip(cap as usize + 1)
                    .map(|(t, f)| (t as f64).powi(k) * f)
                    .sum();
                let bound = fpt_tail_bound(&q, cap, k).unwrap();
                assert!(bound >= tail, "pj={pj} pl={pl} cap={cap} k={k}: {bound} < {tail}");
            }
        }
    }
}

#[test]
fn truncated_sums_close_with_tail_bound() {
    let opts = InversionOptions::default();
    for &(pj, pl) in &[(0.1, 0.3), (0.1, 0.5), (0.8, 0.2), (1.0, 0.5)] {
        let mut cap = 100u64;
        let q0 = query(pj, pl, 4, 0);
        while fpt_tail_bound(&q0, cap, 2).unwrap() > 1e-10 {
            cap *= 2;
        }
        let q = q0.with_t_cap(cap);
        let table = fpt_table(&q, &opts).unwrap();
        let m1 = mfpt(&q).finite().unwrap();
        let m2 = fpt_second_moment(&q).finite().unwrap();
        assert!(
            (table.total_mass - 1.0).abs() < 1e-6,
            "pj={pj} pl={pl}: {}",
            table.total_mass
        );
        assert!(((table.moment(1) - m1) / m1).abs() < 1e-6, "pj={pj} pl={pl}");
        assert!(
            ((table.moment(2) - m2) / m2).abs() < 1e-6,
            "pj={pj} pl={pl} cap={cap}: {} vs {m2}",
            table.moment(2)
        );
    }
}

fn log_spaced_times(lo: f64, hi: f64, count: usize, parity: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (0..count)
        .map(|i| {
            let t = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as u64;
            if t % 2 == parity {
                t
            } else {
                t + 1
            }
        })
        .collect();
    ts.dedup();
    ts
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn blind_walk_tail_exponent() {
    let opts = InversionOptions::default();
    let q = query(0.3, 1.0, 2, 0);
    let ts = log_spaced_times(100.0, 3000.0, 12, 0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .map(|&t| ((t as f64).ln(), fpt_pmf(t, &q, &opts).unwrap().ln()))
        .unzip();
    let s = slope(&xs, &ys);
    assert!((s + 1.5).abs() < 0.1, "slope {s}");
}
