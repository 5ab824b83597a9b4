mod common;

use std::collections::HashMap;

use common::push_forward;
use lqme::energetics::{mean_work_increment, steady_state_increment};
use lqme::first_passage::{waiting_time_pmf, Dwell, FptQuery};
use lqme::moments::{mean_n, msd, second_moment_n, MomentReport};
use lqme::montecarlo::{run_ensemble, run_trajectory, sample_fpt, trajectory_seed};
use lqme::propagators::pmf_table;
use lqme::transforms::InversionOptions;
use lqme::{EngineParams, QubitTag};

const GRID: [(f64, f64); 9] = [
    (0.2, 0.0),
    (0.2, 0.5),
    (0.4, 0.9),
    (0.4, 1.0),
    (0.0, 0.7),
    (1.0, 1.0),
    (1.0, 0.4),
    (0.5, 0.99),
    (0.9, 0.3),
];

#[test]
fn closed_forms_match_push_forward() {
    for (pj, pl) in GRID {
        let n0 = 2;
        let p = EngineParams::from_jump(pj, pl).unwrap().with_n0(n0);
        let lattices = push_forward(pj, pl, n0, QubitTag::PlusTheta, 120);
        for (t, l) in lattices.iter().enumerate() {
            let range = n0 - t as i64..=n0 + t as i64;
            let m1: f64 = range.clone().map(|n| n as f64 * l.marginal(n)).sum();
            let m2: f64 = range.clone().map(|n| (n * n) as f64 * l.marginal(n)).sum();
            let sq: f64 = range.map(|n| ((n - n0) * (n - n0)) as f64 * l.marginal(n)).sum();
            let t = t as u64;
            let scale = 1.0 + (t * t) as f64;
            assert!(
                (mean_n(t, &p) - m1).abs() < 1e-8 * scale.sqrt(),
                "pj={pj} pl={pl} t={t}"
            );
            assert!(
                (second_moment_n(t, &p) - m2).abs() < 1e-8 * scale,
                "pj={pj} pl={pl} t={t}"
            );
            assert!((msd(t, &p) - sq).abs() < 1e-8 * scale, "pj={pj} pl={pl} t={t}");
        }
    }
}

#[test]
fn ensemble_within_four_standard_errors() {
    for &(pj, pl) in &[(0.3, 0.6), (0.1, 0.95), (0.7, 1.0)] {
        let p = EngineParams::from_jump(pj, pl).unwrap().with_n0(-4);
        let stats = run_ensemble(&p, 80, 20_000, 2024).unwrap();
        for t in 1..=80u64 {
            let r = MomentReport::new(t, &p);
            let k = t as usize;
            let z_mean = (stats.mean_n[k] - r.mean_n) / stats.mean_n_se[k].max(1e-12);
            let z_msd = (stats.msd[k] - r.msd) / stats.msd_se[k].max(1e-12);
            assert!(z_mean.abs() < 4.0, "pj={pj} pl={pl} t={t}: mean z={z_mean}");
            assert!(z_msd.abs() < 4.0, "pj={pj} pl={pl} t={t}: msd z={z_msd}");
        }
    }
}

#[test]
fn final_histogram_matches_propagator() {
    let p = EngineParams::from_jump(0.25, 0.5).unwrap();
    let n = 50_000u64;
    let stats = run_ensemble(&p, 30, n, 77).unwrap();
    let table = pmf_table(30, 0, QubitTag::PlusTheta, &p, &InversionOptions::default()).unwrap();
    for k in -30..=30i64 {
        let want = table.get(k);
        let got = stats.final_histogram.get(k);
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((got - want).abs() <= 4.0 * se + 1e-12, "n={k}: {got} vs {want}");
    }
}

#[test]
fn work_increments_accumulate_to_mean_displacement() {
    for (pj, pl) in GRID {
        let p = EngineParams::from_theta(2.0 * pj.sqrt().asin(), pl).unwrap();
        let w = p.work_quantum();
        let mut total = 0.0;
        for t in 1..=300u64 {
            total += mean_work_increment(t, &p).unwrap();
            assert!(
                (total - w * mean_n(t, &p)).abs() < 1e-9 * t as f64,
                "pj={pj} pl={pl} t={t}"
            );
        }
        if pl < 0.99 {
            let late = mean_work_increment(300, &p).unwrap();
            assert!((late - steady_state_increment(&p)).abs() < 1e-12, "pj={pj} pl={pl}");
        }
    }
}

#[test]
fn blind_engine_mean_is_transient() {
    let p = EngineParams::from_jump(0.3, 1.0).unwrap();
    let a: f64 = 1.0 - 2.0 * 0.3;
    for t in [1u64, 2, 5, 50, 200, 1000] {
        let want = a * (1.0 - a.powi(t as i32)) / (1.0 - a);
        assert!((mean_n(t, &p) - want).abs() < 1e-12, "t={t}: {}", mean_n(t, &p));
    }
    assert_eq!(steady_state_increment(&p), 0.0);
}

#[test]
fn dwell_lengths_are_geometric() {
    let (pj, pl) = (0.35, 0.6);
    let p = EngineParams::from_jump(pj, pl).unwrap();
    let mut counts: HashMap<(QubitTag, u64), u64> = HashMap::new();
    let mut totals: HashMap<QubitTag, u64> = HashMap::new();
    for i in 0..400u64 {
        let traj = run_trajectory(&p, 1000, trajectory_seed(5, i));
        for (tag, k) in traj.dwells() {
            *counts.entry((tag, k)).or_default() += 1;
            *totals.entry(tag).or_default() += 1;
        }
    }
    for tag in QubitTag::ALL {
        let n = totals[&tag] as f64;
        for k in 0..8u64 {
            let Dwell::Pmf(want) = waiting_time_pmf(k, tag, &p) else {
                panic!("finite dwell expected")
            };
            let got = counts.get(&(tag, k)).copied().unwrap_or(0) as f64 / n;
            let se = (want * (1.0 - want) / n).sqrt();
            assert!((got - want).abs() < 4.0 * se, "tag={tag:?} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn sampled_first_passage_moments() {
    let p = EngineParams::from_jump(0.2, 0.6).unwrap();
    let q = FptQuery::new(5, 1, p).unwrap().with_t_cap(5000);
    let (summary, table) = sample_fpt(&q, 50_000, 9).unwrap();
    let mean = lqme::first_passage::mfpt(&q).finite().unwrap();
    assert_eq!(summary.censored, 0);
    assert!((summary.mean.as_f64() - mean).abs() / mean < 0.02);
    assert!((table.total_mass - 1.0).abs() < 1e-12);
}
