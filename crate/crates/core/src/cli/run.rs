//! Mode dispatch: one table per run.

use rayon::prelude::*;

use crate::energetics::{info_cost, optimal_laziness, steady_state_increment, PowerReport};
use crate::first_passage::{fpt_snr, fpt_table, mfpt, FptQuery};
use crate::moments::MomentReport;
use crate::montecarlo::{run_ensemble, sample_fpt};
use crate::propagators::pmf_table;
use crate::{QubitTag, Result};

use super::config::{GridPoint, Mode, RunConfig};
use super::output::{Cell, Table};

const SIMULATE: &[&str] = &[
    "p_jump",
    "p_lazy",
    "t",
    "mean_n",
    "mean_n_se",
    "msd",
    "msd_se",
    "mean_n_analytic",
    "msd_analytic",
];
const PMF: &[&str] = &["p_jump", "p_lazy", "t", "n", "pmf_analytic", "pmf_mc", "mc_stderr"];
const MOMENTS: &[&str] = &[
    "p_jump",
    "p_lazy",
    "t",
    "mean_n",
    "second_moment",
    "variance",
    "msd",
    "alpha",
];
const FPT: &[&str] = &[
    "p_jump",
    "p_lazy",
    "n0",
    "n_target",
    "T",
    "pmf_analytic",
    "pmf_mc",
    "mc_stderr",
];
const POWER: &[&str] = &[
    "theta",
    "p_jump",
    "p_lazy",
    "ratio_r",
    "gross_rate",
    "info_rate",
    "net_power",
];
const OPTIMIZE: &[&str] = &["theta", "ratio_r", "p_lazy_opt", "power_opt", "p_stationary", "method"];
const SWEEP: &[&str] = &[
    "theta",
    "p_jump",
    "p_lazy",
    "ratio_r",
    "net_power",
    "mean_work_increment_ss",
    "info_cost",
    "mfpt",
    "fpt_snr",
    "p_lazy_opt",
];

pub fn columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Simulate => SIMULATE,
        Mode::Pmf => PMF,
        Mode::Moments => MOMENTS,
        Mode::Fpt => FPT,
        Mode::Power => POWER,
        Mode::Optimize => OPTIMIZE,
        Mode::Sweep => SWEEP,
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn times(config: &RunConfig) -> Vec<u64> {
    match &config.t_grid {
        Some(g) => g.as_times("t_grid").expect("validated"),
        None => (0..=config.t_max).collect(),
    }
}

fn simulate(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    let stats = run_ensemble(p, config.t_max as usize, config.n_samples, config.base_seed)?;
    Ok(times(config)
        .into_iter()
        .map(|t| {
            let k = t as usize;
            let analytic = MomentReport::new(t, p);
            vec![
                p.p_jump().into(),
                p.p_lazy().into(),
                Cell::Int(t as i64),
                stats.mean_n[k].into(),
                stats.mean_n_se[k].into(),
                stats.msd[k].into(),
                stats.msd_se[k].into(),
                analytic.mean_n.into(),
                analytic.msd.into(),
            ]
        })
        .collect())
}

fn pmf(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    let t = config.t_max;
    let table = pmf_table(t, p.n0(), QubitTag::PlusTheta, p, &config.inversion)?;
    let mc = if config.n_samples > 0 {
        Some(run_ensemble(p, t as usize, config.n_samples, config.base_seed)?.final_histogram)
    } else {
        None
    };
    let lo = p.n0() - t as i64;
    Ok((lo..=p.n0() + t as i64)
        .map(|n| {
            let (m, se) = match &mc {
                Some(h) => {
                    let m = h.get(n);
                    (Cell::Float(m), Cell::Float(binomial_se(m, config.n_samples)))
                }
                None => (Cell::Missing, Cell::Missing),
            };
            vec![
                p.p_jump().into(),
                p.p_lazy().into(),
                Cell::Int(t as i64),
                Cell::Int(n),
                table.get(n).into(),
                m,
                se,
            ]
        })
        .collect())
}

fn moments(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    Ok(times(config)
        .into_iter()
        .map(|t| {
            let r = MomentReport::new(t, p);
            vec![
                p.p_jump().into(),
                p.p_lazy().into(),
                Cell::Int(t as i64),
                r.mean_n.into(),
                r.second_moment.into(),
                r.variance.into(),
                r.msd.into(),
                r.alpha.into(),
            ]
        })
        .collect())
}

fn fpt_query(config: &RunConfig, pt: &GridPoint) -> Result<FptQuery> {
    let target = config.n_target.expect("validated");
    Ok(FptQuery::new(target, pt.params.n0(), pt.params)?.with_t_cap(config.t_cap))
}

fn fpt(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    let q = fpt_query(config, pt)?;
    let table = fpt_table(&q, &config.inversion)?;
    let mc = if config.n_samples > 0 {
        Some(sample_fpt(&q, config.n_samples, config.base_seed)?.1)
    } else {
        None
    };
    Ok((0..=config.t_cap as i64)
        .map(|t| {
            let (m, se) = match &mc {
                Some(h) => {
                    let m = h.get(t);
                    (Cell::Float(m), Cell::Float(binomial_se(m, config.n_samples)))
                }
                None => (Cell::Missing, Cell::Missing),
            };
            vec![
                p.p_jump().into(),
                p.p_lazy().into(),
                Cell::Int(q.n0),
                Cell::Int(q.n_target),
                Cell::Int(t),
                table.get(t).into(),
                m,
                se,
            ]
        })
        .collect())
}

fn power(pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    let theta = pt.theta.expect("validated");
    let r = PowerReport::new(theta, p.p_lazy(), p.ratio_r())?;
    Ok(vec![vec![
        theta.into(),
        p.p_jump().into(),
        p.p_lazy().into(),
        p.ratio_r().into(),
        r.gross_rate.into(),
        r.info_rate.into(),
        r.net_power.into(),
    ]])
}

fn optimize(pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let theta = pt.theta.expect("validated");
    let opt = optimal_laziness(theta, pt.params.ratio_r())?;
    Ok(vec![vec![
        theta.into(),
        pt.params.ratio_r().into(),
        opt.p_lazy.into(),
        opt.power.into(),
        opt.p_stationary.into(),
        Cell::Text(opt.method.as_str()),
    ]])
}

fn sweep(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    let p = &pt.params;
    let theta = pt.theta.expect("validated");
    let q = fpt_query(config, pt)?;
    let report = PowerReport::new(theta, p.p_lazy(), p.ratio_r())?;
    let opt = optimal_laziness(theta, p.ratio_r())?;
    Ok(vec![vec![
        theta.into(),
        p.p_jump().into(),
        p.p_lazy().into(),
        p.ratio_r().into(),
        report.net_power.into(),
        steady_state_increment(p).into(),
        info_cost(p.p_jump(), p.p_lazy())?.into(),
        mfpt(&q).as_f64().into(),
        fpt_snr(&q).as_f64().into(),
        opt.p_lazy.into(),
    ]])
}

fn point_rows(config: &RunConfig, pt: &GridPoint) -> Result<Vec<Vec<Cell>>> {
    match config.mode {
        Mode::Simulate => simulate(config, pt),
        Mode::Pmf => pmf(config, pt),
        Mode::Moments => moments(config, pt),
        Mode::Fpt => fpt(config, pt),
        Mode::Power => power(pt),
        Mode::Optimize => optimize(pt),
        Mode::Sweep => sweep(config, pt),
    }
}

/// Builds the mode's table; grid points run concurrently, rows keep grid order.
pub fn build_table(config: &RunConfig) -> Result<Table> {
    let chunks: Vec<Vec<Vec<Cell>>> = config
        .points
        .par_iter()
        .map(|pt| point_rows(config, pt))
        .collect::<Result<_>>()?;
    Ok(Table {
        columns: columns(config.mode),
        rows: chunks.into_iter().flatten().collect(),
    })
}
