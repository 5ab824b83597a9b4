#![allow(dead_code)]

use std::collections::HashMap;

use lqme::QubitTag;

/// One-step transition probabilities `(up, down)` from a tag.
pub fn step_probs(pj: f64, pl: f64, tag: QubitTag) -> (f64, f64) {
    match tag {
        QubitTag::PlusTheta => (1.0 - pj * pl, pj * pl),
        QubitTag::MinusTheta => (1.0 - (1.0 - pj) * pl, (1.0 - pj) * pl),
    }
}

/// Exhaustive enumeration of all `2^t` step sequences.
pub fn enumerate_paths(pj: f64, pl: f64, n0: i64, tag0: QubitTag, t: u32) -> HashMap<(i64, QubitTag), f64> {
    let mut out = HashMap::new();
    for mask in 0u64..(1u64 << t) {
        let (mut n, mut tag, mut w) = (n0, tag0, 1.0);
        for k in 0..t {
            let (up, down) = step_probs(pj, pl, tag);
            if mask >> k & 1 == 0 {
                w *= up;
                n += 1;
                tag = QubitTag::PlusTheta;
            } else {
                w *= down;
                n -= 1;
                tag = QubitTag::MinusTheta;
            }
        }
        *out.entry((n, tag)).or_insert(0.0) += w;
    }
    out
}

/// Joint distribution on `[lo, lo + len)`, split by tag.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub lo: i64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl Lattice {
    pub fn point(n0: i64, tag0: QubitTag, reach: usize) -> Self {
        let len = 2 * reach + 1;
        let mut l = Lattice {
            lo: n0 - reach as i64,
            plus: vec![0.0; len],
            minus: vec![0.0; len],
        };
        let i = reach;
        match tag0 {
            QubitTag::PlusTheta => l.plus[i] = 1.0,
            QubitTag::MinusTheta => l.minus[i] = 1.0,
        }
        l
    }

    pub fn get(&self, n: i64, tag: QubitTag) -> f64 {
        let i = n - self.lo;
        if i < 0 || i as usize >= self.plus.len() {
            return 0.0;
        }
        match tag {
            QubitTag::PlusTheta => self.plus[i as usize],
            QubitTag::MinusTheta => self.minus[i as usize],
        }
    }

    pub fn marginal(&self, n: i64) -> f64 {
        self.get(n, QubitTag::PlusTheta) + self.get(n, QubitTag::MinusTheta)
    }

    /// One application of the master equation.
    pub fn push(&self, pj: f64, pl: f64) -> Self {
        let len = self.plus.len();
        let mut next = Lattice {
            lo: self.lo,
            plus: vec![0.0; len],
            minus: vec![0.0; len],
        };
        let (up_p, down_p) = step_probs(pj, pl, QubitTag::PlusTheta);
        let (up_m, down_m) = step_probs(pj, pl, QubitTag::MinusTheta);
        for i in 0..len {
            let (a, b) = (self.plus[i], self.minus[i]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            assert!(i >= 1 && i + 1 < len, "lattice too small");
            next.plus[i + 1] += up_p * a + up_m * b;
            next.minus[i - 1] += down_p * a + down_m * b;
        }
        next
    }

    pub fn total(&self) -> f64 {
        self.plus.iter().chain(&self.minus).sum()
    }
}

/// Distributions at `t = 0..=t_max` from a point mass.
pub fn push_forward(pj: f64, pl: f64, n0: i64, tag0: QubitTag, t_max: usize) -> Vec<Lattice> {
    let mut out = vec![Lattice::point(n0, tag0, t_max + 1)];
    for _ in 0..t_max {
        let next = out.last().unwrap().push(pj, pl);
        out.push(next);
    }
    out
}

/// First-passage pmf to `n0 + delta` from `(n0, +)` by absorbing the master
/// equation at the target.
pub fn absorbed_fpt(pj: f64, pl: f64, delta: i64, t_max: usize) -> Vec<f64> {
    let reach = t_max + 1;
    let mut lat = Lattice::point(0, QubitTag::PlusTheta, reach);
    let target = (delta - lat.lo) as usize;
    let mut pmf = vec![0.0; t_max + 1];
    for slot in pmf.iter_mut().skip(1) {
        lat = lat.push(pj, pl);
        *slot = lat.plus[target];
        lat.plus[target] = 0.0;
    }
    pmf
}

/// Central finite-difference derivative.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Grid scan followed by bisection on the bracketing cell; returns the
/// argmax of `f` on `[0, 1]`.
pub fn bracketed_argmax(f: impl Fn(f64) -> f64) -> f64 {
    let n = 2000;
    let (mut best, mut best_v) = (0.0, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let v = f(x);
        if v > best_v {
            best = x;
            best_v = v;
        }
    }
    let (mut lo, mut hi) = ((best - 1.0 / n as f64).max(0.0), (best + 1.0 / n as f64).min(1.0));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mid = 0.5 * (lo + hi);
    [0.0, 1.0, mid]
        .into_iter()
        .fold((mid, f(mid)), |acc, x| if f(x) > acc.1 { (x, f(x)) } else { acc })
        .0
}

/// The grid of (p_j, p_l) pairs covering every special case.
pub fn special_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for &pj in &[0.0, 0.1, 0.25, 0.5, 0.8, 1.0] {
        for &pl in &[0.0, 0.3, 0.5, 0.9, 1.0] {
            g.push((pj, pl));
        }
    }
    g
}
