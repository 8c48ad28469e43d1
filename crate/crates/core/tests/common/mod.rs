//! Brute-force reference computations shared by the integration tests.
//!
//! Everything here works on dense index arrays and simulates the path by its
//! per-coordinate switch times, independently of the library's bridge and
//! posterior code.

#![allow(dead_code)]

use std::f64::consts::PI;

use redi::{AlphaSchedule, PairCoupling, PathMode, SequenceState, StateSpace};

pub fn st(space: &StateSpace, digits: &str) -> SequenceState {
    let tokens: Vec<u32> = digits.chars().map(|c| c.to_digit(10).unwrap()).collect();
    space.state(tokens).unwrap()
}

pub fn alpha(schedule: AlphaSchedule, t: f64) -> f64 {
    match schedule {
        AlphaSchedule::Linear => t,
        AlphaSchedule::Cosine => 1.0 - (PI * t / 2.0).cos(),
        AlphaSchedule::Power(p) => t.powf(p),
    }
}

pub fn all_states(space: &StateSpace) -> Vec<SequenceState> {
    space.states().unwrap().collect()
}

/// Joint law of `(X_t, X_s)` given endpoints, as `(index_t, index_s, prob)`.
///
/// A switching coordinate is at `x0` before its switch time and at `x1` after;
/// the switch time has CDF `alpha`. For the holistic path all coordinates share
/// one switch time.
pub fn endpoint_joint(
    space: &StateSpace,
    mode: PathMode,
    x0: &SequenceState,
    x1: &SequenceState,
    at: f64,
    as_: f64,
) -> Vec<(usize, usize, f64)> {
    // (state at t, state at s, probability) for "before t", "between t and s", "after s".
    let phases = [(false, false, 1.0 - as_), (false, true, as_ - at), (true, true, at)];
    let n = space.n();
    let build = |flags: &[(bool, bool)]| {
        let xt: Vec<u32> = (0..n).map(|i| if flags[i].0 { x1.get(i) } else { x0.get(i) }).collect();
        let xs: Vec<u32> = (0..n).map(|i| if flags[i].1 { x1.get(i) } else { x0.get(i) }).collect();
        (
            space.index_of(&SequenceState::from_tokens(xt)),
            space.index_of(&SequenceState::from_tokens(xs)),
        )
    };
    let mut out = Vec::new();
    match mode {
        PathMode::Holistic => {
            for &(a, b, p) in &phases {
                let (i, j) = build(&vec![(a, b); n]);
                out.push((i, j, p));
            }
        }
        PathMode::Coordinatewise => {
            let mut digits = vec![0usize; n];
            loop {
                let flags: Vec<(bool, bool)> = digits.iter().map(|&k| (phases[k].0, phases[k].1)).collect();
                let p: f64 = digits.iter().map(|&k| phases[k].2).product();
                let (i, j) = build(&flags);
                out.push((i, j, p));
                let mut pos = 0;
                while pos < n {
                    digits[pos] += 1;
                    if digits[pos] < 3 {
                        break;
                    }
                    digits[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
            }
        }
    }
    out
}

/// Dense joint `P(X_t = a, X_s = b)` under the coupling.
pub fn joint_ts(c: &PairCoupling, schedule: AlphaSchedule, mode: PathMode, t: f64, s: f64) -> Vec<Vec<f64>> {
    let space = *c.space();
    let size = space.require_dense().unwrap();
    let (at, as_) = (alpha(schedule, t), alpha(schedule, s));
    let mut joint = vec![vec![0.0; size]; size];
    for e in c.entries() {
        for (i, j, p) in endpoint_joint(&space, mode, &e.x0, &e.x1, at, as_) {
            joint[i][j] += e.weight * p;
        }
    }
    joint
}

pub fn path_marginal(c: &PairCoupling, schedule: AlphaSchedule, mode: PathMode, t: f64) -> Vec<f64> {
    joint_ts(c, schedule, mode, t, t)
        .iter()
        .map(|row| row.iter().sum())
        .collect()
}

/// `p_{s|t}(. | x_t)` as a dense vector, `None` when `x_t` has no mass at `t`.
pub fn transition(
    c: &PairCoupling,
    schedule: AlphaSchedule,
    mode: PathMode,
    x_t: &SequenceState,
    t: f64,
    s: f64,
) -> Option<Vec<f64>> {
    let joint = joint_ts(c, schedule, mode, t, s);
    let row = &joint[c.space().index_of(x_t)];
    let z: f64 = row.iter().sum();
    (z > 0.0).then(|| row.iter().map(|p| p / z).collect())
}

pub fn coordinate_marginals(space: &StateSpace, law: &[f64]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; space.d()]; space.n()];
    for (k, &p) in law.iter().enumerate() {
        let x = space.state_at(k);
        for (i, row) in m.iter_mut().enumerate() {
            row[x.get(i) as usize] += p;
        }
    }
    m
}

pub fn product_law(space: &StateSpace, marginals: &[Vec<f64>]) -> Vec<f64> {
    (0..space.require_dense().unwrap())
        .map(|k| {
            let x = space.state_at(k);
            (0..space.n()).map(|i| marginals[i][x.get(i) as usize]).product()
        })
        .collect()
}

pub fn kl_dense(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Expected KL between each transition row and the product of its marginals.
pub fn conditional_tc(c: &PairCoupling, schedule: AlphaSchedule, mode: PathMode, t: f64, s: f64) -> f64 {
    let space = *c.space();
    let joint = joint_ts(c, schedule, mode, t, s);
    let mut total = 0.0;
    for row in &joint {
        let z: f64 = row.iter().sum();
        if z <= 0.0 {
            continue;
        }
        let law: Vec<f64> = row.iter().map(|p| p / z).collect();
        let prod = product_law(&space, &coordinate_marginals(&space, &law));
        total += z * kl_dense(&law, &prod);
    }
    total
}

/// Law of `X1` after running the factorized sampler from `x0` over a uniform grid,
/// built by enumerating every intermediate state; `None` if an off-path state is reached.
pub fn factorized_composition(
    c: &PairCoupling,
    schedule: AlphaSchedule,
    mode: PathMode,
    x0: &SequenceState,
    steps: usize,
) -> Option<Vec<f64>> {
    let space = *c.space();
    let size = space.require_dense().unwrap();
    let mut law = vec![0.0; size];
    law[space.index_of(x0)] = 1.0;
    for k in 0..steps {
        let (t, s) = (k as f64 / steps as f64, (k + 1) as f64 / steps as f64);
        let mut next = vec![0.0; size];
        for (idx, &mass) in law.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let x = space.state_at(idx);
            let exact = transition(c, schedule, mode, &x, t, s)?;
            let prod = product_law(&space, &coordinate_marginals(&space, &exact));
            for (j, p) in prod.iter().enumerate() {
                next[j] += mass * p;
            }
        }
        law = next;
    }
    Some(law)
}

/// `E[h(B / m)]` for `B ~ Binomial(m, 1/2)` and binary entropy `h` in nats.
pub fn expected_binary_plugin_entropy(m: u64) -> f64 {
    let h = |p: f64| {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
        }
    };
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=m {
        total += binom * h(k as f64 / m as f64);
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    total / 2f64.powi(m as i32)
}

pub fn coupling(space: StateSpace, triples: &[(&str, &str, f64)]) -> PairCoupling {
    PairCoupling::from_triples(
        space,
        triples.iter().map(|&(a, b, w)| (st(&space, a), st(&space, b), w)),
    )
    .unwrap()
}
