//! Conditional total correlation: exact enumeration and the frequency plug-in estimator.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::coupling::PairCoupling;
use crate::dist::SparseDistribution;
use crate::error::{Error, Result};
use crate::flow::{BridgeLaw, CoordinateLaw, PathMode, ProbabilityPath};
use crate::rng::{sample_index, RngSpec};
use crate::space::{SequenceState, Token};

/// Default limit on the number of intermediate states enumerated by [`conditional_tc_exact`].
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcMethod {
    Exact,
    Plugin,
}

impl fmt::Display for TcMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TcMethod::Exact => "exact",
            TcMethod::Plugin => "plugin",
        })
    }
}

/// A conditional TC value in nats with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TcReport {
    pub t: f64,
    pub s: f64,
    pub value_nats: f64,
    pub method: TcMethod,
    pub roots: Option<usize>,
    pub samples_per_root: Option<usize>,
    pub seed: Option<RngSpec>,
    pub truncated: bool,
}

/// Neumaier-compensated sum in iteration order.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Marginal `p_t(x_t)` of the path under coupling `c`.
pub fn path_marginal(
    path: &ProbabilityPath,
    c: &PairCoupling,
    t: f64,
    support_cap: usize,
) -> Result<SparseDistribution> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("time {t} is outside [0, 1]")));
    }
    let alpha = path.schedule.alpha_at(t)?.value();
    let mut acc: HashMap<SequenceState, f64> = HashMap::new();
    for e in c.entries() {
        let law = match path.mode {
            PathMode::Holistic => BridgeLaw::Holistic {
                stay: e.x0.clone(),
                to: e.x1.clone(),
                p_switch: alpha,
            },
            PathMode::Coordinatewise => BridgeLaw::Coordinatewise(
                e.x0.tokens()
                    .iter()
                    .zip(e.x1.tokens())
                    .map(|(&a, &b): (&Token, &Token)| {
                        if a == b || alpha <= 0.0 {
                            CoordinateLaw::Point(a)
                        } else if alpha >= 1.0 {
                            CoordinateLaw::Point(b)
                        } else {
                            CoordinateLaw::Switch {
                                stay: a,
                                to: b,
                                p_switch: alpha,
                            }
                        }
                    })
                    .collect(),
            ),
        };
        law.for_each_outcome(e.weight, |x, w| {
            *acc.entry(x.clone()).or_insert(0.0) += w;
        });
        if acc.len() > support_cap {
            return Err(Error::CapExceeded {
                what: "intermediate-state support",
                size: acc.len() as u128,
                cap: support_cap as u128,
                hint: "use the plugin estimator",
            });
        }
    }
    SparseDistribution::from_weights(*c.space(), acc.into_iter().filter(|(_, w)| *w > 0.0))
}

/// `KL(joint || product of its coordinate marginals)` for one conditional law.
fn kl_from_marginals(joint: &SparseDistribution, marginals: &[Vec<f64>]) -> f64 {
    compensated_sum(joint.iter().map(|(x, p)| {
        let q: f64 = marginals.iter().zip(x.tokens()).map(|(m, &v)| m[v as usize]).product();
        p * (p / q).ln()
    }))
    .max(0.0)
}

/// Exact `E_{x_t ~ p_t} KL(p_{s|t}(.|x_t) || prod_i p_{s|t}(.^i|x_t))` in nats.
pub fn conditional_tc_exact(
    path: &ProbabilityPath,
    c: &PairCoupling,
    t: f64,
    s: f64,
    support_cap: usize,
) -> Result<TcReport> {
    if !(t < s) {
        return Err(Error::Domain(format!("conditional TC needs t < s, got t={t} s={s}")));
    }
    let marginal = path_marginal(path, c, t, support_cap)?;
    let states: Vec<(&SequenceState, f64)> = marginal.iter().collect();
    let terms: Vec<f64> = states
        .par_iter()
        .map(|&(x_t, w)| {
            let joint = path.exact_transition(c, x_t, t, s)?;
            let factors = path.factorized_transition(c, x_t, t, s)?;
            Ok(w * kl_from_marginals(&joint, factors.tables()))
        })
        .collect::<Result<_>>()?;
    Ok(TcReport {
        t,
        s,
        value_nats: compensated_sum(terms),
        method: TcMethod::Exact,
        roots: None,
        samples_per_root: None,
        seed: None,
        truncated: false,
    })
}

/// `KL(pi || p(x0) prod_i p(x1^i | x0))`, the single-divergence form of `TC(X1 | X0)`,
/// computed directly from the coupling rows.
pub fn tc_joint_divergence(c: &PairCoupling) -> f64 {
    let d = c.space().d();
    let n = c.space().n();
    let mut terms = Vec::with_capacity(c.len());
    for (_, (mass, row)) in c.rows() {
        let mut marginals = vec![vec![0.0; d]; n];
        for (x1, w) in &row {
            for (i, m) in marginals.iter_mut().enumerate() {
                m[x1.get(i) as usize] += w / mass;
            }
        }
        for (x1, w) in row {
            let q: f64 = mass
                * marginals
                    .iter()
                    .zip(x1.tokens())
                    .map(|(m, &v)| m[v as usize])
                    .product::<f64>();
            terms.push(w * (w / q).ln());
        }
    }
    compensated_sum(terms).max(0.0)
}

/// Plug-in TC of an i.i.d. sample: KL between the empirical joint and the
/// product of empirical per-dimension frequencies.
pub fn plugin_tc_of_samples(samples: &[SequenceState], d: usize) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples[0].len();
    let m = samples.len() as f64;
    let mut joint: BTreeMap<&SequenceState, usize> = BTreeMap::new();
    let mut marginals = vec![vec![0usize; d]; n];
    for x in samples {
        *joint.entry(x).or_insert(0) += 1;
        for (i, &v) in x.tokens().iter().enumerate() {
            marginals[i][v as usize] += 1;
        }
    }
    let value = compensated_sum(joint.iter().map(|(x, &count)| {
        let f = count as f64 / m;
        let log_q: f64 = x
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, &v)| (marginals[i][v as usize] as f64 / m).ln())
            .sum();
        f * (f.ln() - log_q)
    }));
    value.max(0.0)
}

/// Cumulative table for repeated inverse-CDF draws.
struct Cumulative<'a> {
    states: Vec<&'a SequenceState>,
    cdf: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    fn new(d: &'a SparseDistribution) -> Self {
        let mut acc = 0.0;
        let mut states = Vec::with_capacity(d.support_len());
        let mut cdf = Vec::with_capacity(d.support_len());
        for (x, p) in d.iter() {
            acc += p;
            states.push(x);
            cdf.push(acc);
        }
        Self { states, cdf }
    }

    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> &'a SequenceState {
        let u = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(self.states.len() - 1);
        self.states[i]
    }
}

fn check_plugin_settings(roots: usize, samples_per_root: usize) -> Result<()> {
    if roots < 1 {
        return Err(Error::Validation("plugin estimator needs roots >= 1".into()));
    }
    if samples_per_root < 2 {
        return Err(Error::Validation("plugin estimator needs samples_per_root >= 2".into()));
    }
    Ok(())
}

fn plugin_at(exact: &SparseDistribution, samples_per_root: usize, rng: &RngSpec) -> f64 {
    let table = Cumulative::new(exact);
    let mut r = rng.rng();
    let samples: Vec<SequenceState> = (0..samples_per_root).map(|_| table.draw(&mut r).clone()).collect();
    plugin_tc_of_samples(&samples, exact.space().d())
}

/// Frequency plug-in estimate of conditional TC.
///
/// Draws `roots` states `x_t ~ p_t`, then `samples_per_root` draws of `X_s` from
/// the exact transition at each, and averages the per-root plug-in divergences.
pub fn conditional_tc_plugin(
    path: &ProbabilityPath,
    c: &PairCoupling,
    t: f64,
    s: f64,
    roots: usize,
    samples_per_root: usize,
    rng: &RngSpec,
) -> Result<TcReport> {
    check_plugin_settings(roots, samples_per_root)?;
    if !(t < s) {
        return Err(Error::Domain(format!("conditional TC needs t < s, got t={t} s={s}")));
    }
    let weights: Vec<f64> = c.entries().iter().map(|e| e.weight).collect();
    let root_states: Vec<SequenceState> = (0..roots)
        .map(|r| {
            let mut g = rng.child("plugin-root", r as u64).rng();
            let e = &c.entries()[sample_index(&weights, &mut g)];
            path.sample_intermediate(&e.x0, &e.x1, t, &mut g)
        })
        .collect::<Result<_>>()?;
    let distinct: Vec<&SequenceState> = {
        let mut v: Vec<&SequenceState> = root_states.iter().collect();
        v.sort();
        v.dedup();
        v
    };
    let transitions: HashMap<&SequenceState, SparseDistribution> = distinct
        .par_iter()
        .map(|&x| Ok((x, path.exact_transition(c, x, t, s)?)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = root_states
        .par_iter()
        .enumerate()
        .map(|(r, x)| {
            plugin_at(
                &transitions[x],
                samples_per_root,
                &rng.child("plugin-samples", r as u64),
            )
        })
        .collect();
    Ok(TcReport {
        t,
        s,
        value_nats: compensated_sum(values) / roots as f64,
        method: TcMethod::Plugin,
        roots: Some(roots),
        samples_per_root: Some(samples_per_root),
        seed: Some(rng.clone()),
        truncated: false,
    })
}

/// Plug-in estimate at one fixed conditioning state.
pub fn plugin_tc_at_root(
    path: &ProbabilityPath,
    c: &PairCoupling,
    x_t: &SequenceState,
    t: f64,
    s: f64,
    samples_per_root: usize,
    rng: &RngSpec,
) -> Result<f64> {
    check_plugin_settings(1, samples_per_root)?;
    let exact = path.exact_transition(c, x_t, t, s)?;
    Ok(plugin_at(&exact, samples_per_root, rng))
}

/// Exact per-root divergence `KL(p_{s|t}(.|x_t) || prod_i p_{s|t}(.^i|x_t))`.
pub fn tc_at_root(path: &ProbabilityPath, c: &PairCoupling, x_t: &SequenceState, t: f64, s: f64) -> Result<f64> {
    let joint = path.exact_transition(c, x_t, t, s)?;
    let factors = path.factorized_transition(c, x_t, t, s)?;
    Ok(kl_from_marginals(&joint, factors.tables()))
}
