//! Exact and factorized one-step transitions.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::coupling::PairCoupling;
use crate::dist::{normalize_pruned, SparseDistribution};
use crate::error::{Error, Result};
use crate::rng::sample_index;
use crate::space::{SequenceState, StateSpace, Token};

use super::path::{check_interval, OffPathPolicy, PosteriorTable, ProbabilityPath};

/// Product of per-dimension categorical tables, optionally tied to the state it conditions on.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedKernel {
    space: StateSpace,
    context: Option<SequenceState>,
    tables: Vec<Vec<f64>>,
}

impl FactorizedKernel {
    pub fn new(space: StateSpace, context: Option<SequenceState>, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != space.n() {
            return Err(Error::Validation(format!(
                "factorized kernel needs {} tables, got {}",
                space.n(),
                tables.len()
            )));
        }
        for (i, t) in tables.iter().enumerate() {
            let total: f64 = t.iter().sum();
            if t.len() != space.d() || t.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "table {i} is not a distribution over {} tokens",
                    space.d()
                )));
            }
        }
        Ok(Self { space, context, tables })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn context(&self) -> Option<&SequenceState> {
        self.context.as_ref()
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn table(&self, i: usize) -> &[f64] {
        &self.tables[i]
    }

    /// Product probability of a full state.
    pub fn prob(&self, x: &SequenceState) -> f64 {
        self.tables
            .iter()
            .zip(x.tokens())
            .map(|(t, &v)| t[v as usize])
            .product()
    }

    /// Reweights each table as `p^(1/tau)`; zeros stay zero.
    pub fn apply_temperature(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("temperature must be > 0, got {tau}")));
        }
        if tau == 1.0 {
            return Ok(self.clone());
        }
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let logs: Vec<f64> = t
                    .iter()
                    .map(|&p| if p > 0.0 { p.ln() / tau } else { f64::NEG_INFINITY })
                    .collect();
                let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut out: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
                let total: f64 = out.iter().sum();
                out.iter_mut().for_each(|p| *p /= total);
                out
            })
            .collect();
        Ok(Self {
            space: self.space,
            context: self.context.clone(),
            tables,
        })
    }

    /// Draws each coordinate independently.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SequenceState {
        SequenceState(self.tables.iter().map(|t| sample_index(t, rng) as Token).collect())
    }

    /// Calls `f(state, weight * prob)` for every state with positive product probability.
    pub fn for_each_outcome(&self, weight: f64, mut f: impl FnMut(&SequenceState, f64)) {
        let support: Vec<Vec<(Token, f64)>> = self
            .tables
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(v, &p)| (v as Token, p))
                    .collect()
            })
            .collect();
        let n = support.len();
        let mut cursor = vec![0usize; n];
        let mut state = SequenceState(support.iter().map(|s| s[0].0).collect());
        loop {
            let p = cursor
                .iter()
                .enumerate()
                .fold(weight, |acc, (i, &c)| acc * support[i][c].1);
            f(&state, p);
            // Odometer increment, last coordinate fastest (lexicographic order).
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                cursor[i] += 1;
                if cursor[i] < support[i].len() {
                    state.0[i] = support[i][cursor[i]].0;
                    break;
                }
                cursor[i] = 0;
                state.0[i] = support[i][0].0;
            }
        }
    }

    /// Number of states with positive product probability.
    pub fn support_size(&self) -> u128 {
        self.tables
            .iter()
            .map(|t| t.iter().filter(|&&p| p > 0.0).count() as u128)
            .product()
    }

    /// The product law as a sparse distribution.
    pub fn to_distribution(&self) -> Result<SparseDistribution> {
        let size = self.support_size();
        if size > self.space.dense_cap() as u128 {
            return Err(Error::CapExceeded {
                what: "factorized kernel support",
                size,
                cap: self.space.dense_cap() as u128,
                hint: "use sampling instead of enumeration",
            });
        }
        let mut probs = BTreeMap::new();
        self.for_each_outcome(1.0, |x, p| {
            probs.insert(x.clone(), p);
        });
        normalize_pruned(&mut probs)?;
        Ok(SparseDistribution::from_normalized(self.space, probs))
    }
}

impl ProbabilityPath {
    /// `p_{s|t}(. | x_t)`: posterior-weighted mixture of bridge laws.
    pub fn exact_transition(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        s: f64,
    ) -> Result<SparseDistribution> {
        self.exact_transition_with(c, x_t, t, s, OffPathPolicy::Error)
    }

    pub fn exact_transition_with(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        s: f64,
        policy: OffPathPolicy,
    ) -> Result<SparseDistribution> {
        check_interval(t, s)?;
        let post = self.posterior_with(c, x_t, t, policy)?;
        self.transition_from_posterior(c.space(), &post, s)
    }

    pub(crate) fn transition_from_posterior(
        &self,
        space: &StateSpace,
        post: &PosteriorTable,
        s: f64,
    ) -> Result<SparseDistribution> {
        let (alpha_t, alpha_s) = (self.alpha(post.t), self.alpha(s));
        let cap = space.dense_cap() as usize;
        let mut acc: HashMap<SequenceState, f64> = HashMap::new();
        for e in &post.entries {
            let law = self.bridge_unchecked(&post.x_t, &e.x0, &e.x1, alpha_t, alpha_s, post.mode);
            law.for_each_outcome(e.weight, |x, w| {
                *acc.entry(x.clone()).or_insert(0.0) += w;
            });
            if acc.len() > cap {
                return Err(Error::CapExceeded {
                    what: "exact transition support",
                    size: acc.len() as u128,
                    cap: cap as u128,
                    hint: "use the plugin estimator or sampled mode",
                });
            }
        }
        let mut probs: BTreeMap<SequenceState, f64> = acc.into_iter().collect();
        normalize_pruned(&mut probs)?;
        Ok(SparseDistribution::from_normalized(*space, probs))
    }

    /// Per-dimension marginals of the exact transition, computed without the joint.
    pub fn factorized_transition(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        s: f64,
    ) -> Result<FactorizedKernel> {
        self.factorized_transition_with(c, x_t, t, s, OffPathPolicy::Error)
    }

    pub fn factorized_transition_with(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        s: f64,
        policy: OffPathPolicy,
    ) -> Result<FactorizedKernel> {
        check_interval(t, s)?;
        let post = self.posterior_with(c, x_t, t, policy)?;
        Ok(self.factorized_from_posterior(c.space(), &post, s))
    }

    pub(crate) fn factorized_from_posterior(
        &self,
        space: &StateSpace,
        post: &PosteriorTable,
        s: f64,
    ) -> FactorizedKernel {
        let (alpha_t, alpha_s) = (self.alpha(post.t), self.alpha(s));
        let mut tables = vec![vec![0.0; space.d()]; space.n()];
        for e in &post.entries {
            let law = self.bridge_unchecked(&post.x_t, &e.x0, &e.x1, alpha_t, alpha_s, post.mode);
            for (i, table) in tables.iter_mut().enumerate() {
                law.coordinate(i).accumulate(e.weight, table);
            }
        }
        for table in tables.iter_mut() {
            let total: f64 = table.iter().sum();
            if (total - 1.0).abs() > 1e-15 {
                table.iter_mut().for_each(|p| *p /= total);
            }
        }
        FactorizedKernel {
            space: *space,
            context: Some(post.x_t.clone()),
            tables,
        }
    }
}
