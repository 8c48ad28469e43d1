//! Sparse and dense distributions over sequence states.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::space::{SequenceState, StateSpace};

/// Masses below this are dropped from sparse results after normalization.
pub const PRUNE_BELOW: f64 = 1e-15;

/// Normalizes in place, prunes dust below [`PRUNE_BELOW`], and renormalizes.
/// Totals already within `1e-12` of one are left untouched.
pub(crate) fn normalize_pruned(map: &mut BTreeMap<SequenceState, f64>) -> Result<()> {
    let total: f64 = map.values().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::EmptyCoupling);
    }
    if (total - 1.0).abs() > 1e-12 {
        map.values_mut().for_each(|w| *w /= total);
    }
    if map.values().any(|w| *w < PRUNE_BELOW) {
        map.retain(|_, w| *w >= PRUNE_BELOW);
        let total: f64 = map.values().sum();
        map.values_mut().for_each(|w| *w /= total);
    }
    Ok(())
}

/// A distribution stored by its support, in lexicographic state order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDistribution {
    space: StateSpace,
    probs: BTreeMap<SequenceState, f64>,
}

impl SparseDistribution {
    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(space: StateSpace, weights: impl IntoIterator<Item = (SequenceState, f64)>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (s, w) in weights {
            space.validate(&s)?;
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Validation(format!(
                    "weight {w} for state {s} is not a nonnegative number"
                )));
            }
            if w > 0.0 {
                *probs.entry(s).or_insert(0.0) += w;
            }
        }
        normalize_pruned(&mut probs)?;
        Ok(Self { space, probs })
    }

    /// Wraps an already-normalized map without renormalizing.
    pub(crate) fn from_normalized(space: StateSpace, probs: BTreeMap<SequenceState, f64>) -> Self {
        Self { space, probs }
    }

    pub fn point_mass(space: StateSpace, state: SequenceState) -> Result<Self> {
        space.validate(&state)?;
        Ok(Self {
            space,
            probs: BTreeMap::from([(state, 1.0)]),
        })
    }

    /// Uniform over the listed states.
    pub fn uniform_over(space: StateSpace, states: impl IntoIterator<Item = SequenceState>) -> Result<Self> {
        Self::from_weights(space, states.into_iter().map(|s| (s, 1.0)))
    }

    /// Uniform over all `d^n` states.
    pub fn uniform(space: StateSpace) -> Result<Self> {
        let states: Vec<_> = space.states()?.collect();
        Self::uniform_over(space, states)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn with_dense_cap(mut self, cap: u64) -> Self {
        self.space = self.space.with_dense_cap(cap);
        self
    }

    pub fn prob(&self, s: &SequenceState) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SequenceState, f64)> + '_ {
        self.probs.iter().map(|(s, &p)| (s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = &SequenceState> + '_ {
        self.probs.keys()
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<SequenceState, f64> {
        &self.probs
    }

    /// Marginal table of dimension `i`, indexed by token.
    pub fn coordinate_marginal(&self, i: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.space.d()];
        for (s, p) in self.iter() {
            m[s.get(i) as usize] += p;
        }
        m
    }

    pub fn to_dense(&self) -> Result<DenseDistribution> {
        let size = self.space.require_dense()?;
        let mut weights = vec![0.0; size];
        for (s, p) in self.iter() {
            weights[self.space.index_of(s)] = p;
        }
        Ok(DenseDistribution {
            space: self.space,
            weights,
        })
    }
}

/// A distribution stored as one weight per state of an enumerable space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDistribution {
    space: StateSpace,
    weights: Vec<f64>,
}

impl DenseDistribution {
    pub fn new(space: StateSpace, weights: Vec<f64>) -> Result<Self> {
        let size = space.require_dense()?;
        if weights.len() != size {
            return Err(Error::Validation(format!(
                "dense distribution needs {size} weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Validation("dense weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("dense weights sum to {total}, not 1")));
        }
        Ok(Self { space, weights })
    }

    pub fn uniform(space: StateSpace) -> Result<Self> {
        let size = space.require_dense()?;
        Ok(Self {
            space,
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prob(&self, s: &SequenceState) -> f64 {
        self.weights[self.space.index_of(s)]
    }

    pub fn to_sparse(&self) -> SparseDistribution {
        let probs = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (self.space.state_at(i), w))
            .collect();
        SparseDistribution {
            space: self.space,
            probs,
        }
    }
}

impl From<&DenseDistribution> for SparseDistribution {
    fn from(d: &DenseDistribution) -> Self {
        d.to_sparse()
    }
}
