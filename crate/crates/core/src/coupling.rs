//! Weighted pair lists representing joint laws over `(X0, X1)`.

use std::collections::BTreeMap;

use crate::dist::{SparseDistribution, PRUNE_BELOW};
use crate::error::{Error, Result};
use crate::space::{SequenceState, StateSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEntry {
    pub x0: SequenceState,
    pub x1: SequenceState,
    pub weight: f64,
}

impl CouplingEntry {
    pub fn new(x0: SequenceState, x1: SequenceState, weight: f64) -> Self {
        Self { x0, x1, weight }
    }
}

/// Which endpoint of a coupling to marginalize onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Source mass and `(x1, weight)` pairs of one coupling row.
pub type Row<'a> = (f64, Vec<(&'a SequenceState, f64)>);

/// A joint distribution over `(X0, X1)` stored as a sparse entry list.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoupling {
    space: StateSpace,
    entries: Vec<CouplingEntry>,
    canonical: bool,
}

impl PairCoupling {
    /// Validates entries; the result is not yet normalized.
    pub fn new(space: StateSpace, entries: Vec<CouplingEntry>) -> Result<Self> {
        for e in &entries {
            space.validate(&e.x0)?;
            space.validate(&e.x1)?;
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::Validation(format!(
                    "weight {} for pair ({}, {}) is not a nonnegative number",
                    e.weight, e.x0, e.x1
                )));
            }
        }
        Ok(Self {
            space,
            entries,
            canonical: false,
        })
    }

    /// Builds and canonicalizes in one step.
    pub fn from_entries(space: StateSpace, entries: Vec<CouplingEntry>) -> Result<Self> {
        Self::new(space, entries)?.normalize()
    }

    pub fn from_triples(
        space: StateSpace,
        triples: impl IntoIterator<Item = (SequenceState, SequenceState, f64)>,
    ) -> Result<Self> {
        Self::from_entries(
            space,
            triples
                .into_iter()
                .map(|(a, b, w)| CouplingEntry::new(a, b, w))
                .collect(),
        )
    }

    /// Canonical form: sorted by `(x0, x1)`, duplicates merged, total weight 1,
    /// masses below `1e-15` pruned.
    ///
    /// Weights already summing to 1 within `1e-12` are kept bit-for-bit, which
    /// makes the operation idempotent and file round-trips exact.
    pub fn normalize(mut self) -> Result<Self> {
        if self.canonical {
            return Ok(self);
        }
        self.entries
            .sort_by(|a, b| (&a.x0, &a.x1).cmp(&(&b.x0, &b.x1)).then(a.weight.total_cmp(&b.weight)));
        let mut merged: Vec<CouplingEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries {
            match merged.last_mut() {
                Some(last) if last.x0 == e.x0 && last.x1 == e.x1 => last.weight += e.weight,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.weight > 0.0);
        let total: f64 = merged.iter().map(|e| e.weight).sum();
        if !(total > 0.0) {
            return Err(Error::EmptyCoupling);
        }
        if (total - 1.0).abs() > 1e-12 {
            merged.iter_mut().for_each(|e| e.weight /= total);
        }
        if merged.iter().any(|e| e.weight < PRUNE_BELOW) {
            merged.retain(|e| e.weight >= PRUNE_BELOW);
            let total: f64 = merged.iter().map(|e| e.weight).sum();
            merged.iter_mut().for_each(|e| e.weight /= total);
        }
        Ok(Self {
            space: self.space,
            entries: merged,
            canonical: true,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Same coupling over a space with a different enumeration cap.
    pub fn with_dense_cap(mut self, cap: u64) -> Self {
        self.space = self.space.with_dense_cap(cap);
        self
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn marginal(&self, which: Side) -> SparseDistribution {
        let mut probs: BTreeMap<SequenceState, f64> = BTreeMap::new();
        for e in &self.entries {
            let key = match which {
                Side::Source => &e.x0,
                Side::Target => &e.x1,
            };
            *probs.entry(key.clone()).or_insert(0.0) += e.weight;
        }
        let total: f64 = probs.values().sum();
        if total != 1.0 && total > 0.0 {
            probs.values_mut().for_each(|p| *p /= total);
        }
        SparseDistribution::from_normalized(self.space, probs)
    }

    /// `p(x1 | x0) = pi(x0, x1) / p(x0)`.
    pub fn conditional(&self, x0: &SequenceState) -> Result<SparseDistribution> {
        let mut probs: BTreeMap<SequenceState, f64> = BTreeMap::new();
        for e in self.entries.iter().filter(|e| &e.x0 == x0) {
            *probs.entry(e.x1.clone()).or_insert(0.0) += e.weight;
        }
        let mass: f64 = probs.values().sum();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass { state: x0.clone() });
        }
        probs.values_mut().for_each(|p| *p /= mass);
        Ok(SparseDistribution::from_normalized(self.space, probs))
    }

    /// Entries grouped by source state, with the source mass of each group.
    pub fn rows(&self) -> BTreeMap<&SequenceState, Row<'_>> {
        let mut rows: BTreeMap<&SequenceState, Row<'_>> = BTreeMap::new();
        for e in &self.entries {
            let row = rows.entry(&e.x0).or_insert((0.0, Vec::new()));
            row.0 += e.weight;
            row.1.push((&e.x1, e.weight));
        }
        rows
    }

    /// True when every source state maps to a single target state.
    pub fn is_deterministic(&self) -> bool {
        self.rows()
            .values()
            .all(|(_, xs)| xs.iter().all(|(x1, _)| *x1 == xs[0].0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> StateSpace {
        StateSpace::new(2, 2).unwrap()
    }

    fn st(d: &str) -> SequenceState {
        SequenceState::from_digits(d).unwrap()
    }

    #[test]
    fn merges_duplicates() {
        let c = PairCoupling::from_triples(sp(), [(st("00"), st("11"), 0.3), (st("00"), st("11"), 0.3)]).unwrap();
        assert_eq!(c.entries(), &[CouplingEntry::new(st("00"), st("11"), 1.0)]);
    }

    #[test]
    fn halves_weights_summing_to_two() {
        let c = PairCoupling::from_triples(sp(), [(st("01"), st("11"), 1.2), (st("00"), st("11"), 0.8)]).unwrap();
        assert_eq!(c.entries()[0], CouplingEntry::new(st("00"), st("11"), 0.4));
        assert_eq!(c.entries()[1], CouplingEntry::new(st("01"), st("11"), 0.6));
    }

    #[test]
    fn canonical_input_is_unchanged() {
        let c = PairCoupling::from_triples(sp(), [(st("00"), st("00"), 0.25), (st("01"), st("11"), 0.75)]).unwrap();
        let again = PairCoupling::new(sp(), c.entries().to_vec())
            .unwrap()
            .normalize()
            .unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            PairCoupling::from_triples(sp(), [(st("00"), st("00"), 0.0)]),
            Err(Error::EmptyCoupling)
        ));
        assert!(matches!(
            PairCoupling::from_triples(sp(), [(st("00"), st("00"), -1.0)]),
            Err(Error::Validation(_))
        ));
        assert!(PairCoupling::from_triples(sp(), [(st("00"), st("02"), 1.0)]).is_err());
        let c = PairCoupling::from_triples(sp(), [(st("00"), st("00"), 1.0)]).unwrap();
        assert!(matches!(c.conditional(&st("11")), Err(Error::ZeroMass { .. })));
    }

    #[test]
    fn deterministic_coupling_marginals() {
        let c = PairCoupling::from_triples(sp(), [(st("01"), st("10"), 1.0)]).unwrap();
        assert_eq!(c.marginal(Side::Source).prob(&st("01")), 1.0);
        assert_eq!(c.marginal(Side::Target).prob(&st("10")), 1.0);
        assert!(c.is_deterministic());
    }
}
