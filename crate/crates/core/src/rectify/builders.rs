//! Coupling constructors.

use std::collections::BTreeSet;

use rand::Rng;

use crate::coupling::{CouplingEntry, PairCoupling};
use crate::dist::SparseDistribution;
use crate::error::{Error, Result};
use crate::rng::RngSpec;
use crate::space::{SequenceState, StateSpace};

/// The two couplings of the 2-bit toy problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Coupling {
    /// Independent coupling of the toy marginals.
    Pi0,
    /// Deterministic pairing `00->00, 01->11, 10->00, 11->11`.
    Pi1,
}

pub fn fig1_space() -> StateSpace {
    StateSpace::new(2, 2).expect("2-bit space is valid")
}

fn bits(s: &str) -> SequenceState {
    SequenceState::from_digits(s).expect("literal bit string")
}

/// Uniform over `{00, 01, 10, 11}`.
pub fn fig1_source() -> SparseDistribution {
    SparseDistribution::uniform(fig1_space()).expect("4-state space is enumerable")
}

/// Uniform over `{00, 11}`.
pub fn fig1_target() -> SparseDistribution {
    SparseDistribution::uniform_over(fig1_space(), [bits("00"), bits("11")]).expect("nonempty support")
}

pub fn build_fig1(which: Fig1Coupling) -> PairCoupling {
    match which {
        Fig1Coupling::Pi0 => build_independent(&fig1_source(), &fig1_target()).expect("same space"),
        Fig1Coupling::Pi1 => PairCoupling::from_triples(
            fig1_space(),
            [("00", "00"), ("01", "11"), ("10", "00"), ("11", "11")]
                .into_iter()
                .map(|(a, b)| (bits(a), bits(b), 0.25)),
        )
        .expect("valid literal coupling"),
    }
}

/// `pi(x0, x1) = p0(x0) q1(x1)`.
pub fn build_independent(p0: &SparseDistribution, q1: &SparseDistribution) -> Result<PairCoupling> {
    p0.space().check_same(q1.space())?;
    let mut entries = Vec::with_capacity(p0.support_len() * q1.support_len());
    for (x0, a) in p0.iter() {
        for (x1, b) in q1.iter() {
            entries.push(CouplingEntry::new(x0.clone(), x1.clone(), a * b));
        }
    }
    PairCoupling::from_entries(*p0.space(), entries)
}

/// Source `(1 - r) uniform + r delta_mask` over all `d^n` states, coupled independently with `q1`.
pub fn masked_source(space: &StateSpace, r: f64) -> Result<SparseDistribution> {
    let mask = space
        .all_mask()
        .ok_or_else(|| Error::Config("masked source needs a designated mask token".into()))?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("interpolation ratio {r} is outside [0, 1]")));
    }
    let size = space.require_dense()? as f64;
    let uniform = (1.0 - r) / size;
    let weights: Vec<(SequenceState, f64)> = space
        .states()?
        .map(|x| {
            let w = if x == mask { uniform + r } else { uniform };
            (x, w)
        })
        .collect();
    SparseDistribution::from_weights(*space, weights)
}

pub fn build_masked_source(space: &StateSpace, r: f64, q1: &SparseDistribution) -> Result<PairCoupling> {
    let source = masked_source(space, r)?;
    let q1 = SparseDistribution::from_weights(*space, q1.iter().map(|(x, p)| (x.clone(), p)))?;
    build_independent(&source, &q1)
}

/// `support_size` distinct pairs with positive random weights.
pub fn build_random(space: &StateSpace, support_size: usize, rng: &RngSpec) -> Result<PairCoupling> {
    let states = space.require_dense()? as u64;
    let pairs = states * states;
    if support_size < 1 || support_size as u64 > pairs {
        return Err(Error::Validation(format!(
            "support size must lie in [1, {pairs}], got {support_size}"
        )));
    }
    let mut g = rng.rng();
    // Floyd's algorithm: exactly `support_size` distinct indices.
    let mut chosen = BTreeSet::new();
    for j in (pairs - support_size as u64)..pairs {
        let k = g.gen_range(0..=j);
        if !chosen.insert(k) {
            chosen.insert(j);
        }
    }
    let entries = chosen
        .into_iter()
        .map(|k| {
            let x0 = space.state_at((k / states) as usize);
            let x1 = space.state_at((k % states) as usize);
            CouplingEntry::new(x0, x1, 1.0 - g.gen::<f64>())
        })
        .collect();
    PairCoupling::from_entries(*space, entries)
}
