//! One-step factorized model fit directly on the `0 -> 1` transition.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::coupling::{PairCoupling, Side};
use crate::dist::{normalize_pruned, SparseDistribution};
use crate::error::{Error, Result};
use crate::flow::FactorizedKernel;
use crate::rng::{sample_index, RngSpec};
use crate::space::{SequenceState, StateSpace};

/// Per-source factorized kernels whose tables are the coordinate marginals of
/// `p(x1 | x0)`: the optimum a one-step factorized model converges to.
#[derive(Debug, Clone, PartialEq)]
pub struct OneStepModel {
    space: StateSpace,
    source: SparseDistribution,
    rows: BTreeMap<SequenceState, FactorizedKernel>,
}

impl OneStepModel {
    pub fn fit(c: &PairCoupling) -> Result<Self> {
        let space = *c.space();
        let mut rows = BTreeMap::new();
        for (x0, (mass, row)) in c.rows() {
            let mut tables = vec![vec![0.0; space.d()]; space.n()];
            for (x1, w) in row {
                for (i, t) in tables.iter_mut().enumerate() {
                    t[x1.get(i) as usize] += w / mass;
                }
            }
            rows.insert(x0.clone(), FactorizedKernel::new(space, Some(x0.clone()), tables)?);
        }
        Ok(Self {
            space,
            source: c.marginal(Side::Source),
            rows,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn kernel(&self, x0: &SequenceState) -> Option<&FactorizedKernel> {
        self.rows.get(x0)
    }

    pub fn kernels(&self) -> impl Iterator<Item = (&SequenceState, &FactorizedKernel)> + '_ {
        self.rows.iter()
    }

    /// Exact law of the generated `X1` with `X0` drawn from the source marginal.
    pub fn generated_law(&self, tau: f64) -> Result<SparseDistribution> {
        let mut acc: BTreeMap<SequenceState, f64> = BTreeMap::new();
        for (x0, w) in self.source.iter() {
            let k = self.rows[x0].apply_temperature(tau)?;
            if k.support_size() > self.space.dense_cap() as u128 {
                return Err(Error::CapExceeded {
                    what: "one-step kernel support",
                    size: k.support_size(),
                    cap: self.space.dense_cap() as u128,
                    hint: "use sampling instead of enumeration",
                });
            }
            k.for_each_outcome(w, |x, p| *acc.entry(x.clone()).or_insert(0.0) += p);
        }
        normalize_pruned(&mut acc)?;
        SparseDistribution::from_weights(self.space, acc)
    }

    /// `n` generated pairs; pair `j` uses stream `("onestep", j)`.
    pub fn sample(&self, n: usize, tau: f64, rng: &RngSpec) -> Result<Vec<(SequenceState, SequenceState)>> {
        if n < 1 {
            return Err(Error::Validation("need at least one sample".into()));
        }
        let tempered: BTreeMap<&SequenceState, FactorizedKernel> = self
            .rows
            .iter()
            .map(|(x, k)| Ok((x, k.apply_temperature(tau)?)))
            .collect::<Result<_>>()?;
        let states: Vec<&SequenceState> = self.source.support().collect();
        let weights: Vec<f64> = self.source.iter().map(|(_, p)| p).collect();
        Ok((0..n)
            .into_par_iter()
            .map(|j| {
                let mut g = rng.child("onestep", j as u64).rng();
                let x0 = states[sample_index(&weights, &mut g)];
                (x0.clone(), tempered[x0].sample(&mut g))
            })
            .collect())
    }
}
