//! Ancestral sampling along a time grid and exact multi-step composition.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::coupling::{PairCoupling, Side};
use crate::dist::SparseDistribution;
use crate::error::{Error, Result};
use crate::rng::{sample_index, RngSpec};
use crate::schedule::TimeGrid;
use crate::space::{SequenceState, StateSpace};

use super::kernel::FactorizedKernel;
use super::path::{check_interval, OffPathPolicy, ProbabilityPath};

/// Which one-step kernel a sampler applies at every grid interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepKernel {
    /// Product of per-dimension marginals (what a factorized model realizes).
    #[default]
    Factorized,
    /// The full joint transition; used to isolate factorization error in analysis.
    Exact,
}

/// One step's law from a concrete state.
#[derive(Debug, Clone, PartialEq)]
pub enum StepLaw {
    Factorized(FactorizedKernel),
    Joint(SparseDistribution),
}

impl StepLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SequenceState {
        match self {
            StepLaw::Factorized(k) => k.sample(rng),
            StepLaw::Joint(d) => {
                let weights: Vec<f64> = d.iter().map(|(_, p)| p).collect();
                let i = sample_index(&weights, rng);
                d.support().nth(i).expect("index within support").clone()
            }
        }
    }

    pub fn for_each_outcome(&self, mut f: impl FnMut(&SequenceState, f64)) {
        match self {
            StepLaw::Factorized(k) => k.for_each_outcome(1.0, f),
            StepLaw::Joint(d) => d.iter().for_each(|(x, p)| f(x, p)),
        }
    }
}

/// Conditional laws `p(X1 | X0 = x0)` stored as dense rows over the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    space: StateSpace,
    rows: BTreeMap<SequenceState, Vec<f64>>,
}

impl DenseKernel {
    pub fn from_rows(space: StateSpace, rows: BTreeMap<SequenceState, Vec<f64>>) -> Result<Self> {
        let size = space.require_dense()?;
        for (x0, row) in &rows {
            space.validate(x0)?;
            let total: f64 = row.iter().sum();
            if row.len() != size || row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!("kernel row {x0} is not a distribution")));
            }
        }
        Ok(Self { space, rows })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn rows(&self) -> impl Iterator<Item = (&SequenceState, &[f64])> + '_ {
        self.rows.iter().map(|(x, r)| (x, r.as_slice()))
    }

    pub fn row(&self, x0: &SequenceState) -> Option<&[f64]> {
        self.rows.get(x0).map(|r| r.as_slice())
    }

    pub fn prob(&self, x0: &SequenceState, x1: &SequenceState) -> f64 {
        self.row(x0).map_or(0.0, |r| r[self.space.index_of(x1)])
    }

    pub fn row_distribution(&self, x0: &SequenceState) -> Result<SparseDistribution> {
        let row = self.row(x0).ok_or_else(|| Error::ZeroMass { state: x0.clone() })?;
        SparseDistribution::from_weights(
            self.space,
            row.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, &p)| (self.space.state_at(j), p)),
        )
    }

    /// Law of `X1` when `X0` is drawn from `source`.
    pub fn push_forward(&self, source: &SparseDistribution) -> Result<SparseDistribution> {
        let size = self.space.require_dense()?;
        let mut out = vec![0.0; size];
        for (x0, w) in source.iter() {
            let row = self.row(x0).ok_or_else(|| Error::ZeroMass { state: x0.clone() })?;
            for (o, p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
        SparseDistribution::from_weights(
            self.space,
            out.into_iter()
                .enumerate()
                .filter(|(_, p)| *p > 0.0)
                .map(|(j, p)| (self.space.state_at(j), p)),
        )
    }
}

/// Memo of step laws keyed by `(interval index, state)`.
#[derive(Debug, Default)]
pub struct StepCache {
    laws: HashMap<(usize, SequenceState), Arc<StepLaw>>,
}

impl StepCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }
}

/// A grid sampler: a path, a temperature and a per-step kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub path: ProbabilityPath,
    pub tau: f64,
    pub kernel: StepKernel,
    pub off_path: OffPathPolicy,
}

impl Sampler {
    /// Factorized sampler that extrapolates from off-path states.
    pub fn new(path: ProbabilityPath, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("temperature must be > 0, got {tau}")));
        }
        Ok(Self {
            path,
            tau,
            kernel: StepKernel::Factorized,
            off_path: OffPathPolicy::Nearest,
        })
    }

    pub fn with_kernel(mut self, kernel: StepKernel) -> Result<Self> {
        if kernel == StepKernel::Exact && self.tau != 1.0 {
            return Err(Error::Config("temperature applies only to factorized kernels".into()));
        }
        self.kernel = kernel;
        Ok(self)
    }

    pub fn with_off_path(mut self, policy: OffPathPolicy) -> Self {
        self.off_path = policy;
        self
    }

    /// The law used to move from `x_t` at `t` to time `s`.
    pub fn step_law(&self, c: &PairCoupling, x_t: &SequenceState, t: f64, s: f64) -> Result<StepLaw> {
        check_interval(t, s)?;
        let post = self.path.posterior_with(c, x_t, t, self.off_path)?;
        Ok(match self.kernel {
            StepKernel::Factorized => StepLaw::Factorized(
                self.path
                    .factorized_from_posterior(c.space(), &post, s)
                    .apply_temperature(self.tau)?,
            ),
            StepKernel::Exact => StepLaw::Joint(self.path.transition_from_posterior(c.space(), &post, s)?),
        })
    }

    pub fn sample_step<R: Rng + ?Sized>(
        &self,
        c: &PairCoupling,
        x_t: &SequenceState,
        t: f64,
        s: f64,
        rng: &mut R,
    ) -> Result<SequenceState> {
        Ok(self.step_law(c, x_t, t, s)?.sample(rng))
    }

    fn cached_law(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        step: usize,
        x: &SequenceState,
        cache: &mut StepCache,
    ) -> Result<Arc<StepLaw>> {
        if let Some(law) = cache.laws.get(&(step, x.clone())) {
            return Ok(law.clone());
        }
        let times = grid.times();
        let law = Arc::new(self.step_law(c, x, times[step], times[step + 1])?);
        cache.laws.insert((step, x.clone()), law.clone());
        Ok(law)
    }

    fn check_source(c: &PairCoupling, x0: &SequenceState) -> Result<()> {
        c.space().validate(x0)?;
        if c.entries().iter().any(|e| &e.x0 == x0) {
            Ok(())
        } else {
            Err(Error::ZeroMass { state: x0.clone() })
        }
    }

    /// Runs the grid from `x0` and returns the state at `t = 1`.
    pub fn sample_trajectory<R: Rng + ?Sized>(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        x0: &SequenceState,
        rng: &mut R,
    ) -> Result<SequenceState> {
        self.sample_trajectory_cached(c, grid, x0, rng, &mut StepCache::new())
    }

    pub fn sample_trajectory_cached<R: Rng + ?Sized>(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        x0: &SequenceState,
        rng: &mut R,
        cache: &mut StepCache,
    ) -> Result<SequenceState> {
        Self::check_source(c, x0)?;
        let mut x = x0.clone();
        for step in 0..grid.steps() {
            x = self.cached_law(c, grid, step, &x, cache)?.sample(rng);
        }
        Ok(x)
    }

    /// Every grid state of one trajectory, `x0` first.
    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        x0: &SequenceState,
        rng: &mut R,
        cache: &mut StepCache,
    ) -> Result<Vec<SequenceState>> {
        Self::check_source(c, x0)?;
        let mut states = vec![x0.clone()];
        for step in 0..grid.steps() {
            let next = self
                .cached_law(c, grid, step, states.last().unwrap(), cache)?
                .sample(rng);
            states.push(next);
        }
        Ok(states)
    }

    /// Exact law of [`Sampler::sample_trajectory`] for every source state of `c`.
    pub fn multistep_conditional(&self, c: &PairCoupling, grid: &TimeGrid) -> Result<DenseKernel> {
        let space = *c.space();
        let size = space.require_dense().map_err(|_| Error::CapExceeded {
            what: "state space d^n",
            size: space.num_states().unwrap_or(u128::MAX),
            cap: space.dense_cap() as u128,
            hint: "exact composition is infeasible; use the sampled method",
        })?;
        let sources: Vec<SequenceState> = c.marginal(Side::Source).support().cloned().collect();
        let mut rows: Vec<Vec<f64>> = sources
            .iter()
            .map(|x0| {
                let mut r = vec![0.0; size];
                r[space.index_of(x0)] = 1.0;
                r
            })
            .collect();

        for (t, s) in grid.intervals() {
            let reachable: BTreeSet<usize> = rows
                .iter()
                .flat_map(|r| r.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(j, _)| j))
                .collect();
            let reachable: Vec<usize> = reachable.into_iter().collect();
            let laws: Vec<Vec<(usize, f64)>> = reachable
                .par_iter()
                .map(|&j| {
                    let law = self.step_law(c, &space.state_at(j), t, s)?;
                    let mut out = Vec::new();
                    law.for_each_outcome(|x, p| out.push((space.index_of(x), p)));
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            let mut table: Vec<Option<&[(usize, f64)]>> = vec![None; size];
            for (&j, law) in reachable.iter().zip(&laws) {
                table[j] = Some(law.as_slice());
            }
            rows = rows
                .par_iter()
                .map(|row| {
                    let mut next = vec![0.0; size];
                    for (j, &p) in row.iter().enumerate() {
                        if p > 0.0 {
                            for &(k, q) in table[j].expect("reachable state has a law") {
                                next[k] += p * q;
                            }
                        }
                    }
                    next
                })
                .collect();
        }

        let mut out = BTreeMap::new();
        for (x0, mut row) in sources.into_iter().zip(rows) {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-15 {
                row.iter_mut().for_each(|p| *p /= total);
            }
            out.insert(x0, row);
        }
        DenseKernel::from_rows(space, out)
    }

    /// Draws `n` source states from the coupling's source marginal and pushes
    /// each through [`Sampler::sample_trajectory`]. Draw `j` uses stream
    /// `("draw", j)`, so the output does not depend on the worker count.
    pub fn generate_pairs(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        n: usize,
        rng: &RngSpec,
    ) -> Result<Vec<(SequenceState, SequenceState)>> {
        self.generate(c, n, rng, |x0, g, cache| {
            Ok((x0.clone(), self.sample_trajectory_cached(c, grid, x0, g, cache)?))
        })
    }

    /// Like [`Sampler::generate_pairs`] but keeps every grid state; final states agree.
    pub fn generate_paths(
        &self,
        c: &PairCoupling,
        grid: &TimeGrid,
        n: usize,
        rng: &RngSpec,
    ) -> Result<Vec<Vec<SequenceState>>> {
        self.generate(c, n, rng, |x0, g, cache| self.sample_path(c, grid, x0, g, cache))
    }

    fn generate<T: Send>(
        &self,
        c: &PairCoupling,
        n: usize,
        rng: &RngSpec,
        draw: impl Fn(&SequenceState, &mut crate::rng::StreamRng, &mut StepCache) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        if n < 1 {
            return Err(Error::Validation("pair generation needs n >= 1".into()));
        }
        let source = c.marginal(Side::Source);
        let states: Vec<&SequenceState> = source.support().collect();
        let weights: Vec<f64> = source.iter().map(|(_, p)| p).collect();
        const CHUNK: usize = 4096;
        let chunks: Vec<Vec<T>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut cache = StepCache::new();
                (chunk * CHUNK..((chunk + 1) * CHUNK).min(n))
                    .map(|j| {
                        let mut g = rng.child("draw", j as u64).rng();
                        let x0 = states[sample_index(&weights, &mut g)];
                        draw(x0, &mut g, &mut cache)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(chunks.into_iter().flatten().collect())
    }
}
