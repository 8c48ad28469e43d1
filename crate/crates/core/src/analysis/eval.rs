//! Generation quality against a known target law.

use std::collections::BTreeMap;

use crate::coupling::{PairCoupling, Side};
use crate::dist::SparseDistribution;
use crate::error::Result;
use crate::flow::Sampler;
use crate::rng::RngSpec;
use crate::schedule::TimeGrid;
use crate::space::SequenceState;

use super::divergence::{kl, tv};

/// Smoothing applied to the generated law when computing `KL(target || generated)`.
pub const DEFAULT_KL_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub tv_to_target: f64,
    /// `KL(target || generated)` with the generated side smoothed.
    pub kl_target_generated: f64,
    /// Fraction of target-support states that receive positive generated mass.
    pub support_coverage: f64,
    pub steps: usize,
}

/// How the generated law is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerationMode {
    /// Exact multi-step composition pushed forward through the source marginal.
    ExactCompose,
    /// Empirical law of `n` seeded trajectories.
    MonteCarlo { n: usize, rng: RngSpec },
}

/// Compares a generated law with the target.
pub fn evaluate_law(generated: &SparseDistribution, target: &SparseDistribution, steps: usize) -> Result<EvalReport> {
    target.space().check_same(generated.space())?;
    let covered = target.support().filter(|x| generated.prob(x) > 0.0).count();
    Ok(EvalReport {
        tv_to_target: tv(generated, target)?,
        kl_target_generated: kl(target, generated, Some(DEFAULT_KL_SMOOTHING))?.max(0.0),
        support_coverage: covered as f64 / target.support_len() as f64,
        steps,
    })
}

/// Empirical distribution of a list of states.
pub fn empirical(samples: &[SequenceState], space: crate::space::StateSpace) -> Result<SparseDistribution> {
    let mut counts: BTreeMap<SequenceState, f64> = BTreeMap::new();
    for x in samples {
        *counts.entry(x.clone()).or_insert(0.0) += 1.0;
    }
    SparseDistribution::from_weights(space, counts)
}

/// Generated `X1` law of a coupling's sampler, scored against `target`.
pub fn eval_generation(
    c: &PairCoupling,
    grid: &TimeGrid,
    target: &SparseDistribution,
    sampler: &Sampler,
    mode: &GenerationMode,
) -> Result<EvalReport> {
    target.space().check_same(c.space())?;
    let generated = match mode {
        GenerationMode::ExactCompose => {
            let kernel = sampler.multistep_conditional(c, grid)?;
            kernel.push_forward(&c.marginal(Side::Source))?
        }
        GenerationMode::MonteCarlo { n, rng } => {
            let pairs = sampler.generate_pairs(c, grid, *n, rng)?;
            let x1s: Vec<SequenceState> = pairs.into_iter().map(|(_, x1)| x1).collect();
            empirical(&x1s, *c.space())?
        }
    };
    evaluate_law(&generated, target, grid.steps())
}
