//! One rectification step: replace `pi(x0, x1)` by `p(x0) p_theta(x1 | x0)`.

use std::fmt;

use crate::coupling::{CouplingEntry, PairCoupling, Side};
use crate::error::{Error, Result};
use crate::flow::{OffPathPolicy, PathMode, ProbabilityPath, Sampler, StepKernel};
use crate::rng::RngSpec;
use crate::schedule::{AlphaSchedule, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectifyMethod {
    /// Exact multi-step composition over the enumerable space.
    Exact,
    /// Empirical coupling of `pairs` generated `(x0, x1)` pairs.
    Sampled { pairs: usize },
}

impl fmt::Display for RectifyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RectifyMethod::Exact => f.write_str("exact"),
            RectifyMethod::Sampled { pairs } => write!(f, "sampled:{pairs}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectifyConfig {
    pub grid: TimeGrid,
    pub schedule: AlphaSchedule,
    pub mode: PathMode,
    pub tau: f64,
    pub method: RectifyMethod,
    /// Kernel the generator applies per step; factorized unless probing the exact-kernel case.
    pub kernel: StepKernel,
    /// How the generator treats states no coupling pair can reach.
    pub off_path: OffPathPolicy,
    pub rng: RngSpec,
}

impl RectifyConfig {
    /// Exact rectification with `steps` uniform steps, linear schedule, coordinatewise path, `tau = 1`.
    pub fn exact(steps: usize) -> Result<Self> {
        Ok(Self {
            grid: TimeGrid::uniform(steps)?,
            schedule: AlphaSchedule::Linear,
            mode: PathMode::Coordinatewise,
            tau: 1.0,
            method: RectifyMethod::Exact,
            kernel: StepKernel::Factorized,
            off_path: OffPathPolicy::Nearest,
            rng: RngSpec::root(0),
        })
    }

    pub fn sampled(steps: usize, pairs: usize, rng: RngSpec) -> Result<Self> {
        Ok(Self {
            method: RectifyMethod::Sampled { pairs },
            rng,
            ..Self::exact(steps)?
        })
    }

    pub fn path(&self) -> ProbabilityPath {
        ProbabilityPath::new(self.schedule, self.mode)
    }

    pub fn sampler(&self) -> Result<Sampler> {
        Ok(Sampler::new(self.path(), self.tau)?
            .with_kernel(self.kernel)?
            .with_off_path(self.off_path))
    }

    pub fn validate(&self) -> Result<()> {
        if let RectifyMethod::Sampled { pairs } = self.method {
            if pairs < 1 {
                return Err(Error::Validation("sampled rectification needs pairs >= 1".into()));
            }
        }
        self.sampler().map(|_| ())
    }
}

/// Rectifies exactly: conditional rows become the sampler's multi-step law,
/// the source marginal is kept as is.
pub fn rectify_exact(c: &PairCoupling, cfg: &RectifyConfig) -> Result<PairCoupling> {
    cfg.validate()?;
    let kernel = cfg.sampler()?.multistep_conditional(c, &cfg.grid)?;
    let space = *c.space();
    let source = c.marginal(Side::Source);
    let mut entries = Vec::new();
    for (x0, mass) in source.iter() {
        let row = kernel.row(x0).expect("kernel has a row per source state");
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                entries.push(CouplingEntry::new(x0.clone(), space.state_at(j), mass * p));
            }
        }
    }
    PairCoupling::from_entries(space, entries)
}

/// Rectifies from `pairs` generated samples, each weighted `1 / pairs`.
///
/// Pair `j` draws its source state and trajectory from stream `("draw", j)` of `cfg.rng`.
pub fn rectify_sampled(c: &PairCoupling, cfg: &RectifyConfig) -> Result<PairCoupling> {
    cfg.validate()?;
    let RectifyMethod::Sampled { pairs } = cfg.method else {
        return Err(Error::Config("rectify_sampled needs a sampled method".into()));
    };
    let generated = cfg.sampler()?.generate_pairs(c, &cfg.grid, pairs, &cfg.rng)?;
    let w = 1.0 / pairs as f64;
    PairCoupling::from_entries(
        *c.space(),
        generated
            .into_iter()
            .map(|(x0, x1)| CouplingEntry::new(x0, x1, w))
            .collect(),
    )
}

pub fn rectify(c: &PairCoupling, cfg: &RectifyConfig) -> Result<PairCoupling> {
    match cfg.method {
        RectifyMethod::Exact => rectify_exact(c, cfg),
        RectifyMethod::Sampled { .. } => rectify_sampled(c, cfg),
    }
}
