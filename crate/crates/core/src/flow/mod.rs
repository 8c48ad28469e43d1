//! Probability-path machinery: conditional path, bridge, posterior, exact and
//! factorized transitions, grid sampling and exact multi-step composition.

mod kernel;
mod path;
mod sampler;

pub use kernel::FactorizedKernel;
pub use path::{BridgeLaw, CoordinateLaw, OffPathPolicy, PathMode, PosteriorEntry, PosteriorTable, ProbabilityPath};
pub use sampler::{DenseKernel, Sampler, StepCache, StepKernel, StepLaw};
