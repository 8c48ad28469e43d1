//! Exact tabular laboratory for rectified discrete flows.
//!
//! Couplings between discrete source and target laws determine the true
//! transition kernels of a mixture probability path. Factorizing those kernels
//! across dimensions introduces an error measured by conditional total
//! correlation, and rectifying the coupling with the induced few-step sampler
//! drives that error down. Everything here is computed exactly on enumerable
//! spaces, with seeded Monte-Carlo counterparts where enumeration is too big.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod coupling;
pub mod dist;
pub mod error;
pub mod flow;
pub mod io;
pub mod rectify;
pub mod rng;
pub mod schedule;
pub mod space;

pub use coupling::{CouplingEntry, PairCoupling, Side};
pub use dist::{DenseDistribution, SparseDistribution};
pub use error::{Error, Result};
pub use flow::{FactorizedKernel, PathMode, ProbabilityPath, Sampler};
pub use rng::RngSpec;
pub use schedule::{AlphaSchedule, Probability, TimeGrid};
pub use space::{SequenceState, StateSpace};
