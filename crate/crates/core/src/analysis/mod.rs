//! Factorization-error measurement and generation metrics.

pub mod divergence;
pub mod eval;
pub mod metrics;
pub mod tc;

pub use divergence::{kl, tv};
pub use eval::{eval_generation, evaluate_law, EvalReport, GenerationMode};
pub use tc::{
    conditional_tc_exact, conditional_tc_plugin, plugin_tc_at_root, tc_at_root, tc_joint_divergence, TcMethod,
    TcReport, DEFAULT_SUPPORT_CAP,
};
