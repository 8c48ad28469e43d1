//! Coupling rectification: builders, exact and sampled rectifiers, iteration,
//! the one-step model and the monotonicity battery.

pub mod battery;
pub mod builders;
pub mod iterate;
pub mod onestep;
pub mod rectifier;

pub use battery::{monotonicity_battery, BatteryReport, BatterySettings, Counterexample};
pub use builders::{
    build_fig1, build_independent, build_masked_source, build_random, fig1_source, fig1_target, masked_source,
    Fig1Coupling,
};
pub use iterate::{measure_tc, redi_iterate, RediRun, TcPoint};
pub use onestep::OneStepModel;
pub use rectifier::{rectify, rectify_exact, rectify_sampled, RectifyConfig, RectifyMethod};
