//! Nonlinear plant simulation, excitation signals and the NI dissipation check.

mod dissipation;
mod input;
mod plant;
mod trajectory;

pub use dissipation::{check_dissipation, storage_value, DissipationReport};
pub use input::{make_input, InputKind, InputSignal};
pub use plant::{simulate, simulate_inputs, simulate_inputs_with_step, MsdParams, OdePlant, Plant};
pub use trajectory::TrajectoryData;
pub(crate) use trajectory::fmt_num;

/// Largest internal integration step, seconds.
pub const MAX_INTERNAL_STEP: f64 = 0.01;
pub const DEFAULT_SAMPLE_TIME: f64 = 0.01;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_AMPLITUDE: f64 = 1.0;
pub const DEFAULT_HOLD: usize = 25;

#[cfg(test)]
mod tests;
