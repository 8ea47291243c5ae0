//! Baselines and reporting: Jacobian linearization of the mass-spring-damper,
//! error metrics, step responses and the model comparison report.

mod linearize;
mod metrics;
mod plots;
mod report;

pub use linearize::{linearize_msd, linearized_discrete, zoh_discretize};
pub use metrics::{mse, step_response, StepResponse, DIVERGENCE_LIMIT};
pub use plots::{write_bode_csv, write_nyquist_csv, write_step_csv, write_timeseries_csv};
pub use report::{
    closed_loop_verdict, compare_models, stability_verdict, Candidate, ClosedLoopVerdict, CompareConfig, GridSpec,
    ModelReport, PhaseEvidence, Stability, ValidationReport,
};
