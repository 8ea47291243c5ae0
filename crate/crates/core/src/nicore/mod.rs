//! Negative-imaginary tooling: bilinear transform, LMI residuals, frequency
//! checks, the PPF controller and positive-feedback interconnection.

mod bilinear;
mod feedback;
mod frequency;
mod models;
mod residuals;

pub use bilinear::{tustin, to_continuous, to_discrete};
pub use feedback::{dc_gain, dc_gain_lambda_max, positive_feedback, ppf_realize, ClosedLoop, PpfController};
pub use frequency::{
    freq_response, log_grid, ni_frequency_check, phase_deg, NiFrequencyCheck, DEFAULT_GRID_MAX, DEFAULT_GRID_MIN,
    DEFAULT_GRID_POINTS,
};
pub use models::{ContinuousLinearModel, DiscreteLinearModel};
pub use residuals::{continuous_lyapunov_max_eig, discrete_ni_residuals, NiResiduals};
