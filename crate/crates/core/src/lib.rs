//! Learning lifted linear models of nonlinear negative-imaginary (NI) systems.
//!
//! The pipeline simulates a plant ([`dynamics`]), lifts trajectories through a
//! thin-plate RBF dictionary ([`lifting`]), fits an EDMD model and the
//! NI-constrained convex program ([`identify`]), and checks the result with
//! NI-specific tools ([`nicore`]) and baseline comparisons ([`analysis`]).

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod identify;
pub mod lifting;
pub mod matcore;
pub mod model_io;
pub mod nicore;
pub mod tol;

pub use error::{Error, Result};
pub use matcore::{CMat, Mat};
