//! Koopman model fitting: unconstrained EDMD and the NI-constrained program.

mod admm;
mod edmd;
mod pipeline;
mod program;

pub use admm::AdmmSettings;
pub use edmd::{edmd_fit, reduce_cost, EdmdSolution, ReducedCost};
pub use pipeline::{
    identify_ni, identify_unconstrained, run_lifted, simulate_lifted, LiftedRun, NiConfig, NiIdentification,
    DEFAULT_ALPHA,
};
pub use program::{refit_strict_b, solve_ni, NiDiagnostics, NiProgram, NiProgramSolution, StageDiagnostics};

#[cfg(test)]
mod tests;
