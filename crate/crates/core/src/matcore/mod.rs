//! Dense real/complex linear-algebra kernels.

mod cmat;
mod eig;
mod expm;
mod lu;
mod lyapunov;
mod mat;
mod spectral;

pub use cmat::CMat;
pub use eig::{gram_rank, pinv, psd_project, psd_project_warm, sym_eig, sym_eig_warm, SymEig};
pub use expm::expm;
pub use lyapunov::discrete_lyapunov;
pub use lu::{csolve, inverse, solve, Lu};
pub use mat::Mat;
pub use spectral::{spectral_radius, spectral_radius_with, SpectralRadius};

pub use num_complex::Complex64;

#[cfg(test)]
mod tests;
