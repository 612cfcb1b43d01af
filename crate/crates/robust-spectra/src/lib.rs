//! Robust covariance eigenvalue estimation and spectral cut-off PCA.
//!
//! The estimator works direction by direction: an influence-function
//! M-estimator gives a confidence interval for θᵀΣθ on every point θ of a
//! δ-net of the unit sphere, and the matrix estimate is the symmetric matrix
//! of minimal Frobenius norm compatible with all of those intervals. Its
//! positive part feeds robust PCA, either through top-r projectors or
//! through smooth spectral cut-offs whose Lipschitz constant replaces the
//! eigengap in the error bounds.
//!
//! Modules follow the pipeline: [`net`] builds the constraint grid,
//! [`robust_direction`] estimates per-direction energies, [`estimator`]
//! assembles the matrix, [`spectral`] carries the eigensolver, the deviation
//! bounds and the cut-off machinery, [`projector_lab`] verifies the
//! projector-geometry toolbox, and [`harness`] runs Monte Carlo experiments
//! behind the `robust-spectra` CLI.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod matrix;
pub mod net;
pub mod projector_lab;
pub mod robust_direction;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{Sample, SymMatrix};
