//! Bounds on the joint/generalized spectral radius of finite matrix sets and
//! numerical certificates for the spectral finiteness property.
//!
//! * [`bounds`]: per-depth lower/upper bounds `rho_n^(1/n) <= rho <= rho_hat_n^(1/n)`,
//!   exhaustive and branch-and-bound.
//! * [`certificates`]: peripheral-spectrum ratios and the uniformly
//!   sub-peripheral finiteness certificate.
//! * [`limits`]: normalized long products, limit-point clustering and the
//!   nonsingular-limit-point certificate; irreducibility tests.
//! * [`stability`]: periodic-switching stability decisions, trajectories and
//!   Sturmian switching.
//! * [`families`]: named matrix families used in tests and on the CLI.

pub mod bounds;
pub mod certificates;
pub mod eigen;
pub mod error;
pub mod families;
pub mod limits;
pub mod matrix;
pub mod products;
pub mod setfile;
pub mod stability;
mod svd;

pub use eigen::{eigenvalues, spectral_radius, Spectrum};
pub use error::{Error, Result};
pub use matrix::{Field, Matrix, NormKind, C64};
pub use products::{evaluate_word, MatrixSet, ScaledMatrix, Word};
