//! Variograms and covariance kernels assembled from Bernstein-function
//! combinators, with finite-point-set permissibility checks and a small
//! kriging and simulation harness.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: expressions on the half-line with derived class tags
//!   (completely monotone, Bernstein, complete Bernstein, Stieltjes);
//! * [`variogram`]: variograms and stationary covariances built from those
//!   profiles, each carrying a certified/unverified status;
//! * [`oracle`]: numerical checks on point sets and grids;
//! * [`schoenberg`]: shift kernels, nonstationary kernels and the spectral
//!   variogram of a Bernstein function;
//! * [`kriging`]: ordinary kriging, Gaussian field simulation and empirical
//!   variograms;
//! * [`model`]: JSON documents for models and construction recipes.

pub mod error;
pub mod expr;
pub mod kernel;
pub mod kriging;
pub mod model;
pub mod oracle;
pub mod pointset;
pub mod quadrature;
pub mod schoenberg;
pub mod special;
pub mod variogram;

pub use error::{Error, Result};
pub use expr::{ClassTag, ClassTags, FunctionExpr, LevyMeasure, LevyTriple};
pub use kernel::Kernel;
pub use oracle::{PermissibilityReport, Verdict};
pub use pointset::PointSet;
pub use variogram::{ArgumentMode, Certification, StationaryCovariance, Variogram};
