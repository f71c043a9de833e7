//! Spectral operators derived from the transfer matrix.

mod projector;
mod regularize;
mod svd;

pub use projector::{check_nonparallel, NonparallelReport, ProjectorWeights, DEFAULT_NONPARALLEL_TOL};
pub use regularize::{morozov_truncation, truncation_residuals, TikhonovSmoother};
pub use svd::{explicit_projection_deviation, projection_identity_check, pseudo_apply, SvdFactors};
