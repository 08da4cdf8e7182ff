//! Numerical laboratory for thin-shell buckling: critical loads and Korn
//! constants of thin cylindrical shells over convex planar cross-sections,
//! with thickness-scaling verification.
//!
//! The pipeline: synthesize a cross-section curve from a curvature profile
//! ([`geometry`]), assemble per-mode quadratic forms for the elastic energy
//! and the destabilizing norm ([`assemble`]), minimize generalized Rayleigh
//! quotients over z-Fourier modes ([`eigen`], [`scan`]), evaluate explicit
//! test fields as upper-bound witnesses ([`ansatz`]), and fit power laws in
//! the thickness h ([`scaling`]).

pub mod ansatz;
pub mod assemble;
pub mod eigen;
pub mod error;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod material;
pub mod quad;
pub mod scaling;
pub mod scan;
pub mod shell;

pub use error::{Error, Result};
pub use shell::ShellConfig;
