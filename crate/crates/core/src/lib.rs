//! Neural-network operators activated by sigmoidal functions.
//!
//! The crate builds the NN operators F_n and their simplified variant from
//! samples f(k/n) alone, evaluates their derivatives to approximate f^{(s)}
//! simultaneously, and verifies the supporting kernel identities: algebraic
//! moments, Strang-Fix conditions (by direct summation and by numerical
//! Fourier transform / Poisson summation), quantitative error bounds and
//! Voronovskaja limits.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod density;
pub mod error;
pub mod kahan;
pub mod moments;
pub mod operators;
pub mod quad;
pub mod sigmoid;
pub mod zeta;

pub use density::DensityKernel;
pub use error::{Error, Result};
pub use sigmoid::Sigmoidal;
