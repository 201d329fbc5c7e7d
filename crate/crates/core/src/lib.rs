//! Single-image super-resolution by MAP energy minimization under
//! Fields-of-Experts priors.
//!
//! The reconstruction minimizes
//! `E(x) = sum_i theta_i sum_c rho((k_i * x)_c) + lambda/2 |D B x - y|^2`
//! with an inertial gradient method, starting from bicubic interpolation.
//!
//! With the default `parallel` feature, convolutions, per-filter terms and
//! benchmark images are processed on the rayon pool. All reductions run in a
//! fixed order, so results do not depend on the thread count.

pub mod bank;
pub mod cli;
pub mod energy;
mod error;
mod exec;
pub mod image;
pub mod ipiano;
pub mod operators;
pub mod prior;

pub use error::{Error, Result};
pub use image::ImageF;
