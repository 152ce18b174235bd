//! Simulation and verification toolkit for Gaussian approximation of
//! Hawkes-process innovations `delta(u) = int u (dN - lambda dt)`.
//!
//! * [`model`]: kernels, link functions, step test functions, event streams.
//! * [`simulator`]: thinning and Poisson-embedding simulation.
//! * [`kernels`]: kernel norms, the resolvent and resolvent cross energies.
//! * [`chaos`]: `delta(u)` and its constant-intensity approximation.
//! * [`bounds`]: every explicit Wasserstein bound with its term breakdown.
//! * [`stats`]: normal special functions, W1 and Kolmogorov distances to `N(0, 1)`.
//! * [`experiments`]: replicated comparisons, epsilon sweeps, confidence intervals.
//! * [`config`], [`cli`]: TOML configuration and the `hawkes-clt` binary.

pub mod bounds;
pub mod chaos;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod model;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use model::{EventStream, HawkesParams, Kernel, LinkFunction, TestFunction};
