//! # dadmms
//!
//! A simulation laboratory for distributed MCMC sampling over communication
//! graphs. Every agent holds a private potential `f_i` and the network jointly
//! targets `μ*(x) ∝ exp(-Σ_i f_i(x))`.
//!
//! The crate provides:
//!
//! - [`graph`]: topologies, extended incidence/Laplacian/degree matrices,
//!   spectral constants and Metropolis mixing matrices.
//! - [`problems`]: Bayesian linear and logistic regression datasets and the
//!   per-agent potentials (value, gradient, Hessian, proximal operator).
//! - [`samplers`]: the noisy consensus-ADMM sampler (D-ADMMS), its noiseless
//!   optimizer (C-ADMM) and the D-SGLD, D-SGHMC and D-ULA baselines, all
//!   stepped in synchronous rounds.
//! - [`metrics`]: Gaussian summaries of trial ensembles, the closed-form
//!   2-Wasserstein distance between Gaussians and accuracy statistics.
//! - [`theory`]: contraction constants, optimal penalty and the sufficient
//!   condition for convergence, the Wasserstein bound trajectory and direct
//!   checks of the equivalent `(Z, β)` iteration and the KKT system.
//! - [`harness`]: TOML experiment configs, seeded multi-trial runs, CSV output.
//!
//! ## Quick start
//!
//! ```
//! use dadmms::graph::{Topology, TopologyKind, extend_matrices, spectral_constants};
//!
//! let ring = Topology::build(TopologyKind::RingCyclic, 5).unwrap();
//! let spectra = spectral_constants(&extend_matrices(&ring, 1)).unwrap();
//! assert!((spectra.tau_g - 1.70).abs() < 0.01);
//! ```
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod samplers;
pub mod selftest;
pub mod theory;

mod newton;

pub use error::{Error, Result};
