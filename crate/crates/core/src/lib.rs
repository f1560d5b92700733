//! Discrete-time quantum walks on an odd ring, coupled unitarily to a finite
//! environment.
//!
//! The walker, its two-level coin and a `d_E`-dimensional environment evolve
//! as one pure state. Tracing out coin and environment leaves a mixed
//! position state whose distance to the uniform mixture first decays
//! exponentially and then saturates at a level set by the bath size.
//!
//! * [`core_sim`]: state vector and structured walk step (nonlocal and local
//!   environments)
//! * [`env_gen`]: random environment unitaries, local gates, commutator norms
//! * [`observables`]: reduced density matrices, trace distance, entropy,
//!   Kraus operators, Page entropy
//! * [`classical_baseline`]: classical random walk reference
//! * [`analysis`]: mixing-time and saturation fits, quench averages
//! * [`experiments`]: bath-size and saturation sweeps
//! * [`io`], [`cli`]: file formats and the command-line driver

// `!(x <= tol)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classical_baseline;
pub mod cli;
pub mod core_sim;
pub mod env_gen;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod rng;

pub use error::{Error, Result};
