//! edlab: a 1-D simulation laboratory for entropic quantum dynamics.
//!
//! Wavefunctions evolve under the linear equation, the general
//! osmotic-mass equation, or its mu = 0 hybrid limit; walker ensembles
//! realize the underlying Brownian trajectory picture; and the momentum
//! identities and uncertainty relations are verified quantitatively
//! against closed-form oracles.
//!
//! The walker stepper, histogramming, and batch statistics run on rayon
//! when the default `parallel` feature is enabled, with results
//! bitwise-identical to the sequential fallback.

pub mod artifacts;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod grid;
pub mod oracles;
pub mod sampler;
pub mod spectral;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{Grid1D, PhysicalParams};
pub use state::{decompose, momentum_fields, HydroFields, WaveState};
