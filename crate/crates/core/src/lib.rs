//! Bit-accurate model of a digital beamforming receiver.
//!
//! Two receiver architectures are modeled over the same ADC captures:
//!
//! * the *proposed* chain, which beamforms the real IF samples of every
//!   channel first and then runs a single fs/4 down-converter and low-pass
//!   FIR on the combined complex stream, and
//! * the *standard* chain, which down-converts and filters every channel
//!   separately before a complex-by-complex beamformer.
//!
//! Around those sit the plane-wave signal synthesizer ([`array`]), the
//! under-sampling planner ([`plan`]), the 12-bit ADC ([`adc`]), spectral and
//! beam-pattern analysis ([`analysis`]) and the arithmetic cost model
//! ([`resources`]).

pub mod adc;
pub mod analysis;
pub mod array;
pub mod artifacts;
pub mod beamformer;
pub mod chain;
pub mod config;
pub mod ddc;
pub mod error;
pub mod fir;
pub mod iq;
pub mod formats;
pub mod plan;
pub mod resources;

pub use error::{Error, Result};

/// Parallel samples per channel delivered on each frame clock.
pub const PARALLEL: usize = 8;
