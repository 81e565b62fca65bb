//! Deterministic spiking-network simulation and a two-column spiking
//! classifier.
//!
//! The crate is organized around a small set of pieces:
//!
//! - [`spike`] — spike trains, the clock, and the population-activity readout
//! - [`neuron`] — leaky integrate-and-fire membrane dynamics
//! - [`network`] — populations, signed connections, and the clocked stepper
//! - [`plasticity`] — STDP, eligibility traces, and reward-modulated updates
//! - [`encoders`] — six ways to turn images and token sequences into spikes
//! - [`corpus`] — the bundled sentiment corpus, tokenization, PGM loading
//! - [`column`] — the three-layer column classifier and its decision readout
//! - [`train`] — the repeat-presentation training protocol and experiments
//!
//! Every random choice flows from an explicit seed; identical seeds and
//! configs produce bit-identical spike histories, weights, and metrics.

pub mod column;
pub mod corpus;
pub mod encoders;
pub mod error;
pub mod network;
pub mod neuron;
pub mod plasticity;
pub mod spike;
pub mod train;

pub use error::{Error, Result};
