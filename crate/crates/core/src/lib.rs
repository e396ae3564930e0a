//! W-state energy-estimation benchmark.
//!
//! Prepares the three-qubit W state, estimates the energy of the Fermionic
//! Triangle Hamiltonian from Pauli-string shot histograms, and studies how
//! readout and gate noise (static or drifting in time) bias that estimate.
//!
//! Layers, bottom up:
//! - [`statevector`]: exact simulation and seeded shot sampling
//! - [`hamiltonian`]: Pauli-string Hamiltonians and the benchmark circuits
//! - [`noise`]: noisy-device emulator and time-dependent scenarios
//! - [`harness`]: the measurement protocol on a simulated clock
//! - [`mitigation`]: detector tomography and calibration-matrix inversion
//! - [`analysis`]: statistics and anomaly detectors over time series
//! - [`io`]: persistence formats and job configuration

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod io;
pub mod mitigation;
pub mod noise;
pub mod rng;
pub mod statevector;

pub use error::{Error, Result};
