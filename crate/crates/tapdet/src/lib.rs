//! Quantum-enhanced detection of transmittance changes in lossy thermal-noise
//! bosonic channels.
//!
//! A channel with transmittance `eta0` is tapped at an unknown time, dropping
//! the transmittance to `eta1`. The sender keeps probing with a fixed input
//! state; the receiver measures every output and runs a CUSUM test on the
//! data. The expected detection latency is governed by the relative entropy
//! between the post- and prechange output distributions, and the ultimate
//! limit for a given probe is the quantum relative entropy (QRE) between the
//! output states.
//!
//! The crate provides:
//!
//! - [`gaussian`]: phase-space Gaussian states (qq..pp ordering, vacuum
//!   variance 1/2), the lossy thermal-noise channel map, two-mode squeezer
//!   symplectics, and the two-mode standard-form diagonalization.
//! - [`qre`]: the general Gaussian-state QRE plus closed forms for coherent
//!   and two-mode squeezed vacuum (TMSV) probes, their low-noise scaling
//!   coefficients, and the squeezing-fraction sweep.
//! - [`receivers`]: classical relative entropies and outcome distributions
//!   for measured transceivers (homodyne, Kennedy, entanglement-augmented
//!   coherent, TMS + photon counting, Fock + photon counting), together with
//!   the special functions they need.
//! - [`cusum`]: a seeded, reproducible CUSUM Monte Carlo engine with
//!   log-likelihood-ratio models for every supported transceiver.
//! - [`jointcomm`]: joint communication-and-detection quantities — mixture
//!   output laws over unknown codewords, homodyne channel capacities,
//!   plug-in discrete channels (Blahut–Arimoto), and trade-off sweeps.
//!
//! All relative entropies are in nats and oriented as D(post ‖ pre), matching
//! the CUSUM drift convention. Everything is a pure function of its inputs;
//! values are immutable and safe to share across threads.

pub mod cusum;
pub mod error;
pub mod gaussian;
pub mod jointcomm;
mod linalg;
pub mod qre;
pub mod receivers;
pub mod special;

pub use error::{Error, Result};
pub use gaussian::{ChangeScenario, GaussianState};
pub use qre::QreResult;
