//! Analysis toolkit for a slotted status-update link with simultaneous
//! wireless information and power transfer (SWIPT).
//!
//! A data transmitter sends status updates with probability q1 per slot; a
//! power transmitter sends energy with probability q2. The receiver stores
//! harvested energy packets in a battery and actuates when a decoded update
//! meets an available energy packet. The crate provides:
//!
//! * [`channel`] — Rayleigh-fading closed forms for the four link-level
//!   success probabilities, plus per-slot fading draws.
//! * [`metrics`] — exact steady-state analytics: Age of Information (AoI),
//!   Age of Actuation (AoA), violation tails, probability of missing an
//!   actuation (PoMA), battery occupancy, energy drop rate.
//! * [`sim`] — a seeded slot-level Monte Carlo simulator used as the oracle
//!   for every closed form.
//! * [`opt`] — closed-form and grid-search optimizers over (q1, q2).
//! * [`scenario`] — JSON scenario files with explicit dBm/dB or linear units.
//! * [`reproduce`] — regeneration of the published reference tables and
//!   figure-caption optima.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod opt;
pub mod reproduce;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
