//! Deterministic models and simulators for satellite quantum key
//! distribution links.
//!
//! The crate covers the full chain from orbital geometry to secret bits:
//!
//! - [`units`]: decibel/transmittance conversions and guarded newtypes.
//! - [`link`]: free-space optical link budgets (diffraction, atmosphere,
//!   turbulence, pointing) for up-, down-, intersatellite and double-pass
//!   links, with the calibrated reference scenario table.
//! - [`orbit`]: circular-orbit geometry - slant ranges, pass durations and
//!   sampled elevation profiles.
//! - [`detector`]: single-photon detector response (thermal dark counts,
//!   dead-time saturation, jitter-limited coincidence windows).
//! - [`qber`]: detector-limited quantum bit error rates for entangled-pair
//!   (BBM92) and weak-coherent-pulse (BB84) receivers, loss sweeps and
//!   maximum-tolerable-loss solves.
//! - [`keyrate`]: asymptotic secure key fractions, classical-coordination
//!   overhead and per-pass key yield.
//! - [`protocol`]: photon-level Monte Carlo of BBM92/BB84 with per-subsystem
//!   deterministic random streams, sifting and error estimation, plus the
//!   trusted-node XOR relay in [`protocol::relay`].
//! - [`config`]: the INI-like scenario format shared by the command-line
//!   tools, with strict schema validation and reproducible echoes.
//!
//! All models are pure functions of their inputs; simulations take explicit
//! seeds. Two runs with the same configuration and seed produce identical
//! results.

pub mod config;
pub mod detector;
pub mod keyrate;
pub mod link;
pub mod orbit;
pub mod protocol;
pub mod qber;
pub mod units;
