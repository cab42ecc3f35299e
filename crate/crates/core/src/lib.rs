//! Exact simulation and analytics for continuous-space spatial birth
//! (growth) processes.
//!
//! The crate has four layers:
//!
//! * [`model`] — configurations, birth-rate kernels, rate evaluation, and
//!   randomized checks of the structural conditions the theory needs.
//! * [`engine`] — exact event-driven simulation (Gillespie-style next-event
//!   sampling, shared-noise coupling of ordered processes, the reduced
//!   rightmost-pair and gap chains, and a particle-capped branching walk).
//! * [`lattice`] — discrete-space growth: nearest-neighbour occupation,
//!   the multiple-occupancy variant, the power-law kernel model, and the
//!   projection of continuum runs onto a lattice.
//! * [`analytics`] — speed estimators, hitting times, the closed-form gap
//!   density with its balance equations, the exact truncated-model speed,
//!   the variational branching-walk speed, and shape statistics.
//!
//! Every simulation is deterministic given its seed; replicas are keyed by
//! counter-based streams so sweeps are reproducible regardless of
//! scheduling.

pub mod analytics;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod model;
pub mod numeric;
pub mod profile;
pub mod rng;
pub mod stats;

pub use engine::{EventKind, EventLog, SimOptions};
pub use error::{GrowthError, Result};
pub use model::{BirthKernel, Configuration, NonDegeneracyWitness, StepFn};
pub use rng::{replica_seed, StreamRng};
