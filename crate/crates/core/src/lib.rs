//! Parallel machine scheduling under time-of-use energy prices, a per-slot
//! energy budget and job-specific consumption profiles.
//!
//! The crate provides the problem model ([`model`]), an instance generator
//! ([`instgen`]), a first-fit construction heuristic ([`construct`]), swap and
//! relocate local search ([`neighborhood`]), exact methods ([`exact`]), the
//! iterated local search driver ([`ils`]) and an experiment harness ([`bench`]).

pub mod bench;
pub mod cli;
pub mod construct;
pub mod exact;
pub mod fixtures;
pub mod ils;
pub mod instgen;
pub mod model;
pub mod neighborhood;
pub(crate) mod state;

pub use model::{
    Assignment, EnergyProfile, FeasibilityVerdict, Instance, Job, Machine, ModelError, Schedule, TimeGrid,
};
