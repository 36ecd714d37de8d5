//! Sampled-data prescribed-time control test bench.
//!
//! Simulates the scalar plant `ẋ = f(x,t) + b(x,t)u` under zero-order-hold
//! actuation, realizes adversarial uncertainties that defeat naive sampled
//! prescribed-time controllers, and synthesizes designs that provably reach
//! `|x| ≤ ε` by a deadline.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod control;
mod error;
pub mod integrate;
pub mod model;
pub mod numeric;
pub mod runner;
pub mod schedules;
pub mod synth;

pub use error::{Error, Result};
pub use model::{Controller, Plant, Psi, SamplingSchedule, Trajectory, UncertaintyClass};
pub use runner::{run_scenario, simulate, ScenarioConfig, SimOptions, Summary};
