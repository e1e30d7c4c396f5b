//! Energy-aware traffic offloading for heterogeneous cellular networks whose
//! small cells draw power from the grid, from harvested renewable energy, or
//! from both.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the domain types and the base-station power primitives.
//! * [`energy_queue`] analyses the battery as an M/D/1 queue.
//! * [`outage`] gives closed-form outage probabilities and the minimum
//!   bandwidths they induce.
//! * [`montecarlo`] contains independent simulation oracles for the two
//!   modules above.
//! * [`single_cell`] computes power-saving gains, optimal energy consumption
//!   rates and activation decisions for one small cell.
//! * [`multi_cell`] accounts for network power and implements the two-stage
//!   planner, the greedy baselines and exhaustive search.
//! * [`scenario`] loads scenario files, builds daily profiles and runs the
//!   daily experiment harness.
//!
//! The analytical modules are generic over the floating point type through
//! [`Real`]; the aliases at the crate root fix it to `f64`, which is what the
//! file formats and the simulators use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy_queue;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod multi_cell;
pub mod outage;
pub mod scalar;
pub mod scenario;
pub mod single_cell;

pub use error::{Error, Result};
pub use scalar::Real;

/// Base-station power parameters in `f64`.
pub type BsPowerParams = model::BsPowerParams<f64>;
/// QoS configuration in `f64`.
pub type QosConfig = model::QosConfig<f64>;
/// Radio environment in `f64`.
pub type RadioEnv = model::RadioEnv<f64>;
/// Small-cell configuration in `f64`.
pub type SmallCellConfig = model::SmallCellConfig<f64>;
/// Macro cell description in `f64`.
pub type MacroCell = model::MacroCell<f64>;
/// Network scenario in `f64`.
pub type Scenario = model::Scenario<f64>;
/// Offload decision in `f64`.
pub type OffloadDecision = model::OffloadDecision<f64>;
/// Power breakdown in `f64`.
pub type PowerBreakdown = model::PowerBreakdown<f64>;
/// Stationary battery distribution in `f64`.
pub type QueueStationary = energy_queue::QueueStationary<f64>;
/// Spectral efficiencies in `f64`.
pub type SpectralEfficiencies = outage::SpectralEfficiencies<f64>;
/// Per-cell optimisation context in `f64`.
pub type CellContext = single_cell::CellContext<f64>;
/// Per-cell decision in `f64`.
pub type CellDecision = single_cell::CellDecision<f64>;
/// Network plan in `f64`.
pub type NetworkPlan = multi_cell::NetworkPlan<f64>;

/// Single-precision scenario, mostly useful for checking that results do not
/// hinge on `f64` rounding.
pub type Scenario32 = model::Scenario<f32>;
/// Single-precision network plan.
pub type NetworkPlan32 = multi_cell::NetworkPlan<f32>;
