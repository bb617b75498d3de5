//! Minimal pinning-node selection for consensus over directed networks.
//!
//! The crate covers the whole pipeline:
//!
//! * [`network`]: adjacency matrices, Laplacians and overlapping
//!   multi-network systems with membership profiles.
//! * [`stability`]: the pinning LMI reduced to a minimum-eigenvalue test,
//!   bisection for the smallest admissible gain and the infeasibility measure
//!   used as a penalty.
//! * [`dynamics`]: fixed-step simulation of the pinned consensus dynamics.
//! * [`ga`]: a penalty-based genetic search for small pinning sets.
//! * [`harness`]: scenarios, batches, fixed-gain studies and an exhaustive
//!   oracle for small networks.

pub mod dynamics;
pub mod error;
pub mod ga;
pub mod harness;
pub mod network;
pub mod plan;
pub mod stability;

pub use error::{Error, Result};
pub use network::{DirectedNetwork, MembershipProfile, MultiNetworkSystem};
pub use plan::PinningPlan;
pub use stability::{FeasibilityResult, GainMode, StabilityParams};
