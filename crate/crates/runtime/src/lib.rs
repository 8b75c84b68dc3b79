//! # dualplan-runtime
//!
//! Wires the filter, mapping, map-planner, point-cloud-planner and
//! simulation loops together through a [`Blackboard`] of latest values.
//! Virtual runs step the loops on a shared simulated clock and are
//! bit-for-bit reproducible; wall-clock runs give each loop its own thread.

pub mod blackboard;
pub mod episode;
pub mod scenario;
pub mod scheduler;
pub mod stages;

pub use blackboard::{Blackboard, PlanInfo, Slot, Versioned};
pub use episode::{run_episode, EpisodeResult, Metrics, RunMode, RuntimeError, StepTimes, WallTimings};
pub use scenario::Scenario;
pub use scheduler::{LoopId, LoopRates, VirtualScheduler};
pub use stages::{Outcome, TrajectoryRow};
