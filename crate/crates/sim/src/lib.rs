//! # dualplan-sim
//!
//! Test environment for the planning stack: axis-aligned box worlds with
//! scripted moving boxes, a ray-cast depth sensor with range-dependent
//! noise, double-integrator drone dynamics and ground-truth collision checks.
//! Everything is deterministic given a seed and a time.

pub mod dynamics;
pub mod events;
pub mod gen;
pub mod sensor;
pub mod world;

pub use dynamics::step_dynamics;
pub use events::{EpisodeEvent, EventKind};
pub use sensor::{sense, SensorParams};
pub use world::{check_collision, step_obstacles, Aabb, DynamicBox, Spawn, World, WorldSnapshot};
