//! Episode event log.

use serde::{Deserialize, Serialize};

use dualplan_core::pcp::motion::CommandMode;
use dualplan_core::{PathKind, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    GoalReached { position: Vec3 },
    Collision { position: Vec3 },
    Timeout,
    /// The point-cloud planner fell back to steering or braking.
    BackupTriggered {
        mode: CommandMode,
        position: Vec3,
        /// Drone position at the previous planner step.
        previous: Vec3,
        d_bkd: f64,
        min_clearance: f64,
        ray: Option<Vec3>,
        target: Option<Vec3>,
    },
    /// The map planner published a new path.
    MpReplan {
        reason: String,
        path_kind: PathKind,
        waypoints: usize,
        length: f64,
        /// Smallest distance from the path to the local map at planning time.
        clearance: f64,
    },
    PlanFailed { reason: String },
    IntruderSpawn { index: usize },
    /// First filtered scan containing a point on the intruder.
    IntruderSensed { index: usize },
    /// The planner deviated from the goal ray or used the backup.
    Avoidance { round: usize, mode: CommandMode },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::GoalReached { .. } => "goal_reached",
            EventKind::Collision { .. } => "collision",
            EventKind::Timeout => "timeout",
            EventKind::BackupTriggered { .. } => "backup_triggered",
            EventKind::MpReplan { .. } => "mp_replan",
            EventKind::PlanFailed { .. } => "plan_failed",
            EventKind::IntruderSpawn { .. } => "intruder_spawn",
            EventKind::IntruderSensed { .. } => "intruder_sensed",
            EventKind::Avoidance { .. } => "avoidance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEvent {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}
