use thiserror::Error;

/// Errors raised while building or transforming maps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("inflation kernel must be odd and >= 1, got {0}")]
    EvenKernel(usize),
    #[error("padded size {padded} is not divisible by downsample kernel {kernel}")]
    NotDivisible { padded: usize, kernel: usize },
    #[error("invalid local map parameters: {0}")]
    InvalidParams(String),
    #[error("grid shapes do not match: {0}")]
    ShapeMismatch(String),
}

/// Errors raised by the map planner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no path from {start:?} to {goal:?}")]
    Unreachable { start: (i32, i32), goal: (i32, i32) },
    #[error("cell {0:?} lies outside the grid")]
    OutOfBounds((i32, i32)),
    #[error("goal cell {0:?} is occupied")]
    GoalOccupied((i32, i32)),
    #[error("no free cell available for the local goal")]
    NoFreeGoal,
    #[error(transparent)]
    Map(#[from] MapError),
}
