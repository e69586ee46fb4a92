//! Ground-truth world: grid generation, sensing, motion and the pairwise
//! communication-dropout model.

pub mod comm;
pub mod grid;
pub mod motion;
pub mod rng;
pub mod sensing;

pub use comm::{pair_count, pair_index, pairs, CommLinks, LinkStatus, TickReport, DROPOUT_TICKS};
pub use grid::{bfs_free, Cell, GridDims, GridEnvironment, GridError};
pub use motion::{step_robot, MotionConfig, MoveOutcome, PrimitiveAction, RobotState};
pub use rng::{mix_seed, stream_rng, SimRngs, Stream};
pub use sensing::{
    detect_teammates, in_sensing_range, line_of_sight, sense, supercover_between, visible_cells, Occupancy,
    SensorConfig, SensorReading,
};
