use std::fmt::Write as _;

use thiserror::Error;

use crate::sim::{Cell, GridDims, Occupancy, SensorReading};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("map dimensions differ: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Explored,
    Obstacles,
    RobotPositions,
    GoalCandidates,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Explored,
        Channel::Obstacles,
        Channel::RobotPositions,
        Channel::GoalCandidates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Explored => "explored",
            Channel::Obstacles => "obstacles",
            Channel::RobotPositions => "robot_positions",
            Channel::GoalCandidates => "goal_candidates",
        }
    }
}

/// Four binary channels over the grid. Cells are tri-state through the first
/// two channels: unknown, known free (`explored && !obstacle`) or known obstacle.
/// The last two channels are overlays that callers recompute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefMap {
    dims: GridDims,
    explored: Vec<bool>,
    obstacles: Vec<bool>,
    robot_positions: Vec<bool>,
    goal_candidates: Vec<bool>,
}

impl BeliefMap {
    pub fn new(dims: GridDims) -> Self {
        let n = dims.len();
        Self {
            dims,
            explored: vec![false; n],
            obstacles: vec![false; n],
            robot_positions: vec![false; n],
            goal_candidates: vec![false; n],
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn channel(&self, channel: Channel) -> &[bool] {
        match channel {
            Channel::Explored => &self.explored,
            Channel::Obstacles => &self.obstacles,
            Channel::RobotPositions => &self.robot_positions,
            Channel::GoalCandidates => &self.goal_candidates,
        }
    }

    pub fn is_explored(&self, cell: Cell) -> bool {
        self.explored[self.dims.index(cell)]
    }

    pub fn is_known_obstacle(&self, cell: Cell) -> bool {
        self.obstacles[self.dims.index(cell)]
    }

    pub fn is_known_free(&self, cell: Cell) -> bool {
        let i = self.dims.index(cell);
        self.explored[i] && !self.obstacles[i]
    }

    /// `|E|`: number of cells with known occupancy.
    pub fn explored_count(&self) -> usize {
        self.explored.iter().filter(|e| **e).count()
    }

    pub fn known_free_count(&self) -> usize {
        self.explored
            .iter()
            .zip(&self.obstacles)
            .filter(|(e, o)| **e && !**o)
            .count()
    }

    /// Marks a single cell; used by tests and by map construction helpers.
    pub fn mark(&mut self, cell: Cell, occupancy: Occupancy) {
        let i = self.dims.index(cell);
        self.explored[i] = true;
        if occupancy == Occupancy::Obstacle {
            self.obstacles[i] = true;
        }
    }

    /// Folds a sensor reading in. Occupancy bits are only ever set.
    pub fn update(&mut self, reading: &SensorReading) {
        for &(cell, occupancy) in &reading.observed {
            self.mark(cell, occupancy);
        }
    }

    /// Number of cells in `cells` that are already explored.
    pub fn count_explored<'a>(&self, cells: impl IntoIterator<Item = &'a Cell>) -> usize {
        cells.into_iter().filter(|c| self.is_explored(**c)).count()
    }

    /// OR-merges the occupancy channels of `other` into `self`; overlays are untouched.
    pub fn merge_from(&mut self, other: &BeliefMap) -> Result<(), MapError> {
        self.check_dims(other)?;
        for (a, b) in self.explored.iter_mut().zip(&other.explored) {
            *a |= *b;
        }
        for (a, b) in self.obstacles.iter_mut().zip(&other.obstacles) {
            *a |= *b;
        }
        Ok(())
    }

    fn check_dims(&self, other: &BeliefMap) -> Result<(), MapError> {
        if self.dims != other.dims {
            return Err(MapError::DimensionMismatch {
                a_width: self.dims.width,
                a_height: self.dims.height,
                b_width: other.dims.width,
                b_height: other.dims.height,
            });
        }
        Ok(())
    }

    /// Occupancy-channel equality, ignoring overlays.
    pub fn same_occupancy(&self, other: &BeliefMap) -> bool {
        self.dims == other.dims && self.explored == other.explored && self.obstacles == other.obstacles
    }

    pub fn clear_overlays(&mut self) {
        self.robot_positions.fill(false);
        self.goal_candidates.fill(false);
    }

    /// Rewrites the position channel with `cells`.
    pub fn set_robot_positions<'a>(&mut self, cells: impl IntoIterator<Item = &'a Cell>) {
        self.robot_positions.fill(false);
        for c in cells {
            let i = self.dims.index(*c);
            self.robot_positions[i] = true;
        }
    }

    /// Rewrites the goal-candidate channel with `cells`.
    pub fn set_goal_candidates<'a>(&mut self, cells: impl IntoIterator<Item = &'a Cell>) {
        self.goal_candidates.fill(false);
        for c in cells {
            let i = self.dims.index(*c);
            self.goal_candidates[i] = true;
        }
    }

    /// Debug dump: `CHANNEL <name>` followed by rows of `1`/`0` per channel.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for channel in Channel::ALL {
            let _ = writeln!(out, "CHANNEL {}", channel.name());
            let bits = self.channel(channel);
            for row in bits.chunks(self.dims.width) {
                for &b in row {
                    out.push(if b { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Union of the occupancy channels; overlays come from `a`.
pub fn merge_maps(a: &BeliefMap, b: &BeliefMap) -> Result<BeliefMap, MapError> {
    let mut merged = a.clone();
    merged.merge_from(b)?;
    Ok(merged)
}
