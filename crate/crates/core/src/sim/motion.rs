use rand::Rng;

use super::grid::{Cell, GridEnvironment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimitiveAction {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl PrimitiveAction {
    pub const ALL: [PrimitiveAction; 5] = [Self::Up, Self::Down, Self::Left, Self::Right, Self::Stay];

    /// Target cell, or `None` when the move leaves the grid.
    pub fn apply(self, cell: Cell, env: &GridEnvironment) -> Option<Cell> {
        let target = match self {
            Self::Up => Cell::new(cell.row.checked_sub(1)?, cell.col),
            Self::Down => Cell::new(cell.row + 1, cell.col),
            Self::Left => Cell::new(cell.row, cell.col.checked_sub(1)?),
            Self::Right => Cell::new(cell.row, cell.col + 1),
            Self::Stay => cell,
        };
        env.in_bounds(target).then_some(target)
    }

    /// The action moving `from` onto the 4-adjacent cell `to`.
    pub fn toward(from: Cell, to: Cell) -> Self {
        if to.row + 1 == from.row && to.col == from.col {
            Self::Up
        } else if to.row == from.row + 1 && to.col == from.col {
            Self::Down
        } else if to.col + 1 == from.col && to.row == from.row {
            Self::Left
        } else if to.col == from.col + 1 && to.row == from.row {
            Self::Right
        } else {
            Self::Stay
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionConfig {
    pub success_probability: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            success_probability: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveOutcome {
    pub position: Cell,
    /// True only when the robot changed cell (one metre travelled).
    pub moved: bool,
}

/// Blocked or out-of-bounds moves leave the robot in place without consuming
/// randomness; otherwise the move succeeds with the configured probability and
/// a failure also leaves the robot in place.
pub fn step_robot<R: Rng>(
    env: &GridEnvironment,
    position: Cell,
    action: PrimitiveAction,
    config: &MotionConfig,
    rng: &mut R,
) -> MoveOutcome {
    let stay = MoveOutcome {
        position,
        moved: false,
    };
    if action == PrimitiveAction::Stay {
        return stay;
    }
    match action.apply(position, env) {
        Some(target) if !env.is_obstacle(target) => {
            if rng.gen_bool(config.success_probability) {
                MoveOutcome {
                    position: target,
                    moved: true,
                }
            } else {
                stay
            }
        }
        _ => stay,
    }
}

/// Robot index, position and odometer.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub position: Cell,
    pub distance_m: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream_rng, Stream};

    #[test]
    fn blocked_and_stay_moves_do_not_travel() {
        let env = GridEnvironment::from_ascii(&["..#", "..."]);
        let mut rng = stream_rng(0, Stream::Motion);
        let cfg = MotionConfig::default();
        let out = step_robot(&env, Cell::new(0, 1), PrimitiveAction::Right, &cfg, &mut rng);
        assert_eq!(out, MoveOutcome { position: Cell::new(0, 1), moved: false });
        let out = step_robot(&env, Cell::new(0, 0), PrimitiveAction::Up, &cfg, &mut rng);
        assert!(!out.moved);
        let out = step_robot(&env, Cell::new(1, 1), PrimitiveAction::Stay, &cfg, &mut rng);
        assert_eq!(out.position, Cell::new(1, 1));
    }

    #[test]
    fn success_rate_is_about_ninety_percent() {
        let env = GridEnvironment::open(5, 5);
        let mut rng = stream_rng(2, Stream::Motion);
        let n = 10_000;
        let ok = (0..n)
            .filter(|_| step_robot(&env, Cell::new(2, 2), PrimitiveAction::Left, &MotionConfig::default(), &mut rng).moved)
            .count();
        let rate = ok as f64 / n as f64;
        assert!((rate - 0.9).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn toward_inverts_apply() {
        let env = GridEnvironment::open(3, 3);
        let c = Cell::new(1, 1);
        for a in PrimitiveAction::ALL {
            let t = a.apply(c, &env).unwrap();
            assert_eq!(PrimitiveAction::toward(c, t), a);
        }
    }
}
