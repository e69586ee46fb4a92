//! A* planning over known-free space and the macro-action executor that turns
//! a goal cell into primitive actions until a termination condition fires.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::mapping::BeliefMap;
use crate::sim::{Cell, PrimitiveAction};

/// A cell is traversable when it is known free, or when it is the goal and
/// not a known obstacle.
fn traversable(map: &BeliefMap, cell: Cell, goal: Cell) -> bool {
    map.is_known_free(cell) || (cell == goal && !map.is_known_obstacle(cell))
}

/// Shortest 4-connected path from `start` to `goal` over known-free cells.
/// The returned cells exclude `start`, so the length is the number of moves.
/// Ties are broken by `(f, h, row, col)`.
pub fn astar(map: &BeliefMap, start: Cell, goal: Cell) -> Option<Vec<Cell>> {
    let dims = map.dims();
    if !dims.contains(start) || !dims.contains(goal) {
        return None;
    }
    if start == goal {
        return Some(Vec::new());
    }
    if !traversable(map, goal, goal) {
        return None;
    }
    let mut g = vec![usize::MAX; dims.len()];
    let mut parent = vec![usize::MAX; dims.len()];
    let mut closed = vec![false; dims.len()];
    let mut open = BinaryHeap::new();
    let h0 = start.manhattan(goal);
    g[dims.index(start)] = 0;
    open.push(Reverse((h0, h0, start.row, start.col)));

    while let Some(Reverse((_, _, row, col))) = open.pop() {
        let cell = Cell::new(row, col);
        let ci = dims.index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            let mut path = Vec::new();
            let mut cur = ci;
            while cur != dims.index(start) {
                path.push(dims.cell(cur));
                cur = parent[cur];
            }
            path.reverse();
            return Some(path);
        }
        for n in dims.neighbors4(cell) {
            let ni = dims.index(n);
            if closed[ni] || !traversable(map, n, goal) {
                continue;
            }
            let tentative = g[ci] + 1;
            if tentative < g[ni] {
                g[ni] = tentative;
                parent[ni] = ci;
                let h = n.manhattan(goal);
                open.push(Reverse((tentative + h, h, n.row, n.col)));
            }
        }
    }
    None
}

/// BFS distances from `start` over known-free cells (the start itself is always admitted).
pub fn bfs_known_free(map: &BeliefMap, start: Cell) -> Vec<Option<usize>> {
    let dims = map.dims();
    let mut dist = vec![None; dims.len()];
    dist[dims.index(start)] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(cell) = queue.pop_front() {
        let d = dist[dims.index(cell)].unwrap();
        for n in dims.neighbors4(cell) {
            let ni = dims.index(n);
            if dist[ni].is_none() && map.is_known_free(n) {
                dist[ni] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroStatus {
    Running,
    DoneArrived,
    DoneTeammate,
    /// No path through known-free space, or the step budget ran out.
    DoneStuck,
}

impl MacroStatus {
    pub fn is_done(self) -> bool {
        self != MacroStatus::Running
    }
}

/// Navigate-to-goal macro action: the chosen candidate index and its goal
/// cell, snapshotted when the macro was selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MacroAction {
    pub index: usize,
    pub goal: Cell,
}

/// Low-level controller state for one robot's running macro.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroExecutor {
    action: MacroAction,
    path: VecDeque<Cell>,
    steps_taken: usize,
    budget: usize,
    status: MacroStatus,
    replans: usize,
}

impl MacroExecutor {
    /// `budget` is the primitive-step cap, normally `3 * width * height`.
    pub fn new(action: MacroAction, budget: usize) -> Self {
        Self {
            action,
            path: VecDeque::new(),
            steps_taken: 0,
            budget: budget.max(1),
            status: MacroStatus::Running,
            replans: 0,
        }
    }

    pub fn for_grid(action: MacroAction, width: usize, height: usize) -> Self {
        Self::new(action, 3 * width * height)
    }

    pub fn action(&self) -> MacroAction {
        self.action
    }

    pub fn goal(&self) -> Cell {
        self.action.goal
    }

    pub fn status(&self) -> MacroStatus {
        self.status
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn replans(&self) -> usize {
        self.replans
    }

    pub fn planned_path(&self) -> impl Iterator<Item = &Cell> {
        self.path.iter()
    }

    fn path_valid(&self, position: Cell, map: &BeliefMap) -> bool {
        match self.path.front() {
            None => false,
            Some(next) => {
                next.manhattan(position) == 1 && self.path.iter().all(|&c| traversable(map, c, self.action.goal))
            }
        }
    }

    /// Emits the next primitive action for a running macro, replanning lazily
    /// when the path has been invalidated. Every call consumes one timestep.
    pub fn next_action(&mut self, position: Cell, map: &BeliefMap) -> PrimitiveAction {
        debug_assert_eq!(self.status, MacroStatus::Running);
        self.steps_taken += 1;
        if position == self.action.goal {
            return PrimitiveAction::Stay;
        }
        if !self.path_valid(position, map) {
            self.replans += 1;
            match astar(map, position, self.action.goal) {
                Some(path) if !path.is_empty() => self.path = path.into(),
                _ => {
                    self.path.clear();
                    self.status = MacroStatus::DoneStuck;
                    return PrimitiveAction::Stay;
                }
            }
        }
        PrimitiveAction::toward(position, self.path[0])
    }

    /// Updates the termination status after the timestep's motion and sensing.
    /// `teammate_event` is a false-to-true transition of the detection flag.
    pub fn observe(&mut self, position: Cell, teammate_event: bool) -> MacroStatus {
        if self.status != MacroStatus::Running {
            return self.status;
        }
        if self.path.front() == Some(&position) {
            self.path.pop_front();
        }
        self.status = if position == self.action.goal {
            MacroStatus::DoneArrived
        } else if teammate_event && self.steps_taken >= 1 {
            MacroStatus::DoneTeammate
        } else if self.steps_taken >= self.budget {
            MacroStatus::DoneStuck
        } else {
            MacroStatus::Running
        };
        self.status
    }

    /// One full controller tick: action selection, then termination check
    /// against the position reached and the detection event.
    pub fn macro_step<F>(&mut self, position: Cell, map: &BeliefMap, advance: F) -> (PrimitiveAction, MacroStatus)
    where
        F: FnOnce(PrimitiveAction) -> (Cell, bool),
    {
        let action = self.next_action(position, map);
        if self.status.is_done() {
            return (action, self.status);
        }
        let (new_position, teammate_event) = advance(action);
        (action, self.observe(new_position, teammate_event))
    }
}
