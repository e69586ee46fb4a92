//! Classical frontier planners: nearest frontier (NF), utility-based (UB) and
//! a probabilistic teammate-aware planner (PB). They run on the same macro
//! substrate as the learned policies.

use std::cmp::Ordering;

use crate::mapping::{extract_frontiers, is_frontier, BeliefMap};
use crate::nav::{bfs_known_free, MacroAction};
use crate::sim::{Cell, GridDims};
use crate::world::World;

/// Chebyshev radius used for information gain and teammate neighbourhoods.
pub const IG_RADIUS: usize = 4;

fn row_col(c: Cell) -> (usize, usize) {
    (c.row, c.col)
}

/// Unknown cells within `IG_RADIUS` (Chebyshev) of `cell`.
pub fn information_gain(map: &BeliefMap, cell: Cell) -> usize {
    window(map.dims(), cell, IG_RADIUS)
        .filter(|&c| !map.is_explored(c))
        .count()
}

fn window(dims: GridDims, centre: Cell, radius: usize) -> impl Iterator<Item = Cell> {
    let r0 = centre.row.saturating_sub(radius);
    let r1 = (centre.row + radius).min(dims.height - 1);
    let c0 = centre.col.saturating_sub(radius);
    let c1 = (centre.col + radius).min(dims.width - 1);
    (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| Cell::new(r, c)))
}

/// Reachable frontiers with their BFS distance from `start`.
fn reachable_frontiers(map: &BeliefMap, start: Cell) -> Vec<(Cell, usize)> {
    let dist = bfs_known_free(map, start);
    let dims = map.dims();
    extract_frontiers(map)
        .into_iter()
        .filter_map(|f| dist[dims.index(f)].map(|d| (f, d)))
        .collect()
}

fn nearest(frontiers: &[(Cell, usize)]) -> Option<Cell> {
    frontiers
        .iter()
        .min_by_key(|&&(f, d)| (d, row_col(f)))
        .map(|&(f, _)| f)
}

/// The frontier with the shortest known-free path; the current cell when none is reachable.
pub fn nf_select_goal(map: &BeliefMap, position: Cell) -> Cell {
    nearest(&reachable_frontiers(map, position)).unwrap_or(position)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UbParams {
    /// Cost per path cell.
    pub distance_weight: f64,
    /// Flat penalty on a teammate's nearest frontier.
    pub coordination_penalty: f64,
}

impl Default for UbParams {
    fn default() -> Self {
        Self {
            distance_weight: 1.0,
            coordination_penalty: 20.0,
        }
    }
}

/// Utility of every reachable frontier, in frontier order.
pub fn ub_utilities(map: &BeliefMap, position: Cell, teammates: &[Cell], params: &UbParams) -> Vec<(Cell, usize, f64)> {
    let claimed: Vec<Cell> = teammates
        .iter()
        .filter_map(|&p| nearest(&reachable_frontiers(map, p)))
        .collect();
    reachable_frontiers(map, position)
        .into_iter()
        .map(|(f, d)| {
            let mut u = information_gain(map, f) as f64 - params.distance_weight * d as f64;
            if claimed.contains(&f) {
                u -= params.coordination_penalty;
            }
            (f, d, u)
        })
        .collect()
}

/// Maximizes information gain minus path cost minus the coordination
/// penalty. Ties go to the shorter path, then `(row, col)`.
pub fn ub_select_goal(map: &BeliefMap, position: Cell, teammates: &[Cell], params: &UbParams) -> Cell {
    ub_utilities(map, position, teammates, params)
        .into_iter()
        .max_by(|a, b| {
            a.2.partial_cmp(&b.2)
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.1.cmp(&a.1))
                .then_with(|| row_col(b.0).cmp(&row_col(a.0)))
        })
        .map_or(position, |(f, _, _)| f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbParams {
    pub discount: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for PbParams {
    fn default() -> Self {
        Self {
            discount: 0.95,
            tolerance: 1e-3,
            max_sweeps: 200,
        }
    }
}

/// Probability mass of one teammate over grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct TeammateOccupancy {
    dims: GridDims,
    mass: Vec<f64>,
}

impl TeammateOccupancy {
    pub fn point(dims: GridDims, cell: Cell) -> Self {
        let mut mass = vec![0.0; dims.len()];
        mass[dims.index(cell)] = 1.0;
        Self { dims, mass }
    }

    pub fn mass(&self, cell: Cell) -> f64 {
        self.mass[self.dims.index(cell)]
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = Cell> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| self.dims.cell(i))
    }

    /// Mass within Chebyshev `radius` of `cell`.
    pub fn mass_near(&self, cell: Cell, radius: usize) -> f64 {
        window(self.dims, cell, radius).map(|c| self.mass(c)).sum()
    }
}

/// Uniform over the known-free cells within `elapsed` BFS steps of the
/// last-known cell, which is always included.
pub fn pb_propagate(map: &BeliefMap, last_known: Cell, elapsed: u32) -> TeammateOccupancy {
    let dims = map.dims();
    if elapsed == 0 {
        return TeammateOccupancy::point(dims, last_known);
    }
    let dist = bfs_known_free(map, last_known);
    let inside: Vec<usize> = (0..dims.len())
        .filter(|&i| dist[i].is_some_and(|d| d <= elapsed as usize))
        .collect();
    let p = 1.0 / inside.len() as f64;
    let mut mass = vec![0.0; dims.len()];
    for i in inside {
        mass[i] = p;
    }
    TeammateOccupancy { dims, mass }
}

/// One occupancy per teammate in the robot's ledger, from its last-known
/// position and the time since it was seen.
pub fn pb_propagate_teammates(map: &BeliefMap, teammates: &[(Cell, u32)]) -> Vec<TeammateOccupancy> {
    teammates
        .iter()
        .map(|&(cell, elapsed)| pb_propagate(map, cell, elapsed))
        .collect()
}

/// Converged values over known-free cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub residual: f64,
}

/// Deterministic 4-connected moves over known-free cells. Cells listed in
/// `terminal` are absorbing with the given reward; every other cell takes
/// the discounted best neighbour value. Jacobi sweeps until the largest
/// change drops below the tolerance or the sweep budget runs out.
pub fn value_iteration(map: &BeliefMap, terminal: &[(Cell, f64)], params: &PbParams) -> ValueTable {
    let dims = map.dims();
    let mut reward: Vec<Option<f64>> = vec![None; dims.len()];
    for &(c, r) in terminal {
        reward[dims.index(c)] = Some(r);
    }
    let states: Vec<Cell> = dims.cells().filter(|&c| map.is_known_free(c)).collect();
    let mut values = vec![0.0; dims.len()];
    for &(c, r) in terminal {
        values[dims.index(c)] = r;
    }
    let mut sweeps = 0;
    let mut residual = 0.0;
    while sweeps < params.max_sweeps {
        let mut next = values.clone();
        residual = 0.0f64;
        for &s in &states {
            let si = dims.index(s);
            if reward[si].is_some() {
                continue;
            }
            let best = dims
                .neighbors4(s)
                .filter(|&n| map.is_known_free(n))
                .map(|n| values[dims.index(n)])
                .fold(0.0f64, f64::max);
            next[si] = params.discount * best;
            residual = residual.max((next[si] - values[si]).abs());
        }
        values = next;
        sweeps += 1;
        if residual < params.tolerance {
            break;
        }
    }
    ValueTable {
        values,
        sweeps,
        residual,
    }
}

/// Expected information gain of each frontier after discounting the chance
/// that a teammate is already within sensing range of it.
pub fn pb_rewards(map: &BeliefMap, occupancies: &[TeammateOccupancy]) -> Vec<(Cell, f64)> {
    extract_frontiers(map)
        .into_iter()
        .map(|f| {
            let crowd: f64 = occupancies.iter().map(|o| o.mass_near(f, IG_RADIUS)).sum();
            (f, information_gain(map, f) as f64 * (1.0 - crowd).max(0.0))
        })
        .collect()
}

/// Follows the greedy policy from `position` over converged values and
/// returns the best frontier on that path. Falls back to the nearest
/// frontier when no positive value is reachable.
pub fn pb_select_goal(map: &BeliefMap, position: Cell, occupancies: &[TeammateOccupancy], params: &PbParams) -> Cell {
    let terminal = pb_rewards(map, occupancies);
    let table = value_iteration(map, &terminal, params);
    greedy_frontier(map, position, &table.values).unwrap_or_else(|| nf_select_goal(map, position))
}

fn greedy_frontier(map: &BeliefMap, position: Cell, values: &[f64]) -> Option<Cell> {
    let dims = map.dims();
    let v = |c: Cell| values[dims.index(c)];
    let best_step = |c: Cell| {
        dims.neighbors4(c)
            .filter(|&n| map.is_known_free(n))
            .max_by(|&a, &b| {
                v(a).partial_cmp(&v(b))
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| row_col(b).cmp(&row_col(a)))
            })
    };
    let mut visited = vec![false; dims.len()];
    let mut best: Option<Cell> = None;
    let consider = |c: Cell, best: &mut Option<Cell>| {
        if is_frontier(map, c) && v(c) > 0.0 {
            let better = match *best {
                None => true,
                Some(b) => v(c) > v(b) || (v(c) == v(b) && row_col(c) < row_col(b)),
            };
            if better {
                *best = Some(c);
            }
        }
    };
    // Standing on a frontier only counts if it beats every move.
    let first = best_step(position)?;
    if is_frontier(map, position) && map.is_known_free(position) && v(position) >= v(first) {
        consider(position, &mut best);
        if best.is_some() {
            return best;
        }
    }
    visited[dims.index(position)] = true;
    let mut cur = first;
    while !visited[dims.index(cur)] {
        visited[dims.index(cur)] = true;
        consider(cur, &mut best);
        if is_frontier(map, cur) {
            break;
        }
        match best_step(cur) {
            Some(n) if v(n) > 0.0 => cur = n,
            _ => break,
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlannerKind {
    NearestFrontier,
    Utility(UbParams),
    Probabilistic(PbParams),
}

impl PlannerKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::NearestFrontier => "nf",
            PlannerKind::Utility(_) => "ub",
            PlannerKind::Probabilistic(_) => "pb",
        }
    }
}

/// Goal for robot `i` from its own knowledge, assigned as a macro.
pub fn classical_policy_step(kind: &PlannerKind, world: &mut World, i: usize) -> MacroAction {
    let robot = &world.robots()[i];
    let t = world.t();
    let goal = match kind {
        PlannerKind::NearestFrontier => nf_select_goal(&robot.map, robot.position),
        PlannerKind::Utility(p) => {
            let mates: Vec<Cell> = robot.teammates.values().map(|m| m.position).collect();
            ub_select_goal(&robot.map, robot.position, &mates, p)
        }
        PlannerKind::Probabilistic(p) => {
            let mates: Vec<(Cell, u32)> = robot
                .teammates
                .values()
                .map(|m| (m.position, t.saturating_sub(m.position_seen)))
                .collect();
            let occ = pb_propagate_teammates(&robot.map, &mates);
            pb_select_goal(&robot.map, robot.position, &occ, p)
        }
    };
    let index = robot.candidates().cells().iter().position(|&c| c == goal).unwrap_or(0);
    let action = MacroAction { index, goal };
    world.assign(i, action);
    action
}

/// Runs the planner for every robot until the episode ends.
pub fn run_classical(kind: &PlannerKind, world: &mut World) {
    while !world.done() {
        for i in 0..world.team_size() {
            if world.needs_decision(i) {
                classical_policy_step(kind, world, i);
            }
        }
        world.step();
    }
}
