use std::collections::BTreeMap;

use crate::sim::{Cell, GridDims};

use super::belief::BeliefMap;
use super::frontier::{extract_frontiers, select_goal_candidates, GoalCandidates};

/// What robot `i` last learned about a teammate (its entry of `β_i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeammateInfo {
    pub prev_goal: Cell,
    pub position: Cell,
    pub goal: Cell,
    pub map: BeliefMap,
    /// Timestep of the last successful exchange.
    pub last_update: u32,
    /// Timestep the position was last observed (exchange or line of sight).
    pub position_seen: u32,
}

impl TeammateInfo {
    /// Initial entry: the teammate's spawn cell, an empty map, time zero.
    pub fn sentinel(spawn: Cell, dims: GridDims) -> Self {
        Self {
            prev_goal: spawn,
            position: spawn,
            goal: spawn,
            map: BeliefMap::new(dims),
            last_update: 0,
            position_seen: 0,
        }
    }
}

/// A robot's private view: its pose, local map, goals and teammate ledger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobotKnowledge {
    pub id: usize,
    pub position: Cell,
    pub map: BeliefMap,
    pub goal: Cell,
    pub prev_goal: Cell,
    pub q: bool,
    pub teammates: BTreeMap<usize, TeammateInfo>,
}

impl RobotKnowledge {
    pub fn new(id: usize, spawns: &[Cell], dims: GridDims) -> Self {
        let teammates = spawns
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != id)
            .map(|(j, &s)| (j, TeammateInfo::sentinel(s, dims)))
            .collect();
        Self {
            id,
            position: spawns[id],
            map: BeliefMap::new(dims),
            goal: spawns[id],
            prev_goal: spawns[id],
            q: false,
            teammates,
        }
    }

    /// Sets a new exploration goal, shifting the current one into `prev_goal`.
    pub fn set_goal(&mut self, goal: Cell) {
        self.prev_goal = self.goal;
        self.goal = goal;
    }

    pub fn candidates(&self) -> GoalCandidates {
        select_goal_candidates(&extract_frontiers(&self.map), self.position)
    }
}

/// Link conditions for one pair at one timestep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExchangeLink {
    pub in_range: bool,
    pub link_up: bool,
}

/// Pairwise exchange. In range with the link up: both maps merge and both
/// ledger entries refresh. In range with the link down: only positions update.
/// Out of range: nothing changes.
pub fn exchange_information(a: &mut RobotKnowledge, b: &mut RobotKnowledge, link: ExchangeLink, t: u32) {
    assert_ne!(a.id, b.id, "a robot does not exchange with itself");
    if !link.in_range {
        return;
    }
    let a_snapshot = a.clone();
    let b_snapshot = b.clone();
    receive(a, &b_snapshot, link.link_up, t);
    receive(b, &a_snapshot, link.link_up, t);
}

/// Team-wide exchange from a snapshot taken before any pair is processed, so
/// information never relays across more than one hop within a timestep.
pub fn exchange_team<F>(robots: &mut [RobotKnowledge], link: F, t: u32)
where
    F: Fn(usize, usize) -> ExchangeLink,
{
    let snapshot: Vec<RobotKnowledge> = robots.to_vec();
    for (i, robot) in robots.iter_mut().enumerate() {
        for (j, other) in snapshot.iter().enumerate() {
            if i == j {
                continue;
            }
            let l = link(i, j);
            if l.in_range {
                receive(robot, other, l.link_up, t);
            }
        }
    }
}

fn receive(me: &mut RobotKnowledge, other: &RobotKnowledge, link_up: bool, t: u32) {
    if link_up {
        me.map
            .merge_from(&other.map)
            .expect("team maps share dimensions");
    }
    let entry = me
        .teammates
        .get_mut(&other.id)
        .expect("teammate ledger covers the whole team");
    entry.position = other.position;
    entry.position_seen = t;
    if link_up {
        entry.prev_goal = other.prev_goal;
        entry.goal = other.goal;
        entry.map = other.map.clone();
        entry.last_update = t;
    }
}

/// Individual macro observation `z_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroObservation {
    pub robot: usize,
    pub t: u32,
    pub position: Cell,
    pub q: bool,
    pub teammates: BTreeMap<usize, TeammateInfo>,
    /// Local map with overlays: self plus last-known teammates, own candidates.
    pub map: BeliefMap,
    pub explored: usize,
    pub candidates: GoalCandidates,
}

/// Joint macro observation `z⃗` built with privileged access to the whole team.
#[derive(Clone, Debug, PartialEq)]
pub struct JointObservation {
    pub t: u32,
    pub positions: Vec<Cell>,
    pub qs: Vec<bool>,
    pub betas: Vec<BTreeMap<usize, TeammateInfo>>,
    /// Merge of all local maps; overlays carry every robot and every candidate.
    pub global_map: BeliefMap,
    pub explored: usize,
    pub candidates: Vec<GoalCandidates>,
    pub goals: Vec<Cell>,
    pub prev_goals: Vec<Cell>,
}

pub fn build_macro_observation(robot: &RobotKnowledge, t: u32) -> MacroObservation {
    let candidates = robot.candidates();
    let mut map = robot.map.clone();
    let mut positions = vec![robot.position];
    positions.extend(robot.teammates.values().map(|tm| tm.position));
    map.set_robot_positions(&positions);
    map.set_goal_candidates(candidates.cells());
    MacroObservation {
        robot: robot.id,
        t,
        position: robot.position,
        q: robot.q,
        teammates: robot.teammates.clone(),
        explored: robot.map.explored_count(),
        map,
        candidates,
    }
}

pub fn build_joint_observation(robots: &[RobotKnowledge], t: u32) -> JointObservation {
    let dims = robots[0].map.dims();
    let mut global_map = BeliefMap::new(dims);
    for r in robots {
        global_map.merge_from(&r.map).expect("team maps share dimensions");
    }
    let candidates: Vec<GoalCandidates> = robots.iter().map(RobotKnowledge::candidates).collect();
    let positions: Vec<Cell> = robots.iter().map(|r| r.position).collect();
    global_map.set_robot_positions(&positions);
    global_map.set_goal_candidates(candidates.iter().flat_map(|g| g.cells()));
    JointObservation {
        t,
        explored: global_map.explored_count(),
        positions,
        qs: robots.iter().map(|r| r.q).collect(),
        betas: robots.iter().map(|r| r.teammates.clone()).collect(),
        global_map,
        candidates,
        goals: robots.iter().map(|r| r.goal).collect(),
        prev_goals: robots.iter().map(|r| r.prev_goal).collect(),
    }
}
