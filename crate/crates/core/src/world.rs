//! One team exploring one environment: the primitive-step loop shared by
//! training rollouts, learned-policy evaluation and the classical baselines.

use crate::mapping::{
    build_joint_observation, build_macro_observation, exchange_team, BeliefMap, ExchangeLink, JointObservation,
    MacroObservation, RobotKnowledge,
};
use crate::nav::{MacroAction, MacroExecutor};
use crate::sim::{
    bfs_free, detect_teammates, in_sensing_range, pair_index, pairs, sense, step_robot, Cell, CommLinks,
    GridEnvironment, MotionConfig, SensorConfig, SensorReading, SimRngs,
};
use crate::training::rewards::{compute_step_rewards, RhoLedger};

/// Primitive-step cap per episode or trial.
pub const STEP_CAP: u32 = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    pub sensor: SensorConfig,
    pub motion: MotionConfig,
    pub csp: f64,
    pub step_cap: u32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            sensor: SensorConfig::default(),
            motion: MotionConfig::default(),
            csp: 1.0,
            step_cap: STEP_CAP,
        }
    }
}

/// Result of one primitive timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub team_reward: f64,
    pub robot_rewards: Vec<f64>,
    pub team_new_cells: usize,
    /// Robots whose macro action terminated this step.
    pub terminated: Vec<bool>,
    pub completed: bool,
    pub done: bool,
}

/// Team explored-cell count and cumulative distance after each timestep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub t: u32,
    pub explored: usize,
    /// Explored cells among those that must be covered for completion.
    pub covered: usize,
    pub distance_m: f64,
}

#[derive(Clone, Debug)]
pub struct World {
    env: GridEnvironment,
    config: WorldConfig,
    t: u32,
    robots: Vec<RobotKnowledge>,
    executors: Vec<Option<MacroExecutor>>,
    q_prev: Vec<bool>,
    links: CommLinks,
    rho: RhoLedger,
    rngs: SimRngs,
    distances: Vec<f64>,
    interactions: u64,
    team_map: BeliefMap,
    reachable: Vec<Cell>,
    completed: bool,
    series: Vec<SeriesPoint>,
}

impl World {
    /// Places the team at `spawns` and runs the initial sensing, detection and
    /// exchange at t = 0. Pairs already in range count as range entries.
    pub fn new(env: GridEnvironment, spawns: &[Cell], config: WorldConfig, seed: u64) -> Self {
        let n = spawns.len();
        assert!(n >= 1, "team must not be empty");
        assert!(spawns.iter().all(|&c| env.is_free(c)), "spawn cells must be free");
        let dims = env.dims();
        let dist = bfs_free(&env, spawns[0]);
        let reachable = dims.cells().filter(|&c| dist[dims.index(c)].is_some()).collect();
        let mut world = Self {
            robots: (0..n).map(|i| RobotKnowledge::new(i, spawns, dims)).collect(),
            executors: vec![None; n],
            q_prev: vec![false; n],
            links: CommLinks::new(n, config.csp),
            rho: RhoLedger::new(n),
            rngs: SimRngs::new(seed),
            distances: vec![0.0; n],
            interactions: 0,
            team_map: BeliefMap::new(dims),
            reachable,
            completed: false,
            series: Vec::new(),
            t: 0,
            config,
            env,
        };
        let readings = world.sense_all();
        let detections = world.detect_all();
        for (i, r) in readings.iter().enumerate() {
            world.robots[i].map.update(r);
            world.team_map.update(r);
        }
        world.apply_detections(&detections);
        world.communicate();
        world.completed = world.coverage_complete();
        world.record_series();
        world
    }

    pub fn env(&self) -> &GridEnvironment {
        &self.env
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn team_size(&self) -> usize {
        self.robots.len()
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn robots(&self) -> &[RobotKnowledge] {
        &self.robots
    }

    pub fn positions(&self) -> Vec<Cell> {
        self.robots.iter().map(|r| r.position).collect()
    }

    pub fn links(&self) -> &CommLinks {
        &self.links
    }

    pub fn rho(&self) -> &RhoLedger {
        &self.rho
    }

    pub fn executor(&self, i: usize) -> Option<&MacroExecutor> {
        self.executors[i].as_ref()
    }

    pub fn distance_m(&self) -> f64 {
        self.distances.iter().sum()
    }

    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    pub fn team_map(&self) -> &BeliefMap {
        &self.team_map
    }

    pub fn team_explored(&self) -> usize {
        self.team_map.explored_count()
    }

    pub fn reachable_free(&self) -> usize {
        self.reachable.len()
    }

    pub fn series(&self) -> &[SeriesPoint] {
        &self.series
    }

    pub fn completed(&self) -> bool {
        self.completed
    }

    pub fn done(&self) -> bool {
        self.completed || self.t >= self.config.step_cap
    }

    /// True when robot `i` has no running macro and needs a new one.
    pub fn needs_decision(&self, i: usize) -> bool {
        self.executors[i].as_ref().is_none_or(|e| e.status().is_done())
    }

    pub fn individual_observation(&self, i: usize) -> MacroObservation {
        build_macro_observation(&self.robots[i], self.t)
    }

    pub fn joint_observation(&self) -> JointObservation {
        build_joint_observation(&self.robots, self.t)
    }

    /// Starts a macro toward `action.goal` for robot `i`.
    pub fn assign(&mut self, i: usize, action: MacroAction) {
        assert!(self.env.dims().contains(action.goal), "goal outside the grid");
        self.robots[i].set_goal(action.goal);
        self.executors[i] = Some(MacroExecutor::for_grid(action, self.env.width(), self.env.height()));
    }

    /// Assigns goal candidate `index` of robot `i`'s current candidate set.
    pub fn assign_candidate(&mut self, i: usize, index: usize) -> MacroAction {
        let goal = self.robots[i].candidates().get(index);
        let action = MacroAction { index, goal };
        self.assign(i, action);
        action
    }

    fn sense_all(&mut self) -> Vec<SensorReading> {
        let positions = self.positions();
        (0..self.robots.len())
            .map(|i| sense(&self.env, i, &positions, &self.config.sensor, &mut self.rngs.sensing))
            .collect()
    }

    fn detect_all(&self) -> Vec<Vec<usize>> {
        let positions = self.positions();
        (0..self.robots.len())
            .map(|i| {
                detect_teammates(&self.env, &positions, i, self.config.sensor.range)
                    .1
                    .into_iter()
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }

    /// Updates ρ, the detection flag and line-of-sight teammate positions.
    fn apply_detections(&mut self, detections: &[Vec<usize>]) {
        let positions = self.positions();
        for (i, seen) in detections.iter().enumerate() {
            self.rho.update(i, seen);
            self.robots[i].q = !seen.is_empty();
            for &j in seen {
                let entry = self.robots[i].teammates.get_mut(&j).expect("teammate ledger");
                entry.position = positions[j];
                entry.position_seen = self.t;
            }
        }
    }

    fn in_range_pairs(&self) -> Vec<bool> {
        let positions = self.positions();
        let range = self.config.sensor.range;
        pairs(self.robots.len())
            .map(|(i, j)| in_sensing_range(&self.env, positions[i], positions[j], range))
            .collect()
    }

    /// Link tick then pairwise exchange. Returns the number of pairs in range.
    fn communicate(&mut self) -> usize {
        let in_range = self.in_range_pairs();
        self.links.tick(&in_range, &mut self.rngs.link);
        let n = self.robots.len();
        let links = &self.links;
        exchange_team(
            &mut self.robots,
            |i, j| ExchangeLink {
                in_range: in_range[pair_index(n, i, j)],
                link_up: links.can_exchange(i, j),
            },
            self.t,
        );
        in_range.iter().filter(|&&b| b).count()
    }

    fn coverage_complete(&self) -> bool {
        self.covered() == self.reachable.len()
    }

    fn covered(&self) -> usize {
        self.reachable.iter().filter(|&&c| self.team_map.is_explored(c)).count()
    }

    fn record_series(&mut self) {
        self.series.push(SeriesPoint {
            t: self.t,
            explored: self.team_map.explored_count(),
            covered: self.covered(),
            distance_m: self.distance_m(),
        });
    }

    /// Advances one primitive timestep. Every robot must hold a macro.
    pub fn step(&mut self) -> StepOutcome {
        assert!(!self.done(), "episode already finished");
        let n = self.robots.len();

        let mut actions = Vec::with_capacity(n);
        for i in 0..n {
            let exec = self.executors[i].as_mut().expect("every robot needs a macro before stepping");
            let pos = self.robots[i].position;
            let action = if exec.status().is_done() {
                crate::sim::PrimitiveAction::Stay
            } else {
                exec.next_action(pos, &self.robots[i].map)
            };
            actions.push(action);
        }
        for (i, &action) in actions.iter().enumerate() {
            let out = step_robot(&self.env, self.robots[i].position, action, &self.config.motion, &mut self.rngs.motion);
            if out.moved {
                self.distances[i] += 1.0;
            }
            self.robots[i].position = out.position;
        }

        let readings = self.sense_all();
        let detections = self.detect_all();
        for (i, seen) in detections.iter().enumerate() {
            self.rho.update(i, seen);
        }

        let observed: Vec<Vec<Cell>> = readings.iter().map(|r| r.cells().collect()).collect();
        let team_before = self.team_map.clone();
        for r in &readings {
            self.team_map.update(r);
        }
        self.completed = self.coverage_complete();
        let rewards = {
            let maps: Vec<&BeliefMap> = self.robots.iter().map(|r| &r.map).collect();
            compute_step_rewards(&observed, &maps, &team_before, &self.rho, &detections, self.completed)
        };
        for (i, r) in readings.iter().enumerate() {
            self.robots[i].map.update(r);
        }

        self.t += 1;
        // ρ was already advanced above; only refresh q and sighted positions.
        let positions = self.positions();
        for (i, seen) in detections.iter().enumerate() {
            self.robots[i].q = !seen.is_empty();
            for &j in seen {
                let entry = self.robots[i].teammates.get_mut(&j).expect("teammate ledger");
                entry.position = positions[j];
                entry.position_seen = self.t;
            }
        }
        self.interactions += self.communicate() as u64;

        let mut terminated = vec![false; n];
        for i in 0..n {
            let event = self.robots[i].q && !self.q_prev[i];
            self.q_prev[i] = self.robots[i].q;
            let exec = self.executors[i].as_mut().expect("macro present");
            let was_done = exec.status().is_done();
            let status = exec.observe(self.robots[i].position, event);
            terminated[i] = status.is_done() || was_done;
        }
        self.record_series();
        StepOutcome {
            team_reward: rewards.team,
            robot_rewards: rewards.robots,
            team_new_cells: rewards.team_new_cells,
            terminated,
            completed: self.completed,
            done: self.done(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{stream_rng, Stream};
    use rand::Rng;

    fn run_random(env: GridEnvironment, spawns: &[Cell], seed: u64) -> World {
        let mut w = World::new(env, spawns, WorldConfig::default(), seed);
        let mut rng = stream_rng(seed, Stream::Policy);
        while !w.done() {
            for i in 0..w.team_size() {
                if w.needs_decision(i) {
                    w.assign_candidate(i, rng.gen_range(0..4));
                }
            }
            w.step();
        }
        w
    }

    #[test]
    fn empty_room_is_completed() {
        let env = GridEnvironment::open(6, 6);
        let w = run_random(env, &[Cell::new(0, 0), Cell::new(5, 5)], 1);
        assert!(w.completed());
        assert_eq!(w.team_explored(), 36);
    }

    #[test]
    fn team_new_cells_sum_to_explored_growth() {
        let env = GridEnvironment::generate(12, 12, 0.3, 5).unwrap();
        let spawns = env.team_spawn(0, 3);
        let mut w = World::new(env, &spawns, WorldConfig::default(), 3);
        let initial = w.team_explored();
        let mut rng = stream_rng(3, Stream::Policy);
        let mut total = 0;
        while !w.done() {
            for i in 0..3 {
                if w.needs_decision(i) {
                    w.assign_candidate(i, rng.gen_range(0..4));
                }
            }
            total += w.step().team_new_cells;
        }
        assert_eq!(total, w.team_explored() - initial);
        let s = w.series();
        assert!(s.windows(2).all(|p| p[0].explored <= p[1].explored));
        assert_eq!(s.len() as u32, w.t() + 1);
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let env = GridEnvironment::generate(12, 12, 0.4, 8).unwrap();
        let spawns = env.team_spawn(2, 3);
        let a = run_random(env.clone(), &spawns, 11);
        let b = run_random(env, &spawns, 11);
        assert_eq!(a.series(), b.series());
        assert_eq!(a.interactions(), b.interactions());
    }
}
