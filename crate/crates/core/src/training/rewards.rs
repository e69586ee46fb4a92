use std::collections::BTreeSet;

use crate::mapping::BeliefMap;
use crate::sim::Cell;

/// Team bonus for reaching full coverage.
pub const COMPLETION_BONUS: f64 = 100.0;
/// Proximity penalty once a teammate has been in view for more than seven steps.
pub const PROXIMITY_CAP: f64 = -15.0;

/// Penalty for having seen the same teammate for `rho` consecutive steps.
pub fn proximity_penalty(rho: u32) -> f64 {
    match rho {
        0 | 1 => 0.0,
        2..=7 => -((rho as f64).exp() / 5.0).sqrt(),
        _ => PROXIMITY_CAP,
    }
}

/// Consecutive-detection counters for every ordered robot pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoLedger {
    team_size: usize,
    counts: Vec<u32>,
}

impl RhoLedger {
    pub fn new(team_size: usize) -> Self {
        Self {
            team_size,
            counts: vec![0; team_size * team_size],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.team_size + j]
    }

    /// Records which teammates robot `i` detects this step: their counters
    /// grow by one, every other counter of `i` resets.
    pub fn update(&mut self, i: usize, detected: &[usize]) {
        for j in 0..self.team_size {
            if j == i {
                continue;
            }
            let slot = &mut self.counts[i * self.team_size + j];
            *slot = if detected.contains(&j) { *slot + 1 } else { 0 };
        }
    }
}

/// Rewards for one primitive timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRewards {
    pub team: f64,
    pub robots: Vec<f64>,
    /// Distinct team-observed cells that were unexplored before this step.
    pub team_new_cells: usize,
}

/// `observed[i]` are robot `i`'s sensed cells this step; `maps_before[i]` its
/// local map and `team_before` the team union, both before this step's update.
/// `detections[i]` lists the teammates robot `i` currently sees.
pub fn compute_step_rewards(
    observed: &[Vec<Cell>],
    maps_before: &[&BeliefMap],
    team_before: &BeliefMap,
    rho: &RhoLedger,
    detections: &[Vec<usize>],
    completed: bool,
) -> StepRewards {
    let robots = observed
        .iter()
        .enumerate()
        .map(|(i, cells)| {
            let distinct: BTreeSet<Cell> = cells.iter().copied().collect();
            let known = maps_before[i].count_explored(&distinct) as f64;
            let new = distinct.len() as f64 - known;
            let proximity: f64 = detections[i].iter().map(|&j| proximity_penalty(rho.get(i, j))).sum();
            new - known + proximity
        })
        .collect();
    let union: BTreeSet<Cell> = observed.iter().flatten().copied().collect();
    let known = team_before.count_explored(&union);
    let team_new_cells = union.len() - known;
    let mut team = team_new_cells as f64 - known as f64 - 1.0;
    if completed {
        team += COMPLETION_BONUS;
    }
    StepRewards {
        team,
        robots,
        team_new_cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{GridDims, Occupancy};

    #[test]
    fn penalty_values() {
        assert_eq!(proximity_penalty(1), 0.0);
        assert!((proximity_penalty(2) + 1.216).abs() < 1e-3);
        assert_eq!(proximity_penalty(8), -15.0);
        assert!(proximity_penalty(7) >= -15.0);
        for r in 0..20 {
            assert!(proximity_penalty(r + 1) <= proximity_penalty(r));
        }
    }

    #[test]
    fn ledger_counts_and_resets() {
        let mut l = RhoLedger::new(3);
        l.update(0, &[1]);
        l.update(0, &[1, 2]);
        assert_eq!((l.get(0, 1), l.get(0, 2)), (2, 1));
        l.update(0, &[2]);
        assert_eq!((l.get(0, 1), l.get(0, 2)), (0, 2));
        assert_eq!(l.get(1, 0), 0);
    }

    #[test]
    fn six_new_three_known_gives_three() {
        let dims = GridDims::new(5, 5);
        let mut before = BeliefMap::new(dims);
        let cells: Vec<Cell> = (0..9).map(|k| Cell::new(k / 5, k % 5)).collect();
        for c in &cells[..3] {
            before.mark(*c, Occupancy::Free);
        }
        let r = compute_step_rewards(&[cells], &[&before], &before, &RhoLedger::new(1), &[vec![]], false);
        assert_eq!(r.robots, vec![3.0]);
        assert_eq!(r.team, 2.0);
        assert_eq!(r.team_new_cells, 6);
    }

    #[test]
    fn nothing_new_costs_known_plus_one_and_bonus_applies() {
        let dims = GridDims::new(3, 3);
        let mut before = BeliefMap::new(dims);
        before.mark(Cell::new(0, 0), Occupancy::Free);
        before.mark(Cell::new(0, 1), Occupancy::Free);
        let obs = vec![vec![Cell::new(0, 0), Cell::new(0, 1)]];
        let r = compute_step_rewards(&obs, &[&before], &before, &RhoLedger::new(1), &[vec![]], false);
        assert_eq!(r.team, -3.0);
        let r = compute_step_rewards(&obs, &[&before], &before, &RhoLedger::new(1), &[vec![]], true);
        assert_eq!(r.team, 97.0);
    }

    #[test]
    fn proximity_adds_per_detected_teammate() {
        let dims = GridDims::new(3, 3);
        let m = BeliefMap::new(dims);
        let mut rho = RhoLedger::new(3);
        for _ in 0..3 {
            rho.update(0, &[1, 2]);
        }
        let obs = vec![vec![], vec![], vec![]];
        let r = compute_step_rewards(&obs, &[&m, &m, &m], &m, &rho, &[vec![1, 2], vec![], vec![]], false);
        assert!((r.robots[0] - 2.0 * proximity_penalty(3)).abs() < 1e-12);
    }
}
