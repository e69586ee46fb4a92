use crate::sim::Cell;

use super::belief::BeliefMap;

/// Known-free cells with at least one unexplored 4-neighbour, in `(row, col)` order.
pub fn extract_frontiers(map: &BeliefMap) -> Vec<Cell> {
    let dims = map.dims();
    dims.cells()
        .filter(|&c| map.is_known_free(c) && dims.neighbors4(c).any(|n| !map.is_explored(n)))
        .collect()
}

pub fn is_frontier(map: &BeliefMap, cell: Cell) -> bool {
    map.is_known_free(cell) && map.dims().neighbors4(cell).any(|n| !map.is_explored(n))
}

/// Number of macro actions (goal candidates) per robot.
pub const CANDIDATES: usize = 4;

/// Four spatially spread goal candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GoalCandidates(pub [Cell; CANDIDATES]);

impl GoalCandidates {
    pub fn uniform(cell: Cell) -> Self {
        Self([cell; CANDIDATES])
    }

    pub fn get(&self, index: usize) -> Cell {
        self.0[index]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.0
    }
}

/// Greedy farthest-point sampling: seed with the frontier nearest the robot,
/// then repeatedly add the frontier maximizing its minimum squared Euclidean
/// distance to the chosen set. Ties go to the smallest `(row, col)`. Fewer than
/// four frontiers are padded by cycling; none yields the robot's own cell.
pub fn select_goal_candidates(frontiers: &[Cell], robot: Cell) -> GoalCandidates {
    if frontiers.is_empty() {
        return GoalCandidates::uniform(robot);
    }
    let order = farthest_point_order(frontiers, robot, CANDIDATES);
    let mut out = [order[0]; CANDIDATES];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = order[k % order.len()];
    }
    GoalCandidates(out)
}

/// The first `k` picks of farthest-point sampling (fewer if not enough frontiers).
pub fn farthest_point_order(frontiers: &[Cell], robot: Cell, k: usize) -> Vec<Cell> {
    let mut remaining: Vec<Cell> = frontiers.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let Some(first) = remaining.iter().copied().min_by_key(|c| (c.dist2(robot), *c)) else {
        return Vec::new();
    };
    let mut chosen = vec![first];
    // min_dist[i]: squared distance from remaining[i] to the nearest chosen cell.
    let mut min_dist: Vec<usize> = remaining.iter().map(|c| c.dist2(first)).collect();
    let mut taken = vec![false; remaining.len()];
    taken[remaining.binary_search(&first).unwrap()] = true;

    while chosen.len() < k {
        let best = (0..remaining.len())
            .filter(|&i| !taken[i])
            .max_by(|&a, &b| min_dist[a].cmp(&min_dist[b]).then(remaining[b].cmp(&remaining[a])));
        let Some(best) = best else { break };
        taken[best] = true;
        let pick = remaining[best];
        chosen.push(pick);
        for (d, c) in min_dist.iter_mut().zip(&remaining) {
            *d = (*d).min(c.dist2(pick));
        }
    }
    chosen
}
