//! Independent reference implementations used by the integration tests.

use std::collections::VecDeque;

use madenet_core::mapping::BeliefMap;
use madenet_core::sim::{Cell, GridDims, GridEnvironment, Occupancy};
use rand::Rng;

pub fn neighbours(dims: GridDims, c: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    if c.row > 0 {
        out.push(Cell::new(c.row - 1, c.col));
    }
    if c.row + 1 < dims.height {
        out.push(Cell::new(c.row + 1, c.col));
    }
    if c.col > 0 {
        out.push(Cell::new(c.row, c.col - 1));
    }
    if c.col + 1 < dims.width {
        out.push(Cell::new(c.row, c.col + 1));
    }
    out
}

/// Plain BFS over cells accepted by `open`; the start is always admitted.
pub fn bfs(dims: GridDims, start: Cell, open: impl Fn(Cell) -> bool) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; dims.width]; dims.height];
    d[start.row][start.col] = Some(0);
    let mut q = VecDeque::from([start]);
    while let Some(c) = q.pop_front() {
        let here = d[c.row][c.col].unwrap();
        for n in neighbours(dims, c) {
            if d[n.row][n.col].is_none() && open(n) {
                d[n.row][n.col] = Some(here + 1);
                q.push_back(n);
            }
        }
    }
    d
}

/// Known-free cells with an unexplored 4-neighbour, by full scan.
pub fn frontier_scan(map: &BeliefMap) -> Vec<Cell> {
    let dims = map.dims();
    let mut out = Vec::new();
    for r in 0..dims.height {
        for c in 0..dims.width {
            let cell = Cell::new(r, c);
            if map.is_known_free(cell) && neighbours(dims, cell).iter().any(|&n| !map.is_explored(n)) {
                out.push(cell);
            }
        }
    }
    out
}

/// A belief over `env` where each cell is revealed with probability
/// `reveal`, plus a known-free start cell.
pub fn partial_map<R: Rng>(env: &GridEnvironment, reveal: f64, rng: &mut R) -> (BeliefMap, Cell) {
    let dims = env.dims();
    let mut map = BeliefMap::new(dims);
    for cell in dims.cells() {
        if rng.gen_bool(reveal) {
            let occ = if env.is_obstacle(cell) {
                Occupancy::Obstacle
            } else {
                Occupancy::Free
            };
            map.mark(cell, occ);
        }
    }
    let free = env.free_cells();
    let start = free[rng.gen_range(0..free.len())];
    map.mark(start, Occupancy::Free);
    (map, start)
}

/// Nearest frontier by the reference BFS, ties by `(row, col)`.
pub fn nearest_frontier(map: &BeliefMap, start: Cell) -> Option<(Cell, usize)> {
    let d = bfs(map.dims(), start, |c| map.is_known_free(c));
    frontier_scan(map)
        .into_iter()
        .filter_map(|f| d[f.row][f.col].map(|k| (f, k)))
        .min_by_key(|&(f, k)| (k, f.row, f.col))
}
