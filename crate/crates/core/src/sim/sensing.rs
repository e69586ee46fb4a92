use rand::Rng;

use super::grid::{Cell, GridEnvironment};

/// Sensor footprint and per-cell miss probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorConfig {
    /// Chebyshev radius of the square footprint.
    pub range: usize,
    /// Probability that a visible cell (other than the robot's own) is not reported.
    pub miss_probability: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            range: 4,
            miss_probability: 0.1,
        }
    }
}

impl SensorConfig {
    pub fn noiseless(range: usize) -> Self {
        Self {
            range,
            miss_probability: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Free,
    Obstacle,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorReading {
    pub origin: Cell,
    pub observed: Vec<(Cell, Occupancy)>,
    pub visible_teammates: Vec<(usize, Cell)>,
}

impl SensorReading {
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.observed.iter().map(|(c, _)| *c)
    }
}

/// Cells touched by the segment between the two cell centres, endpoints
/// excluded. When the segment passes exactly through a lattice corner both
/// cells sharing that corner are included.
pub fn supercover_between(from: Cell, to: Cell) -> Vec<Cell> {
    let (x0, y0) = (from.col as i64, from.row as i64);
    let (x1, y1) = (to.col as i64, to.row as i64);
    let (nx, ny) = ((x1 - x0).abs(), (y1 - y0).abs());
    let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
    let (mut x, mut y) = (x0, y0);
    let (mut ix, mut iy) = (0, 0);
    let mut cells = Vec::with_capacity((nx + ny) as usize);
    let at = |x: i64, y: i64| Cell::new(y as usize, x as usize);
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            cells.push(at(x + sx, y));
            cells.push(at(x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        cells.push(at(x, y));
    }
    cells.retain(|&c| c != from && c != to);
    cells
}

pub fn line_of_sight(env: &GridEnvironment, from: Cell, to: Cell) -> bool {
    supercover_between(from, to)
        .into_iter()
        .all(|c| !env.is_obstacle(c))
}

/// True when `to` lies inside the Chebyshev footprint of `from` with a clear line of sight.
pub fn in_sensing_range(env: &GridEnvironment, from: Cell, to: Cell, range: usize) -> bool {
    from.chebyshev(to) <= range && line_of_sight(env, from, to)
}

/// Pre-drop visible set in row-major order.
pub fn visible_cells(env: &GridEnvironment, origin: Cell, range: usize) -> Vec<Cell> {
    let r0 = origin.row.saturating_sub(range);
    let c0 = origin.col.saturating_sub(range);
    let r1 = (origin.row + range).min(env.height() - 1);
    let c1 = (origin.col + range).min(env.width() - 1);
    let mut cells = Vec::with_capacity((r1 - r0 + 1) * (c1 - c0 + 1));
    for row in r0..=r1 {
        for col in c0..=c1 {
            let cell = Cell::new(row, col);
            if line_of_sight(env, origin, cell) {
                cells.push(cell);
            }
        }
    }
    cells
}

/// Primitive observation for `robot_id`. Every visible cell except the
/// robot's own is independently dropped with the configured probability;
/// teammates are reported from the pre-drop visible set.
pub fn sense<R: Rng>(
    env: &GridEnvironment,
    robot_id: usize,
    positions: &[Cell],
    config: &SensorConfig,
    rng: &mut R,
) -> SensorReading {
    let origin = positions[robot_id];
    let visible = visible_cells(env, origin, config.range);
    let mut observed = Vec::with_capacity(visible.len());
    for &cell in &visible {
        let keep = cell == origin
            || config.miss_probability <= 0.0
            || !rng.gen_bool(config.miss_probability);
        if keep {
            let occupancy = if env.is_obstacle(cell) {
                Occupancy::Obstacle
            } else {
                Occupancy::Free
            };
            observed.push((cell, occupancy));
        }
    }
    let visible_teammates = positions
        .iter()
        .enumerate()
        .filter(|&(j, p)| j != robot_id && p.chebyshev(origin) <= config.range && visible.binary_search(p).is_ok())
        .map(|(j, p)| (j, *p))
        .collect();
    SensorReading {
        origin,
        observed,
        visible_teammates,
    }
}

/// Returns `q_i` and the list of visible teammates.
pub fn detect_teammates(
    env: &GridEnvironment,
    positions: &[Cell],
    robot_id: usize,
    range: usize,
) -> (bool, Vec<(usize, Cell)>) {
    let me = positions[robot_id];
    let visible: Vec<(usize, Cell)> = positions
        .iter()
        .enumerate()
        .filter(|&(j, p)| j != robot_id && in_sensing_range(env, me, *p, range))
        .map(|(j, p)| (j, *p))
        .collect();
    (!visible.is_empty(), visible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream_rng, Stream};

    #[test]
    fn degenerate_and_adjacent_segments_are_clear() {
        let env = GridEnvironment::from_ascii(&["...", ".#.", "..."]);
        let c = Cell::new(0, 0);
        assert!(line_of_sight(&env, c, c));
        assert!(line_of_sight(&env, Cell::new(0, 1), Cell::new(1, 1)));
        assert!(line_of_sight(&env, Cell::new(1, 0), Cell::new(1, 1)));
    }

    #[test]
    fn midpoint_obstacle_blocks_straight_segment() {
        let env = GridEnvironment::from_ascii(&["..#..", ".....", "....."]);
        // Hand trace: (0,0)->(0,4) passes through (0,1), (0,2), (0,3).
        assert_eq!(
            supercover_between(Cell::new(0, 0), Cell::new(0, 4)),
            vec![Cell::new(0, 1), Cell::new(0, 2), Cell::new(0, 3)]
        );
        assert!(!line_of_sight(&env, Cell::new(0, 0), Cell::new(0, 4)));
        assert!(line_of_sight(&env, Cell::new(1, 0), Cell::new(1, 4)));
    }

    #[test]
    fn diagonal_through_corner_touches_both_side_cells() {
        let between = supercover_between(Cell::new(0, 0), Cell::new(2, 2));
        assert_eq!(
            between,
            vec![Cell::new(0, 1), Cell::new(1, 0), Cell::new(1, 1), Cell::new(1, 2), Cell::new(2, 1)]
        );
    }

    #[test]
    fn open_clearing_sees_81_cells() {
        let env = GridEnvironment::open(9, 9);
        let mut rng = stream_rng(0, Stream::Sensing);
        let reading = sense(&env, 0, &[Cell::new(4, 4)], &SensorConfig::noiseless(4), &mut rng);
        assert_eq!(reading.observed.len(), 81);
        assert!(reading.observed.iter().all(|(_, o)| *o == Occupancy::Free));
    }

    #[test]
    fn wall_blocks_cells_beyond_it() {
        let env = GridEnvironment::from_ascii(&[
            ".....#...", //
            ".....#...", //
            ".....#...", //
            ".....#...", //
            "....R#...", //
            ".....#...", //
            ".....#...", //
            ".....#...", //
            ".....#...",
        ]);
        let me = Cell::new(4, 4);
        let mut rng = stream_rng(0, Stream::Sensing);
        let reading = sense(&env, 0, &[me], &SensorConfig::noiseless(4), &mut rng);
        assert!(reading.cells().all(|c| c.col <= 5));
        assert!(reading.observed.contains(&(Cell::new(4, 5), Occupancy::Obstacle)));
    }

    #[test]
    fn miss_rate_is_about_ten_percent() {
        let env = GridEnvironment::open(9, 9);
        let mut rng = stream_rng(11, Stream::Sensing);
        let me = Cell::new(4, 4);
        let probe = Cell::new(2, 6);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| {
                let r = sense(&env, 0, &[me], &SensorConfig::default(), &mut rng);
                assert!(r.observed.iter().any(|(c, _)| *c == me));
                r.observed.iter().any(|(c, _)| *c == probe)
            })
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.9).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn teammate_detection() {
        let open = GridEnvironment::open(10, 10);
        let (q, _) = detect_teammates(&open, &[Cell::new(5, 5)], 0, 4);
        assert!(!q);
        let (q, seen) = detect_teammates(&open, &[Cell::new(5, 2), Cell::new(5, 5)], 0, 4);
        assert!(q);
        assert_eq!(seen, vec![(1, Cell::new(5, 5))]);

        let walled = GridEnvironment::from_ascii(&[
            "......", //
            "......", //
            "...#..", //
            "......",
        ]);
        let (q, _) = detect_teammates(&walled, &[Cell::new(2, 1), Cell::new(2, 4)], 0, 4);
        assert!(!q);
        let (q, _) = detect_teammates(&walled, &[Cell::new(2, 4), Cell::new(2, 1)], 0, 4);
        assert!(!q);
    }

    #[test]
    fn teammates_reported_from_pre_drop_set() {
        let env = GridEnvironment::open(10, 10);
        let mut rng = stream_rng(3, Stream::Sensing);
        let always_miss = SensorConfig {
            range: 4,
            miss_probability: 1.0,
        };
        let positions = [Cell::new(5, 5), Cell::new(5, 7)];
        let r = sense(&env, 0, &positions, &always_miss, &mut rng);
        assert_eq!(r.observed.len(), 1);
        assert_eq!(r.visible_teammates, vec![(1, Cell::new(5, 7))]);
    }
}
