use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::rng::{stream_rng, Stream};

/// A grid cell addressed by `(row, col)`. The derived ordering is the
/// lexicographic `(row, col)` order used for every deterministic tie-break.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn chebyshev(self, other: Cell) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// Squared Euclidean distance; exact, so it is safe for tie comparisons.
    pub fn dist2(self, other: Cell) -> usize {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr * dr + dc * dc
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Width/height pair with row-major indexing helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
}

impl GridDims {
    pub const fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(self.contains(cell), "{cell} outside {}x{}", self.width, self.height);
        cell.row * self.width + cell.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index / self.width, index % self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(move |i| self.cell(i))
    }

    /// In-bounds 4-neighbours in the fixed order up, down, left, right.
    pub fn neighbors4(&self, cell: Cell) -> impl Iterator<Item = Cell> {
        let dims = *self;
        let up = cell.row.checked_sub(1).map(|r| Cell::new(r, cell.col));
        let down = Some(Cell::new(cell.row + 1, cell.col));
        let left = cell.col.checked_sub(1).map(|c| Cell::new(cell.row, c));
        let right = Some(Cell::new(cell.row, cell.col + 1));
        [up, down, left, right]
            .into_iter()
            .flatten()
            .filter(move |c| dims.contains(*c))
    }

    /// The four corners in the order top-left, top-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [Cell; 4] {
        let (r, c) = (self.height - 1, self.width - 1);
        [Cell::new(0, 0), Cell::new(0, c), Cell::new(r, 0), Cell::new(r, c)]
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid generation parameters: {0}")]
    InvalidParameters(String),
    #[error("could not generate a connected environment at density {density} after {attempts} attempts")]
    GenerationFailed { density: f64, attempts: usize },
    #[error("grid parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MAX_GENERATION_ATTEMPTS: usize = 16;
const DENSITY_TOLERANCE: f64 = 0.02;

/// Ground-truth occupancy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEnvironment {
    dims: GridDims,
    obstacles: Vec<bool>,
    density: f64,
    seed: u64,
    /// Spawn anchor for each corner, indexed like [`GridDims::corners`].
    spawn_anchors: Vec<Cell>,
}

impl GridEnvironment {
    /// Builds an environment from an explicit obstacle mask. Spawn anchors are
    /// the free cells nearest each corner.
    pub fn from_mask(width: usize, height: usize, obstacles: Vec<bool>) -> Self {
        assert_eq!(obstacles.len(), width * height, "mask length mismatch");
        let dims = GridDims::new(width, height);
        let density = obstacles.iter().filter(|o| **o).count() as f64 / dims.len() as f64;
        let mut env = Self {
            dims,
            obstacles,
            density,
            seed: 0,
            spawn_anchors: Vec::new(),
        };
        env.spawn_anchors = env.nearest_free_to_corners();
        env
    }

    /// Parses rows of `#` (obstacle) and `.`/`S` (free). Convenient in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let obstacles = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), width, "ragged ascii grid");
                r.chars().map(|ch| ch == '#')
            })
            .collect();
        Self::from_mask(width, height, obstacles)
    }

    pub fn open(width: usize, height: usize) -> Self {
        Self::from_mask(width, height, vec![false; width * height])
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn obstacle_mask(&self) -> &[bool] {
        &self.obstacles
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        self.dims.contains(cell)
    }

    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.obstacles[self.dims.index(cell)]
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.is_obstacle(cell)
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        self.dims.cells().filter(|c| !self.is_obstacle(*c)).collect()
    }

    pub fn free_count(&self) -> usize {
        self.obstacles.iter().filter(|o| !**o).count()
    }

    pub fn obstacle_fraction(&self) -> f64 {
        self.obstacles.iter().filter(|o| **o).count() as f64 / self.dims.len() as f64
    }

    pub fn spawn_anchors(&self) -> &[Cell] {
        &self.spawn_anchors
    }

    /// Spawn cells for a team clustered at `corner` (0..4): the anchor plus the
    /// next free cells by BFS distance from it, ties broken by `(row, col)`.
    pub fn team_spawn(&self, corner: usize, team_size: usize) -> Vec<Cell> {
        let anchor = self.spawn_anchors[corner % self.spawn_anchors.len()];
        let dist = bfs_free(self, anchor);
        let mut reachable: Vec<(usize, Cell)> = self
            .dims
            .cells()
            .filter_map(|c| dist[self.dims.index(c)].map(|d| (d, c)))
            .collect();
        reachable.sort();
        reachable.into_iter().take(team_size).map(|(_, c)| c).collect()
    }

    /// Distinct free cells drawn uniformly at random.
    pub fn random_spawn<R: Rng>(&self, team_size: usize, rng: &mut R) -> Vec<Cell> {
        let free = self.free_cells();
        free.choose_multiple(rng, team_size.min(free.len()))
            .copied()
            .collect()
    }

    /// Number of 4-connected components of free space.
    pub fn free_components(&self) -> usize {
        components(self.dims, &self.obstacles).len()
    }

    fn nearest_free_to_corners(&self) -> Vec<Cell> {
        self.dims
            .corners()
            .iter()
            .filter_map(|&corner| {
                self.dims
                    .cells()
                    .filter(|c| !self.is_obstacle(*c))
                    .min_by_key(|c| (c.dist2(corner), *c))
            })
            .collect()
    }

    /// Seeded generation: Bernoulli blob seeds grown by 1-3 cells, connectivity
    /// repaired by carving corridors between the two largest free components,
    /// then topped up to the target density without disconnecting free space.
    pub fn generate(width: usize, height: usize, density: f64, seed: u64) -> Result<Self, GridError> {
        if width < 5 || height < 5 {
            return Err(GridError::InvalidParameters(format!(
                "grid must be at least 5x5, got {width}x{height}"
            )));
        }
        if !(0.0..=0.8).contains(&density) {
            return Err(GridError::InvalidParameters(format!(
                "density {density} outside [0, 0.8]"
            )));
        }
        let dims = GridDims::new(width, height);
        let target = (density * dims.len() as f64).round() as usize;
        let mut rng = stream_rng(seed, Stream::Environment);

        for _ in 0..MAX_GENERATION_ATTEMPTS {
            let mut mask = vec![false; dims.len()];
            scatter_blobs(dims, &mut mask, density, target, &mut rng);
            connect_components(dims, &mut mask);
            top_up(dims, &mut mask, target, &mut rng);

            let count = mask.iter().filter(|o| **o).count();
            let fraction = count as f64 / dims.len() as f64;
            if (fraction - density).abs() <= DENSITY_TOLERANCE && count < dims.len() {
                let mut env = Self {
                    dims,
                    obstacles: mask,
                    density,
                    seed,
                    spawn_anchors: Vec::new(),
                };
                env.spawn_anchors = env.nearest_free_to_corners();
                return Ok(env);
            }
        }
        Err(GridError::GenerationFailed {
            density,
            attempts: MAX_GENERATION_ATTEMPTS,
        })
    }

    /// Text form: `GRID <w> <h> <density> <seed>` then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "GRID {} {} {} {}\n",
            self.width(),
            self.height(),
            self.density,
            self.seed
        );
        for row in 0..self.height() {
            for col in 0..self.width() {
                let cell = Cell::new(row, col);
                let ch = if self.is_obstacle(cell) {
                    '#'
                } else if self.spawn_anchors.contains(&cell) {
                    'S'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| GridError::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = |message: &str| GridError::Parse {
            line: 1,
            message: message.to_string(),
        };
        if fields.len() != 5 || fields[0] != "GRID" {
            return Err(bad_header("expected `GRID <width> <height> <density> <seed>`"));
        }
        let width: usize = fields[1].parse().map_err(|_| bad_header("bad width"))?;
        let height: usize = fields[2].parse().map_err(|_| bad_header("bad height"))?;
        let density: f64 = fields[3].parse().map_err(|_| bad_header("bad density"))?;
        let seed: u64 = fields[4].parse().map_err(|_| bad_header("bad seed"))?;
        let dims = GridDims::new(width, height);

        let mut obstacles = Vec::with_capacity(dims.len());
        let mut marked = Vec::new();
        let mut rows = 0;
        for (i, line) in lines {
            if rows == height {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(GridError::Parse {
                    line: i + 1,
                    message: format!("more than {height} rows"),
                });
            }
            if line.chars().count() != width {
                return Err(GridError::Parse {
                    line: i + 1,
                    message: format!("expected {width} cells, found {}", line.chars().count()),
                });
            }
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '#' => obstacles.push(true),
                    '.' => obstacles.push(false),
                    'S' => {
                        obstacles.push(false);
                        marked.push(Cell::new(rows, col));
                    }
                    other => {
                        return Err(GridError::Parse {
                            line: i + 1,
                            message: format!("unexpected character {other:?}"),
                        })
                    }
                }
            }
            rows += 1;
        }
        if rows != height {
            return Err(GridError::Parse {
                line: rows + 2,
                message: format!("expected {height} rows, found {rows}"),
            });
        }
        let mut env = Self {
            dims,
            obstacles,
            density,
            seed,
            spawn_anchors: Vec::new(),
        };
        env.spawn_anchors = if marked.is_empty() {
            env.nearest_free_to_corners()
        } else {
            dims.corners()
                .iter()
                .map(|&corner| *marked.iter().min_by_key(|c| (c.dist2(corner), **c)).unwrap())
                .collect()
        };
        Ok(env)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, GridError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), GridError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// BFS distances over free cells from `start`; `None` marks unreachable cells.
pub fn bfs_free(env: &GridEnvironment, start: Cell) -> Vec<Option<usize>> {
    let dims = env.dims();
    let mut dist = vec![None; dims.len()];
    if !env.is_free(start) {
        return dist;
    }
    let mut queue = VecDeque::from([start]);
    dist[dims.index(start)] = Some(0);
    while let Some(cell) = queue.pop_front() {
        let d = dist[dims.index(cell)].unwrap();
        for n in dims.neighbors4(cell) {
            let ni = dims.index(n);
            if !env.is_obstacle(n) && dist[ni].is_none() {
                dist[ni] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Free-space components, each a list of cell indices, largest first
/// (ties by smallest member index).
fn components(dims: GridDims, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; dims.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..dims.len() {
        if mask[start] || label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < members.len() {
            let cell = dims.cell(members[head]);
            head += 1;
            for n in dims.neighbors4(cell) {
                let ni = dims.index(n);
                if !mask[ni] && label[ni] == usize::MAX {
                    label[ni] = id;
                    members.push(ni);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

fn scatter_blobs<R: Rng>(dims: GridDims, mask: &mut [bool], density: f64, target: usize, rng: &mut R) {
    // Mean blob size is about three cells (seed plus 1-3 grown cells, minus overlap).
    let seed_p = (density / 3.0).clamp(0.0, 1.0);
    let mut count = 0;
    for idx in 0..dims.len() {
        if count >= target {
            break;
        }
        if !rng.gen_bool(seed_p) {
            continue;
        }
        let mut cell = dims.cell(idx);
        if !mask[idx] {
            mask[idx] = true;
            count += 1;
        }
        let grow = rng.gen_range(1..=3);
        for _ in 0..grow {
            if count >= target {
                break;
            }
            let neighbors: Vec<Cell> = dims.neighbors4(cell).collect();
            cell = neighbors[rng.gen_range(0..neighbors.len())];
            let ni = dims.index(cell);
            if !mask[ni] {
                mask[ni] = true;
                count += 1;
            }
        }
    }
}

/// Repeatedly carves the cheapest corridor (fewest obstacle cells) joining the
/// two largest free components until free space is connected.
fn connect_components(dims: GridDims, mask: &mut [bool]) {
    loop {
        let comps = components(dims, mask);
        if comps.len() <= 1 {
            return;
        }
        let mut in_b = vec![false; dims.len()];
        for &i in &comps[1] {
            in_b[i] = true;
        }
        // 0-1 BFS: entering an obstacle costs 1, a free cell costs 0.
        let mut cost = vec![usize::MAX; dims.len()];
        let mut parent = vec![usize::MAX; dims.len()];
        let mut deque = VecDeque::new();
        for &i in &comps[0] {
            cost[i] = 0;
            deque.push_back(i);
        }
        let mut reached = None;
        while let Some(i) = deque.pop_front() {
            if in_b[i] {
                reached = Some(i);
                break;
            }
            for n in dims.neighbors4(dims.cell(i)) {
                let ni = dims.index(n);
                let step = usize::from(mask[ni]);
                if cost[i] + step < cost[ni] {
                    cost[ni] = cost[i] + step;
                    parent[ni] = i;
                    if step == 0 {
                        deque.push_front(ni);
                    } else {
                        deque.push_back(ni);
                    }
                }
            }
        }
        let mut cur = reached.expect("grid is connected when obstacles are ignored");
        while cur != usize::MAX {
            mask[cur] = false;
            cur = parent[cur];
        }
    }
}

fn top_up<R: Rng>(dims: GridDims, mask: &mut [bool], target: usize, rng: &mut R) {
    let mut count = mask.iter().filter(|o| **o).count();
    if count >= target {
        return;
    }
    let mut free: Vec<usize> = (0..dims.len()).filter(|&i| !mask[i]).collect();
    free.shuffle(rng);
    for idx in free {
        if count >= target {
            break;
        }
        mask[idx] = true;
        let comps = components(dims, mask);
        if comps.len() == 1 {
            count += 1;
        } else {
            mask[idx] = false;
        }
    }
}
